"""Analytical reference values: closed forms, ODEs, spectral thresholds, planes.

Time is always scaled, ``t = rounds / n``.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

BLOW_UP = 1e6
GOLDEN = (math.sqrt(5) - 1) / 2


class BlowUp(ArithmeticError):
    """Raised when a closed form is evaluated at or past its singularity."""


def golden_section(f, lo, hi, tol=1e-8, maximize=False):
    """Extremum of a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``."""
    sign = -1.0 if maximize else 1.0
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = sign * f(c), sign * f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = sign * f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = sign * f(d)
    x = (a + b) / 2
    return x, f(x)


# -- susceptibility under pure random edge addition ---------------------------

def phi(t, L=1.0):
    """Susceptibility after ``t*n`` random edges, starting from susceptibility L."""
    denom = 1.0 / L - 2.0 * t
    if denom <= 0:
        raise BlowUp(f"phi blows up at t = {1 / (2 * L)}")
    return 1.0 / denom


def rk4(f, y0, t0, t1, step):
    """Classical RK4 from t0 to t1, last step shortened to land on t1."""
    t, y = t0, y0
    while t1 - t > 1e-15:
        h = min(step, t1 - t)
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h * k1 / 2)
        k3 = f(t + h / 2, y + h * k2 / 2)
        k4 = f(t + h, y + h * k3)
        y = y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        t = t + h
    return y


# -- two-color avoidance ODEs -------------------------------------------------

def matching_curves(t):
    """Limiting isolated-vertex fraction and per-color matching fraction at time t."""
    return math.exp(-2 * t), t * math.exp(-4 * t)


def x_rhs(t, x):
    b = t * math.exp(-4 * t)
    return x * x + 3 * b * b - 2 * b * x


@dataclass
class OdeSolution:
    grid: np.ndarray
    values: np.ndarray
    step: float
    blow_up_time: Optional[float] = None
    slopes: np.ndarray = field(default=None, repr=False)

    def __call__(self, t):
        """Cubic Hermite interpolation between grid points."""
        if t < self.grid[0] or t > self.grid[-1]:
            raise ValueError(f"t={t} outside the integrated range")
        i = int(np.searchsorted(self.grid, t, side="right")) - 1
        i = min(i, len(self.grid) - 2)
        t0, t1 = self.grid[i], self.grid[i + 1]
        h = t1 - t0
        s = (t - t0) / h
        y0, y1 = self.values[i], self.values[i + 1]
        m0, m1 = self.slopes[i] * h, self.slopes[i + 1] * h
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        return float(h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1)


def _rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h * k1 / 2)
    k3 = f(t + h / 2, y + h * k2 / 2)
    k4 = f(t + h, y + h * k3)
    return y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6


def integrate_x(t_max=1.2, step=1e-4, threshold=BLOW_UP, bracket=1e-4):
    """RK4 for the blue-susceptibility ODE ``x' = x^2 + 3b^2 - 2bx``, ``x(0) = 1``.

    Stops at ``t_max`` or when x escapes past ``threshold``; the escape time
    is then located by halving the step from the last good point until the
    bracket is narrower than ``bracket``.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    f = x_rhs
    grid, values = [0.0], [1.0]
    t, x = 0.0, 1.0
    blow_up = None
    h = step
    while t_max - t > 1e-12:
        h_try = min(h, t_max - t)
        nxt = _rk4_step(f, t, x, h_try)
        if not math.isfinite(nxt) or nxt > threshold:
            # halve from the last good point until the crossing is bracketed
            while h_try > bracket:
                h_try /= 2
                nxt = _rk4_step(f, t, x, h_try)
                if math.isfinite(nxt) and nxt <= threshold:
                    t, x = t + h_try, nxt
            blow_up = t + h_try / 2
            break
        t, x = t + h_try, nxt
        # keep the output grid uniform; interior halving points are dropped
        grid.append(t)
        values.append(x)
    grid = np.array(grid)
    values = np.array(values)
    slopes = np.array([f(a, b) for a, b in zip(grid, values)])
    return OdeSolution(grid, values, step, blow_up, slopes)


def checkpoint_sequence(count=20, solution=None):
    """``t_0 = 0``, ``t_{i+1} = t_i + 1 / (4 x(t_i))``; returns ``count`` terms."""
    sol = integrate_x(1.2) if solution is None else solution
    ts = [0.0]
    for _ in range(count - 1):
        ts.append(ts[-1] + 1.0 / (4.0 * sol(ts[-1])))
    return ts


# -- lower bounds for creating giants ------------------------------------------

@dataclass
class LowerBoundLedger:
    gamma: float
    L: list
    edge_budget: float

    @property
    def L_limit(self):
        return 1.0 / (1.0 - 1.0 / (2 * self.gamma))


def lower_bound_general(r, gamma):
    """Halving-adversary ledger for ``r = 2^t`` colors.

    ``edge_budget`` is the coefficient of n in the edge count
    ``(1 - gamma)/2 * sum_{i<t} 1/L_i``.
    """
    t = int(round(math.log2(r)))
    if r < 1 or 2**t != r:
        raise ValueError("r must be a power of two")
    if not 0.5 < gamma < 1:
        raise ValueError("gamma must lie in (1/2, 1)")
    L = [1.0]
    for _ in range(t):
        L.append(0.5 * (1 + L[-1] / gamma))
    budget = (1 - gamma) / 2 * sum(1.0 / x for x in L[:t])
    return LowerBoundLedger(gamma, L, budget)


def general_objective(gamma):
    return (1 - gamma) * (1 - 1 / (2 * gamma))


def optimize_gamma():
    """Maximizer of ``(1 - g)(1 - 1/(2g))`` on (1/2, 1): ``(g, value)``."""
    return golden_section(general_objective, 0.5, 1.0, maximize=True)


def lower_bound_two_colors(gamma):
    """Coefficient of n below which two giants cannot both be created."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    return 0.5 * ((1 - gamma) + 2 * gamma / (gamma + 1))


def optimize_two_colors():
    return golden_section(lower_bound_two_colors, 1e-9, 1 - 1e-9, maximize=True)


# -- spectral thresholds -------------------------------------------------------

@dataclass
class KernelMatrix:
    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        a = self.entries
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("kernel matrix must be square")
        if not np.array_equal(a, a.T):
            raise ValueError("kernel matrix must be symmetric")

    @property
    def k(self):
        return self.entries.shape[0]

    @property
    def normalized(self):
        return self.entries / self.k

    def has_giant(self, c=1.0):
        """Whether ``c * A / k`` has spectral radius above 1."""
        return c * spectral_radius(self.normalized) > 1.0


def spectral_radius(matrix, tol=1e-12, max_iter=200_000):
    """Spectral radius of a symmetric matrix by power iteration on its square.

    Squaring makes the dominant eigenvalue positive even when the largest
    eigenvalue in modulus is negative.
    """
    a = matrix.entries if isinstance(matrix, KernelMatrix) else np.asarray(matrix, dtype=float)
    if not np.any(a):
        return 0.0
    a2 = a @ a
    x = np.random.default_rng(12345).random(a.shape[0]) + 0.5
    x /= np.linalg.norm(x)
    prev = 0.0
    for _ in range(max_iter):
        y = a2 @ x
        rq = float(x @ y)
        norm = np.linalg.norm(y)
        if norm == 0:
            return 0.0
        x = y / norm
        if abs(rq - prev) < tol * max(1.0, abs(rq)):
            break
        prev = rq
    return math.sqrt(max(rq, 0.0))


def block_matrices(k, t):
    """``A1 = J_t`` in the top-left corner, ``A2 = J_k - A1``."""
    a1 = np.zeros((k, k), dtype=int)
    a1[:t, :t] = 1
    return a1, 1 - a1


def block_eigen_closed_form(k, t):
    """Spectral radii of the block pair ``(J_t embedded, J_k - J_t embedded)``."""
    if not 0 <= t <= k:
        raise ValueError("need 0 <= t <= k")
    rho2 = 0.5 * (k - t + math.sqrt(k * k + 2 * k * t - 3 * t * t))
    return float(t), rho2


def optimal_block_split(k):
    """Real split ``t`` maximizing the smaller radius; analytically ``2k/3``."""
    return golden_section(lambda t: min(block_eigen_closed_form(k, t)), 0.0, float(k),
                          maximize=True)


def kpartite_threshold(k):
    if k < 2:
        raise ValueError("k must be at least 2")
    return k / (k - 1)


# -- projective planes ---------------------------------------------------------

def is_prime(q):
    if q < 2:
        return False
    return all(q % d for d in range(2, int(math.isqrt(q)) + 1))


@dataclass
class ProjectivePlane:
    q: int
    points: list
    lines: list
    pair_to_line: np.ndarray = field(repr=False)

    @property
    def r(self):
        return len(self.points)

    def line_of(self, i, j):
        return int(self.pair_to_line[i, j])


def _canonical_vectors(q):
    """One representative (first nonzero coordinate 1) per 1-dim subspace of F_q^3."""
    vecs = []
    for a in range(q):
        for b in range(q):
            vecs.append((1, a, b))
    for b in range(q):
        vecs.append((0, 1, b))
    vecs.append((0, 0, 1))
    return vecs


def build_projective_plane(q):
    """PG(2, q) for prime q; points and lines are 0-based indices."""
    if not is_prime(q):
        raise ValueError(f"q={q} is not prime")
    points = _canonical_vectors(q)
    pts = np.array(points)
    lines = []
    for normal in points:
        on = np.flatnonzero((pts @ np.array(normal)) % q == 0)
        lines.append(on.tolist())
    r = len(points)
    pair_to_line = np.full((r, r), -1, dtype=np.int64)
    for idx, line in enumerate(lines):
        for i in line:
            for j in line:
                if i != j:
                    pair_to_line[i, j] = idx
    return ProjectivePlane(q, list(range(r)), lines, pair_to_line)


# -- adaptive two-phase creation ----------------------------------------------

def adaptive_thresholds(t):
    """Round counts (in units of n) after which each color has a giant."""
    if not 0 < t < 0.5:
        raise ValueError("t must lie in (0, 1/2)")
    alpha = 1 - math.exp(-2 * t)
    red = t + 0.5 / (1 / (1 - 2 * t) - math.exp(-2 * t))
    blue = t + 1 / (1 - alpha + math.sqrt(1 + 2 * alpha - 3 * alpha**2))
    return {"alpha": alpha, "red_rounds": red, "blue_rounds": blue}


def optimize_adaptive():
    """Phase-switch time minimizing the later of the two giant births."""
    def later(t):
        th = adaptive_thresholds(t)
        return max(th["red_rounds"], th["blue_rounds"])

    t, value = golden_section(later, 1e-6, 0.5 - 1e-6)
    return {"t": t, "rounds": value, **adaptive_thresholds(t)}

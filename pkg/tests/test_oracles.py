import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from rgl import oracles
from rgl.oracles import (BlowUp, KernelMatrix, adaptive_thresholds, block_eigen_closed_form,
                         block_matrices, build_projective_plane, checkpoint_sequence,
                         general_objective, integrate_x, kpartite_threshold,
                         lower_bound_general, lower_bound_two_colors, matching_curves,
                         optimal_block_split, optimize_adaptive, optimize_gamma,
                         optimize_two_colors, phi, rk4, spectral_radius)


@pytest.fixture(scope="module")
def x_solution():
    return integrate_x(1.2, 1e-4)


def test_phi_examples():
    assert phi(0) == 1
    assert phi(0.25) == pytest.approx(2)
    gamma, L = 0.5, 1.0
    assert phi((1 - gamma) / (2 * L), L) == pytest.approx(L / gamma)
    assert phi(0.1, 2.0) == pytest.approx(1 / (0.5 - 0.2))
    with pytest.raises(BlowUp):
        phi(0.5)


def test_phi_matches_rk4():
    f = lambda t, y: 2 * y * y
    for t in np.linspace(0, 0.4, 9):
        assert abs(rk4(f, 1.0, 0.0, t, 1e-4) - phi(t)) < 1e-8


def test_matching_curves_examples():
    assert matching_curves(0) == (1, 0)
    i, b = matching_curves(0.25)
    assert i == pytest.approx(0.606531, abs=1e-6)
    assert b == pytest.approx(0.091970, abs=1e-6)


def test_matching_curve_satisfies_its_ode():
    h, t = 1e-5, 0.5
    b = lambda s: matching_curves(s)[1]
    deriv = (b(t + h) - b(t - h)) / (2 * h)
    assert abs(deriv - (math.exp(-4 * t) - 4 * b(t))) < 1e-8


def test_x_blow_up_and_bound(x_solution):
    assert x_solution(0.0) == 1.0
    assert 1.055 <= x_solution.blow_up_time <= 1.075
    assert x_solution(1.06) <= 209
    assert x_solution(1.06) == pytest.approx(208.1, abs=0.1)


def test_x_step_halving_bound():
    # the absolute 10 h^4 constant holds while x stays moderate; past t ~ 0.8
    # the local error constant grows with powers of x
    h = 0.01
    a, b = integrate_x(1.2, h), integrate_x(1.2, h / 2)
    for t in a.grid[a.grid <= 0.75]:
        assert abs(a(t) - b(t)) <= 10 * h**4


def test_x_rk4_convergence_order():
    sols = [integrate_x(1.2, h) for h in (0.002, 0.001, 0.0005)]
    for t in (0.5, 1.0, 1.06):
        e1 = abs(sols[0](t) - sols[1](t))
        e2 = abs(sols[1](t) - sols[2](t))
        assert 3.5 < math.log2(e1 / e2) < 4.5


def test_x_matches_scipy(x_solution):
    ref = solve_ivp(oracles.x_rhs, (0, 1.06), [1.0], rtol=1e-11, atol=1e-12, dense_output=True)
    for t in (0.25, 0.5, 1.0, 1.06):
        assert x_solution(t) == pytest.approx(ref.sol(t)[0], rel=1e-6)


def test_x_rejects_bad_step():
    with pytest.raises(ValueError):
        integrate_x(1.0, 0.0)


def test_checkpoint_sequence(x_solution):
    ts = checkpoint_sequence(20, x_solution)
    assert len(ts) == 20
    assert ts[0] == 0 and ts[1] == pytest.approx(0.25)
    inc = np.diff(ts)
    assert np.all(inc > 0) and np.all(np.diff(inc) < 0)
    assert ts[19] > 1.06


def test_lower_bound_general():
    g, v = optimize_gamma()
    assert g == pytest.approx(1 / math.sqrt(2), abs=1e-6)
    assert v == pytest.approx(1.5 - math.sqrt(2), abs=1e-6)
    assert v / 2 == pytest.approx(0.0429, abs=1e-4)
    led = lower_bound_general(4, 1 / math.sqrt(2))
    assert led.L[1] == pytest.approx(0.5 + math.sqrt(2) / 2)
    assert len(led.L) == 3
    with pytest.raises(ValueError):
        lower_bound_general(4, 0.5)
    with pytest.raises(ValueError):
        lower_bound_general(3, 0.7)


def test_lower_bound_two_colors():
    g, v = optimize_two_colors()
    assert g == pytest.approx(math.sqrt(2) - 1, abs=1e-6)
    assert v == pytest.approx(2 - math.sqrt(2), abs=1e-6)
    assert lower_bound_two_colors(1 - 1e-12) == pytest.approx(0.5)


@pytest.mark.parametrize("f, x", [
    (general_objective, 1 / math.sqrt(2)),
    (lower_bound_two_colors, math.sqrt(2) - 1),
])
def test_optima_are_stationary(f, x):
    h = 1e-6
    assert abs((f(x + h) - f(x - h)) / (2 * h)) < 1e-6


def test_spectral_examples():
    for k in (1, 2, 5, 17):
        assert spectral_radius(np.ones((k, k))) == pytest.approx(k, abs=1e-9)
    a = np.ones((4, 4)) - np.eye(4)
    assert spectral_radius(a) == pytest.approx(3, abs=1e-9)
    assert spectral_radius(np.zeros((3, 3))) == 0.0
    a1, a2 = block_matrices(3, 2)
    assert spectral_radius(a1) == pytest.approx(2, abs=1e-9)
    assert spectral_radius(a2) == pytest.approx(2, abs=1e-9)


def test_spectral_negative_dominant_eigenvalue():
    # eigenvalues 1 and -3
    a = np.array([[-1.0, 2.0], [2.0, -1.0]])
    assert spectral_radius(a) == pytest.approx(3, abs=1e-9)


def test_kernel_matrix():
    km = KernelMatrix(np.ones((4, 4)))
    assert km.has_giant(1.01) and not km.has_giant(0.99)
    with pytest.raises(ValueError):
        KernelMatrix([[0, 1], [0, 0]])


def test_block_closed_forms():
    assert block_eigen_closed_form(3, 2) == pytest.approx((2, 2))
    assert block_eigen_closed_form(7, 0) == pytest.approx((0, 7))
    r1, r2 = block_eigen_closed_form(30, 20)
    assert r1 == pytest.approx(20) and r2 == pytest.approx(20)
    for k in range(1, 51):
        for t in sorted({0, k // 3, (2 * k) // 3, k}):
            a1, a2 = block_matrices(k, t)
            c1, c2 = block_eigen_closed_form(k, t)
            assert abs(spectral_radius(a1) - c1) < 1e-9
            assert abs(spectral_radius(a2) - c2) < 1e-9
    best, _ = optimal_block_split(9)
    assert best == pytest.approx(6, abs=1e-6)


def test_kpartite_threshold():
    assert kpartite_threshold(2) == 2
    assert kpartite_threshold(3) == 1.5
    vals = [kpartite_threshold(k) for k in range(2, 50)]
    assert all(a > b > 1 for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        kpartite_threshold(1)


@pytest.mark.parametrize("q", [2, 3, 5, 7])
def test_projective_plane(q):
    plane = build_projective_plane(q)
    r = q * q + q + 1
    assert plane.r == r and len(plane.lines) == r
    assert all(len(line) == q + 1 for line in plane.lines)
    cover = np.zeros((r, r), dtype=int)
    for line in plane.lines:
        for i in line:
            for j in line:
                if i != j:
                    cover[i, j] += 1
    assert np.all(cover + np.eye(r, dtype=int) == 1)
    assert len(plane.lines) * math.comb(q + 1, 2) == math.comb(r, 2)
    for i in range(r):
        for j in range(r):
            if i != j:
                assert i in plane.lines[plane.line_of(i, j)]


def test_projective_plane_rejects_non_prime():
    with pytest.raises(ValueError):
        build_projective_plane(4)


def test_adaptive_thresholds():
    opt = optimize_adaptive()
    assert opt["t"] == pytest.approx(0.189, abs=1e-3)
    assert opt["alpha"] == pytest.approx(0.314, abs=1e-3)
    assert opt["rounds"] <= 0.733
    th = adaptive_thresholds(0.189)
    assert th["red_rounds"] == pytest.approx(0.731, abs=1e-3)
    assert th["blue_rounds"] == pytest.approx(0.732, abs=1e-3)
    with pytest.raises(ValueError):
        adaptive_thresholds(0.5)

"""Experiment orchestration: trials, aggregation, threshold search, output."""

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import rng
from .edges import GNM, PRODUCT, EdgeStream, StreamConfig
from .graph_state import ProcessState
from .strategies import StrategySpec, Tag, build_strategy

CHUNK = 1 << 20
METRICS = ("largest_per_color", "susceptibility_per_color", "matching_counts", "tail_fit")
DEFAULT_METRICS = ("largest_per_color", "susceptibility_per_color")
CSV_COLUMNS = ["trial", "seed", "t", "color", "largest_frac", "susceptibility",
               "I_frac", "B_frac", "R_frac"]


class ConfigError(ValueError):
    pass


class TrialFailure(RuntimeError):
    def __init__(self, trial_index, seed, cause):
        super().__init__(f"trial {trial_index} (seed {seed}) failed: {cause!r}")
        self.trial_index = trial_index
        self.seed = seed


@dataclass
class ExperimentConfig:
    n: int
    checkpoints: list
    strategy: StrategySpec
    trials: int = 1
    master_seed: int = 0
    metrics: tuple = DEFAULT_METRICS
    model: str = PRODUCT
    predicates: tuple = ("all_giant", "all_small")
    giant_fraction: float = 0.005
    small_constant: float = 30.0
    output: Optional[dict] = None
    assertions: list = field(default_factory=list)

    def validate(self):
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not self.checkpoints or list(self.checkpoints) != sorted(self.checkpoints):
            raise ConfigError("checkpoints must be a non-empty ascending list")
        if min(self.checkpoints) < 0:
            raise ConfigError("checkpoints must be non-negative")
        if self.model not in (PRODUCT, GNM):
            raise ConfigError(f"unsupported model {self.model!r}")
        bad = set(self.metrics) - set(METRICS)
        if bad:
            raise ConfigError(f"unknown metrics {sorted(bad)}")
        bad = set(self.predicates) - set(PREDICATES)
        if bad:
            raise ConfigError(f"unknown predicates {sorted(bad)}")
        try:
            self.strategy.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.output is not None and self.output.get("format", "json") not in ("csv", "json"):
            raise ConfigError("output format must be csv or json")
        return self

    def rounds_at(self, t):
        return int(math.floor(t * self.n))

    def to_dict(self):
        d = asdict(self)
        d["strategy"] = self.strategy.to_dict()
        d["metrics"] = list(self.metrics)
        d["predicates"] = list(self.predicates)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        try:
            if "rounds" in d:
                rounds = d.pop("rounds")
                if isinstance(rounds, (int, float)):
                    rounds = [rounds]
                d.setdefault("checkpoints", [r / d["n"] for r in rounds])
            d["strategy"] = StrategySpec(**d["strategy"])
            d["metrics"] = tuple(d.get("metrics", DEFAULT_METRICS))
            d["predicates"] = tuple(d.get("predicates", ("all_giant", "all_small")))
            cfg = cls(**d)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        return cfg.validate()

    def with_checkpoints(self, checkpoints):
        d = self.to_dict()
        d["checkpoints"] = list(checkpoints)
        d["assertions"] = []
        return ExperimentConfig.from_dict(d)


def load_config(path):
    try:
        with open(path) as fh:
            return ExperimentConfig.from_dict(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


@dataclass
class TraceSample:
    trial_index: int
    t: float
    rounds: int
    largest_frac: Optional[list]
    susceptibility: Optional[list]
    I_frac: Optional[float] = None
    B_frac: Optional[float] = None
    R_frac: Optional[float] = None
    tail: Optional[list] = None
    feasible: Optional[bool] = None


@dataclass
class TrialResult:
    trial_index: int
    seed: int
    samples: list
    summary: dict
    audit: dict

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["samples"] = [TraceSample(**s) for s in d["samples"]]
        return cls(**d)


def _sample(config, state, trial_index, t, feasible=None):
    n, r = state.n, state.r
    s = TraceSample(trial_index, t, state.round, None, None, feasible=feasible)
    if "largest_per_color" in config.metrics:
        s.largest_frac = [state.largest(c) / n for c in range(r)]
    if "susceptibility_per_color" in config.metrics:
        s.susceptibility = [state.susceptibility(c) for c in range(r)]
    if "matching_counts" in config.metrics:
        mc = state.matching_counts
        s.I_frac = mc["I"] / n
        if r >= 2:
            s.B_frac = mc["B"] / n
            s.R_frac = mc["R"] / n
    if "tail_fit" in config.metrics:
        s.tail = []
        for c in range(r):
            fit = state.fit_component_tail(c)
            s.tail.append({"K": fit.K, "c": fit.c, "max_component": fit.max_component,
                           "dominates": fit.dominates()})
    return s


def run_trial(config, trial_index):
    """Run one trial; the result depends only on (config, trial_index)."""
    config.validate()
    seed = rng.derive_seed(config.master_seed, trial_index)
    strategy = build_strategy(config.strategy, seed)
    r = config.strategy.r
    audit = {}
    samples = []
    if not strategy.online:
        for t in config.checkpoints:
            m = config.rounds_at(t)
            us, vs = EdgeStream(StreamConfig(config.n, seed, GNM, m=m)).take(m)
            res = strategy.run(us, vs, config.n)
            if res.feasible:
                samples.append(_sample(config, res.state, trial_index, t, True))
                samples[-1].rounds = m
            else:
                samples.append(TraceSample(trial_index, t, m, None, None, feasible=False))
            key = "OFFLINE" if res.feasible else "INFEASIBLE"
            audit[key] = audit.get(key, 0) + 1
        return TrialResult(trial_index, seed, samples, _summary(samples), audit)

    total = config.rounds_at(config.checkpoints[-1])
    stream = EdgeStream(StreamConfig(config.n, seed, config.model, m=total))
    state = ProcessState(config.n, r)
    counts = np.zeros(len(Tag), dtype=np.int64)
    for t in config.checkpoints:
        target = config.rounds_at(t)
        while state.round < target:
            us, vs = stream.take(min(CHUNK, target - state.round))
            _, _, tags = strategy.play(state, us, vs)
            counts += np.bincount(tags, minlength=len(Tag))
        samples.append(_sample(config, state, trial_index, t))
    audit = {Tag(i).name: int(c) for i, c in enumerate(counts) if c}
    return TrialResult(trial_index, seed, samples, _summary(samples), audit)


def _summary(samples):
    last = samples[-1]
    return {"t": last.t, "rounds": last.rounds, "largest_frac": last.largest_frac,
            "susceptibility": last.susceptibility}


# -- predicates ------------------------------------------------------------------

def _largest(sample):
    if sample.largest_frac is None:
        raise ConfigError("giant predicates need the largest_per_color metric")
    return sample.largest_frac


def _feasible(sample):
    return sample.feasible is not False


PREDICATES = {
    "giant": lambda s, cfg: _feasible(s) and _largest(s)[0] >= cfg.giant_fraction,
    "all_giant": lambda s, cfg: _feasible(s) and min(_largest(s)) >= cfg.giant_fraction,
    "any_giant": lambda s, cfg: _feasible(s) and max(_largest(s)) >= cfg.giant_fraction,
    "not_all_giant": lambda s, cfg: _feasible(s) and min(_largest(s)) < cfg.giant_fraction,
    "all_small": lambda s, cfg: _feasible(s)
    and max(_largest(s)) * cfg.n <= cfg.small_constant * math.log(cfg.n),
    "feasible": lambda s, cfg: s.feasible is True,
}


def evaluate(predicate, sample, config):
    return bool(PREDICATES[predicate](sample, config))


# -- experiments -----------------------------------------------------------------

@dataclass
class ExperimentReport:
    config: dict
    trials: list
    aggregates: list

    def to_dict(self):
        return {"config": self.config, "trials": [t.to_dict() for t in self.trials],
                "aggregates": self.aggregates}

    @classmethod
    def from_dict(cls, d):
        return cls(d["config"], [TrialResult.from_dict(t) for t in d["trials"]], d["aggregates"])

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def fraction(self, t, predicate):
        for agg in self.aggregates:
            if math.isclose(agg["t"], t):
                return agg["success"][predicate]
        raise KeyError(t)


def worker_count():
    env = os.environ.get("RGL_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _aggregate(config, trials):
    out = []
    for i, t in enumerate(config.checkpoints):
        samples = [tr.samples[i] for tr in trials]
        agg = {"t": t, "rounds": config.rounds_at(t), "trials": len(samples)}
        for name in ("largest_frac", "susceptibility"):
            rows = [getattr(s, name) for s in samples if getattr(s, name) is not None]
            if rows:
                arr = np.array(rows)
                agg[name] = {"median": np.median(arr, axis=0).tolist(),
                             "min": arr.min(axis=0).tolist(), "max": arr.max(axis=0).tolist()}
        success = {}
        for p in config.predicates:
            try:
                hits = sum(evaluate(p, s, config) for s in samples)
            except ConfigError:
                continue
            success[p] = hits / len(samples)
        agg["success"] = success
        out.append(agg)
    return out


def run_experiment(config, workers=None):
    """All trials of ``config``; the report is independent of scheduling."""
    config.validate()
    workers = worker_count() if workers is None else workers
    indices = range(config.trials)

    def one(i):
        try:
            return run_trial(config, i)
        except Exception as exc:
            raise TrialFailure(i, rng.derive_seed(config.master_seed, i), exc) from exc

    if workers <= 1 or config.trials == 1:
        results = [one(i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, indices))
    results.sort(key=lambda tr: tr.trial_index)
    return ExperimentReport(config.to_dict(), results, _aggregate(config, results))


def check_assertions(config, report):
    """``[(assertion, observed_fraction, passed)]`` for the config's assertions."""
    out = []
    for a in config.assertions:
        frac = sum(evaluate(a["predicate"], tr.samples[config.checkpoints.index(a["t"])], config)
                   for tr in report.trials) / len(report.trials)
        out.append((a, frac, frac >= a.get("min_fraction", 0.5)))
    return out


@dataclass
class ThresholdResult:
    lo: float
    hi: float
    probes: list
    consistent: bool

    @property
    def width(self):
        return self.hi - self.lo


def estimate_threshold(config, predicate, t_lo, t_hi, resolution, majority=0.5, workers=None):
    """Bisect for the time at which ``predicate`` starts holding in most trials.

    Assumes the predicate is monotone in t.  If it already holds at ``t_lo``
    or fails at ``t_hi`` the bracket is reported as inconsistent.
    """
    if not t_lo < t_hi:
        raise ConfigError("need t_lo < t_hi")
    if predicate not in PREDICATES:
        raise ConfigError(f"unknown predicate {predicate!r}")
    probes = []

    def holds(t):
        cfg = config.with_checkpoints([t])
        cfg.predicates = (predicate,)
        frac = run_experiment(cfg, workers).aggregates[0]["success"][predicate]
        probes.append((t, frac))
        return frac > majority

    lo, hi = t_lo, t_hi
    at_lo, at_hi = holds(lo), holds(hi)
    consistent = not at_lo and at_hi
    if not consistent:
        return ThresholdResult(lo, hi, probes, False)
    while hi - lo > resolution:
        mid = (lo + hi) / 2
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return ThresholdResult(lo, hi, probes, True)


# -- output ------------------------------------------------------------------------

def _fmt(x):
    return "" if x is None else repr(float(x))


def csv_rows(report):
    for tr in report.trials:
        for s in tr.samples:
            colors = len(s.largest_frac or s.susceptibility or [])
            for c in range(colors):
                yield [tr.trial_index, tr.seed, repr(float(s.t)), c,
                       _fmt(s.largest_frac[c] if s.largest_frac else None),
                       _fmt(s.susceptibility[c] if s.susceptibility else None),
                       _fmt(s.I_frac), _fmt(s.B_frac), _fmt(s.R_frac)]


def emit(report, fmt, path=None):
    """Write the report as CSV or JSON to ``path`` (or return the text when path is None)."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(csv_rows(report))
        text = buf.getvalue()
    elif fmt == "json":
        text = report.to_json() + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is None:
        return text
    with open(path, "w") as fh:
        fh.write(text)
    return path


def empty_report(config):
    return ExperimentReport(config.to_dict(), [], [])

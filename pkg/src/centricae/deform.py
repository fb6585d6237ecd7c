"""Supervised radial-deformation optimizers.

Two methods search per-axis factors that maximize radii-based AUROC:

* :func:`greedy_factor_search` fixes one axis at a time: first the decimal
  order of magnitude, then the leading digit, then finer signed digits.
* :func:`angular_ascent` walks the positive orthant of the sphere of radius
  ``sqrt(D)`` (scale is irrelevant to rankings) by finite-difference gradient
  ascent on the hyperspherical angles.

:func:`basin_hopping` is a Metropolis random walk on log-factors that
minimizes the fraud rank sum; it exists as a comparison baseline.

Scores are computed on squared radii, which rank identically to radii.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from ._backend import kernels
from .geometry import Dataset, check_factors, make_rng

FACTOR_FLOOR = 1e-6
_MAX_ORDER = 30


@dataclass(frozen=True)
class GreedyConfig:
    digits: int = 3
    passes: int = 2
    score: str = "auroc"

    def __post_init__(self):
        if self.digits < 1:
            raise ValueError("digits must be >= 1")
        if self.passes < 1:
            raise ValueError("passes must be >= 1")
        parse_score(self.score)


@dataclass(frozen=True)
class AscentConfig:
    epochs: int = 15
    step_size: float = 0.1
    fd_step: float = 0.05
    subsample: float = 1.0
    seed: int = 0
    # step shrink factor applied after an epoch that fails to improve
    step_decay: float = 0.5

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not 0.0 < self.subsample <= 1.0:
            raise ValueError("subsample must lie in (0, 1]")
        if self.step_size <= 0 or self.fd_step <= 0:
            raise ValueError("step_size and fd_step must be positive")
        if not 0.0 < self.step_decay <= 1.0:
            raise ValueError("step_decay must lie in (0, 1]")


@dataclass(frozen=True)
class BasinHopConfig:
    iterations: int = 1000
    perturbation_scale: float = 0.3
    temperature: float = 1e-3
    seed: int = 0
    max_seconds: float | None = None
    record_fpr: float = 0.002

    def __post_init__(self):
        if self.iterations < 0 or self.perturbation_scale < 0 or self.temperature < 0:
            raise ValueError("basin-hopping parameters must be nonnegative")


@dataclass
class AngularState:
    angles: np.ndarray

    @property
    def radius(self) -> float:
        return math.sqrt(self.angles.size + 1)


@dataclass
class SearchResult:
    factors: np.ndarray
    score: float
    trace: list[float] = field(default_factory=list)
    evaluations: int = 0


@dataclass
class HopResult:
    factors: np.ndarray
    best_rank_sum: float
    rank_sums: list[float] = field(default_factory=list)
    wall_clock: list[float] = field(default_factory=list)
    tpr: list[float] = field(default_factory=list)


@dataclass
class DeformResult:
    factors: np.ndarray
    score: float
    greedy: SearchResult
    ascent: SearchResult | None
    # (stage name, seconds since start, score, TPR at record_fpr)
    stages: list[tuple[str, float, float, float]] = field(default_factory=list)


def parse_score(tag: str):
    """``"auroc"`` or ``"tpr@<fpr>"``; returns ``None`` or the FPR target."""
    if tag == "auroc":
        return None
    if tag.startswith("tpr@"):
        target = float(tag[4:])
        if not 0.0 < target < 1.0:
            raise ValueError(f"bad FPR target in score tag {tag!r}")
        return target
    raise ValueError(f"unknown score tag {tag!r}")


class RadialScorer:
    """Scores factor vectors by the classification quality of deformed radii.

    Squared deviations from the center are precomputed per class, so one
    evaluation costs a weighted row sum plus a sort.
    """

    def __init__(self, features: np.ndarray, labels: np.ndarray, center, score: str = "auroc"):
        x = np.asarray(features, dtype=np.float64)
        y = np.asarray(labels).astype(bool)
        k = int(y.sum())
        if k == 0 or k == y.size:
            raise ValueError("radial scoring needs both classes present")
        c = np.asarray(center, dtype=np.float64)
        if c.shape != (x.shape[1],):
            raise ValueError(f"center has shape {c.shape}, data has {x.shape[1]} features")
        dev2 = (x - c) ** 2
        self.neg = np.ascontiguousarray(dev2[~y])
        self.pos = np.ascontiguousarray(dev2[y])
        self.dim = x.shape[1]
        self.fpr_target = parse_score(score)
        self.evaluations = 0

    @classmethod
    def from_dataset(cls, data: Dataset, center, score: str = "auroc") -> "RadialScorer":
        return cls(data.features, data.labels, center, score)

    @property
    def n_neg(self) -> int:
        return self.neg.shape[0]

    @property
    def n_pos(self) -> int:
        return self.pos.shape[0]

    def subsample(self, rng: np.random.Generator, fraction: float) -> "RadialScorer":
        """Stratified row subsample keeping at least one row per class."""
        sub = object.__new__(RadialScorer)
        nn = max(1, int(round(fraction * self.n_neg)))
        npos = max(1, int(round(fraction * self.n_pos)))
        sub.neg = self.neg[np.sort(rng.choice(self.n_neg, nn, replace=False))]
        sub.pos = self.pos[np.sort(rng.choice(self.n_pos, npos, replace=False))]
        sub.dim = self.dim
        sub.fpr_target = self.fpr_target
        sub.evaluations = 0
        return sub

    def split_scores(self, factors) -> tuple[np.ndarray, np.ndarray]:
        w = np.asarray(factors, dtype=np.float64) ** 2
        return kernels.weighted_sq_sum(self.neg, w), kernels.weighted_sq_sum(self.pos, w)

    def auroc(self, factors) -> float:
        self.evaluations += 1
        w = np.asarray(factors, dtype=np.float64) ** 2
        return float(kernels.deformed_auroc(self.neg, self.pos, w))

    def tpr(self, factors, fpr_target: float) -> float:
        neg, pos = self.split_scores(factors)
        scores = np.concatenate([neg, pos])
        labels = np.concatenate([np.zeros(neg.size, np.int8), np.ones(pos.size, np.int8)])
        return metrics.tpr_at_fpr_scores(scores, labels, fpr_target)

    def rank_sum(self, factors) -> float:
        """Fraud rank sum of the deformed radii (ties averaged)."""
        self.evaluations += 1
        neg, pos = self.split_scores(factors)
        k, n = pos.size, neg.size + pos.size
        u = kernels.mw_u(neg, pos)
        return float(k * (n - 1) - (u + k * (k - 1) / 2.0))

    def __call__(self, factors) -> float:
        if self.fpr_target is None:
            return self.auroc(factors)
        self.evaluations += 1
        return self.tpr(factors, self.fpr_target)

    def axis_function(self, factors, axis: int):
        """Score as a function of the single factor on ``axis``, others frozen."""
        w = np.asarray(factors, dtype=np.float64) ** 2
        w_rest = w.copy()
        w_rest[axis] = 0.0
        if self.fpr_target is not None:
            def score_tpr(value: float) -> float:
                trial = np.sqrt(w_rest)
                trial[axis] = value
                return self(trial)
            return score_tpr
        neg_rest = kernels.weighted_sq_sum(self.neg, w_rest)
        pos_rest = kernels.weighted_sq_sum(self.pos, w_rest)
        neg_col = np.ascontiguousarray(self.neg[:, axis])
        pos_col = np.ascontiguousarray(self.pos[:, axis])

        def score_auroc(value: float) -> float:
            self.evaluations += 1
            return float(kernels.axis_auroc(neg_rest, neg_col, pos_rest, pos_col, value * value))
        return score_auroc


def _order_of(value: float) -> int:
    return int(math.floor(math.log10(value) + 1e-12))


def _search_axis(score_fn, value: float, score: float, digits: int, trace: list[float]):
    """Greedy decimal search for one factor; returns (value, score)."""

    def accept(candidate: float, new: float):
        nonlocal value, score
        assert new > score
        value, score = candidate, new
        trace.append(new)

    m = _order_of(value)
    # order of magnitude: upward first, downward only if nothing improved
    order = m
    moved = False
    while order < _MAX_ORDER:
        order += 1
        new = score_fn(10.0 ** order)
        if new <= score:
            break
        accept(10.0 ** order, new)
        moved = True
    if not moved:
        order = m
        while order > -_MAX_ORDER:
            order -= 1
            new = score_fn(10.0 ** order)
            if new <= score:
                break
            accept(10.0 ** order, new)
    m = _order_of(value)

    # leading digit: base + 1*10^m, base + 2*10^m, ... until stagnation
    base = value
    for digit in range(1, 10):
        candidate = base + digit * 10.0 ** m
        new = score_fn(candidate)
        if new <= score:
            break
        accept(candidate, new)

    # finer digits may be positive or negative corrections
    for q in range(1, digits):
        step = 10.0 ** (m - q)
        base = value
        improved = False
        for digit in range(1, 10):
            candidate = base + digit * step
            new = score_fn(candidate)
            if new <= score:
                break
            accept(candidate, new)
            improved = True
        if not improved:
            for digit in range(1, 10):
                candidate = base - digit * step
                if candidate <= 0:
                    break
                new = score_fn(candidate)
                if new <= score:
                    break
                accept(candidate, new)
    return value, score


def greedy_factor_search(
    data: Dataset | RadialScorer,
    center=None,
    cfg: GreedyConfig | None = None,
    initial=None,
) -> SearchResult:
    """Axis-by-axis decimal search of deformation factors.

    Factors are never reset between passes and a candidate is accepted only
    on strict score improvement, so ``trace`` (the score after every accepted
    change) is strictly increasing.
    """
    cfg = cfg or GreedyConfig()
    scorer = data if isinstance(data, RadialScorer) else RadialScorer.from_dataset(data, center, cfg.score)
    f = np.ones(scorer.dim) if initial is None else check_factors(initial, scorer.dim).copy()
    start_evals = scorer.evaluations
    score = scorer(f)
    trace = [score]
    for _ in range(cfg.passes):
        for axis in range(scorer.dim):
            fn = scorer.axis_function(f, axis)
            f[axis], score = _search_axis(fn, float(f[axis]), score, cfg.digits, trace)
    return SearchResult(f, score, trace, scorer.evaluations - start_evals)


def angles_to_factors(state: AngularState | np.ndarray) -> np.ndarray:
    """Point of the radius-sqrt(D) sphere with the given D-1 hyperspherical angles."""
    a = np.asarray(state.angles if isinstance(state, AngularState) else state, dtype=np.float64)
    d = a.size + 1
    sines = np.concatenate([[1.0], np.cumprod(np.sin(a))])
    cosines = np.concatenate([np.cos(a), [1.0]])
    return math.sqrt(d) * sines * cosines


def factors_to_angles(factors) -> AngularState:
    f = np.asarray(factors, dtype=np.float64)
    if f.ndim != 1 or f.size < 2:
        raise ValueError("need a factor vector with at least two entries")
    if np.any(f < 0):
        raise ValueError("factors must be nonnegative")
    norm = np.linalg.norm(f)
    if norm == 0:
        raise ValueError("zero-norm factor vector has no direction")
    # tail[k] = ||f[k+1:]||
    tail = np.sqrt(np.cumsum((f[::-1] ** 2))[::-1])[1:]
    return AngularState(np.arctan2(tail, f[:-1]))


def _project(angles: np.ndarray) -> np.ndarray:
    """Keep angles in the positive orthant with every factor above the floor."""
    a = np.clip(angles, 0.0, math.pi / 2)
    f = angles_to_factors(a)
    if f.min() >= FACTOR_FLOOR:
        return a
    f = np.maximum(f, FACTOR_FLOOR * (1 + 1e-6))
    f *= math.sqrt(f.size) / np.linalg.norm(f)
    return factors_to_angles(np.maximum(f, FACTOR_FLOOR)).angles


def angular_ascent(
    data: Dataset | RadialScorer,
    center=None,
    cfg: AscentConfig | None = None,
    initial=None,
) -> SearchResult:
    """Finite-difference gradient ascent over the hyperspherical angles.

    Each epoch estimates every angular partial derivative with a central
    difference of width ``fd_step`` (on a stratified row subsample when
    ``subsample < 1``), moves ``step_size`` radians along the normalized
    gradient and rescores on the full data. A move that does not beat the
    best state is undone and the step shrinks by ``step_decay``. The best
    state seen is returned; ``trace`` holds the best full-data score after
    each epoch.
    """
    cfg = cfg or AscentConfig()
    scorer = data if isinstance(data, RadialScorer) else RadialScorer.from_dataset(data, center)
    f0 = np.ones(scorer.dim) if initial is None else check_factors(initial, scorer.dim)
    if scorer.dim < 2:
        score = scorer(f0)
        return SearchResult(f0.copy(), score, [score], 1)
    start_evals = scorer.evaluations
    phi = _project(factors_to_angles(f0).angles)
    best_phi = phi
    best = scorer(angles_to_factors(phi))
    trace = [best]
    step = cfg.step_size
    h = cfg.fd_step
    rng = make_rng(cfg.seed)
    for _ in range(cfg.epochs):
        sub = scorer if cfg.subsample >= 1.0 else scorer.subsample(rng, cfg.subsample)
        grad = np.zeros(phi.size)
        for k in range(phi.size):
            up = phi.copy()
            up[k] += h
            down = phi.copy()
            down[k] -= h
            grad[k] = (sub(angles_to_factors(_project(up))) - sub(angles_to_factors(_project(down)))) / (2 * h)
        if sub is not scorer:
            scorer.evaluations += sub.evaluations
        norm = np.linalg.norm(grad)
        if norm == 0.0:
            trace.append(best)
            if cfg.subsample >= 1.0:
                break
            continue
        candidate = _project(phi + step * grad / norm)
        new = scorer(angles_to_factors(candidate))
        if new > best:
            best, best_phi, phi = new, candidate, candidate
        else:
            phi = best_phi
            step *= cfg.step_decay
        trace.append(best)
    # no accepted move: hand back the caller's vector untouched
    factors = angles_to_factors(best_phi) if best > trace[0] else f0.copy()
    return SearchResult(factors, best, trace, scorer.evaluations - start_evals)


def radial_deformation(
    data: Dataset | RadialScorer,
    center=None,
    greedy_cfg: GreedyConfig | None = None,
    ascent_cfg: AscentConfig | None = None,
    record_fpr: float = 0.002,
    max_seconds: float | None = None,
    initial=None,
) -> DeformResult:
    """Greedy passes followed by angular ascent from the greedy optimum.

    ``initial`` factors default to all ones. ``max_seconds`` is checked
    between stages; a stage that starts is finished.
    """
    greedy_cfg = greedy_cfg or GreedyConfig()
    ascent_cfg = ascent_cfg if ascent_cfg is not None else AscentConfig()
    scorer = data if isinstance(data, RadialScorer) else RadialScorer.from_dataset(data, center, greedy_cfg.score)
    t0 = time.perf_counter()
    stages = []
    f = np.ones(scorer.dim) if initial is None else check_factors(initial, scorer.dim).copy()
    stages.append(("start", 0.0, scorer(f), scorer.tpr(f, record_fpr)))
    greedy = SearchResult(f, stages[0][2], [stages[0][2]], 0)

    def out_of_time():
        return max_seconds is not None and time.perf_counter() - t0 >= max_seconds

    for p in range(greedy_cfg.passes):
        if out_of_time():
            break
        one = GreedyConfig(digits=greedy_cfg.digits, passes=1, score=greedy_cfg.score)
        res = greedy_factor_search(scorer, cfg=one, initial=greedy.factors)
        greedy = SearchResult(res.factors, res.score, greedy.trace + res.trace[1:],
                              greedy.evaluations + res.evaluations)
        stages.append((f"greedy_pass_{p + 1}", time.perf_counter() - t0, res.score,
                       scorer.tpr(res.factors, record_fpr)))
    factors, score = greedy.factors, greedy.score
    ascent = None
    if ascent_cfg.epochs > 0 and not out_of_time():
        ascent = angular_ascent(scorer, cfg=ascent_cfg, initial=greedy.factors)
        if ascent.score > score:
            factors, score = ascent.factors, ascent.score
        stages.append(("angular_ascent", time.perf_counter() - t0, score, scorer.tpr(factors, record_fpr)))
    return DeformResult(factors, score, greedy, ascent, stages)


def basin_hopping(
    data: Dataset | RadialScorer,
    center=None,
    cfg: BasinHopConfig | None = None,
    initial=None,
) -> HopResult:
    """Metropolis random walk on log-factors minimizing the fraud rank sum.

    Every iteration perturbs ``log f`` by ``perturbation_scale`` times a
    standard normal vector and accepts with probability
    ``min(1, exp(-delta / temperature))``, where ``delta`` is the rank-sum
    change divided by ``n_anomalies * n_normal`` (an AUROC-sized unit).
    Temperature 0 accepts only non-worsening moves. Traces hold the current
    rank sum, elapsed seconds and the TPR at ``record_fpr`` of the best state.
    """
    cfg = cfg or BasinHopConfig()
    scorer = data if isinstance(data, RadialScorer) else RadialScorer.from_dataset(data, center)
    rng = make_rng(cfg.seed)
    f = np.ones(scorer.dim) if initial is None else check_factors(initial, scorer.dim).copy()
    norm = scorer.n_pos * scorer.n_neg
    energy = scorer.rank_sum(f)
    best_f, best_e = f.copy(), energy
    best_tpr = scorer.tpr(best_f, cfg.record_fpr)
    out = HopResult(best_f, best_e)
    t0 = time.perf_counter()
    for _ in range(cfg.iterations):
        if cfg.max_seconds is not None and time.perf_counter() - t0 >= cfg.max_seconds:
            break
        step = rng.standard_normal(scorer.dim)
        trial = f * np.exp(cfg.perturbation_scale * step)
        trial = np.maximum(trial, FACTOR_FLOOR)
        e_new = scorer.rank_sum(trial)
        delta = (e_new - energy) / norm
        if delta <= 0:
            accept = True
        elif cfg.temperature > 0:
            accept = rng.random() < math.exp(-delta / cfg.temperature)
        else:
            accept = False
        if accept:
            f, energy = trial, e_new
            if energy < best_e:
                best_f, best_e = f.copy(), energy
                best_tpr = scorer.tpr(best_f, cfg.record_fpr)
        out.rank_sums.append(energy)
        out.wall_clock.append(time.perf_counter() - t0)
        out.tpr.append(best_tpr)
    out.factors, out.best_rank_sum = best_f, best_e
    return out

"""Centric autoencoder variants.

A centric autoencoder (cAE) scores a row by the radius of its reconstruction
from a center, here the mass center of the training set. The variants:

* cpAE: trained on the training set compressed toward the center by a
  scalar ``c`` in (0, 1); prediction runs on raw inputs.
* EIcAE: a trained model whose inputs are expanded by ``e`` before the
  forward pass; ``e`` is picked by a sweep, no retraining.
* DOcAE: a supervised radial deformation fitted on the model's output space.

Search over ``c`` is seeded random (log-uniform) or grid search. Ties in any
search go to the smallest parameter value.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import autoencoder as ae
from . import deform
from ._backend import kernels
from .geometry import Dataset, atomic_write_text, center_of_mass, check_factors, compress, make_rng

CAE_FORMAT_VERSION = 1


@dataclass
class CaeModel:
    net: ae.Network
    center: np.ndarray
    compression: float | None = None
    # 1.0 means inputs are fed unexpanded
    expansion: float = 1.0
    factors: np.ndarray | None = None
    test_auroc: float | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64)
        if self.center.shape != (self.net.spec.dim,):
            raise ValueError(f"center has shape {self.center.shape}, network expects ({self.net.spec.dim},)")
        if self.compression is not None and not 0.0 < self.compression < 1.0:
            raise ValueError(f"compression must lie in (0, 1), got {self.compression}")
        if not self.expansion >= 1.0:
            raise ValueError(f"expansion must be >= 1, got {self.expansion}")
        if self.factors is not None:
            self.factors = check_factors(self.factors, self.net.spec.dim)
            if self.expansion != 1.0:
                raise ValueError("a model carries either input expansion or output deformation, not both")

    @property
    def variant(self) -> str:
        base = "cpae" if self.compression is not None else "cae"
        if self.factors is not None:
            return "do" + base
        if self.expansion != 1.0:
            return "ei" + base
        return base

    def to_dict(self) -> dict:
        return {
            "format_version": CAE_FORMAT_VERSION,
            "kind": "cae_model",
            "variant": self.variant,
            "network": self.net.to_dict(),
            "center": self.center.tolist(),
            "compression": self.compression,
            "expansion": self.expansion,
            "factors": None if self.factors is None else self.factors.tolist(),
            "test_auroc": self.test_auroc,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CaeModel":
        if doc.get("format_version") != CAE_FORMAT_VERSION or doc.get("kind") != "cae_model":
            raise ValueError("not a cae_model document of a supported version")
        return cls(
            net=ae.Network.from_dict(doc["network"]),
            center=doc["center"],
            compression=doc["compression"],
            expansion=doc["expansion"],
            factors=doc["factors"],
            test_auroc=doc.get("test_auroc"),
            provenance=doc.get("provenance", {}),
        )

    def save(self, path) -> None:
        atomic_write_text(path, json.dumps(self.to_dict()) + "\n")

    @classmethod
    def load(cls, path) -> "CaeModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class SearchBudget:
    trials: int = 20
    c_range: tuple[float, float] = (0.01, 0.99)
    e_range: tuple[float, float] = (1.0, 20.0)
    seed: int = 0
    method: str = "random"

    def __post_init__(self):
        lo, hi = self.c_range
        if not 0.0 < lo <= hi < 1.0:
            raise ValueError(f"c_range must be a nonempty interval inside (0, 1), got {self.c_range}")
        elo, ehi = self.e_range
        if not 1.0 <= elo <= ehi:
            raise ValueError(f"e_range must be a nonempty interval inside [1, inf), got {self.e_range}")
        if self.method not in ("random", "grid"):
            raise ValueError(f"unknown search method {self.method!r}")

    def c_values(self) -> list[float]:
        lo, hi = np.log(self.c_range[0]), np.log(self.c_range[1])
        if self.method == "grid":
            vals = np.exp(np.linspace(lo, hi, self.trials)) if self.trials > 1 else np.exp([(lo + hi) / 2])
        else:
            vals = np.exp(make_rng(self.seed).uniform(lo, hi, self.trials))
        return [float(v) for v in vals]


def _input_features(data) -> np.ndarray:
    return data.features if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)


def classify(model: CaeModel, data) -> np.ndarray:
    """Anomaly scores: radius of the (optionally deformed) output from the center."""
    x = _input_features(data)
    if x.ndim != 2 or x.shape[1] != model.center.size:
        raise ValueError(f"data has shape {x.shape}, model expects {model.center.size} features")
    c = model.center
    if model.expansion != 1.0:
        x = c + model.expansion * (x - c)
    y = model.net.forward(x)
    d = y - c
    if model.factors is not None:
        d = d * model.factors
    return np.sqrt((d ** 2).sum(axis=1))


def model_auroc(model: CaeModel, data: Dataset) -> float:
    return float(kernels.auroc(classify(model, data), data.labels))


def _train(train: Dataset, test: Dataset, spec, cfg, center, compression, init_seed):
    spec = spec or ae.NetworkSpec.default(train.n_features)
    cfg = cfg or ae.TrainConfig()
    seed = cfg.seed if init_seed is None else init_seed
    net = ae.init_network(spec, seed)
    fit_on = train if compression is None else compress(train, center, compression)
    trace = ae.fit_with_tracking(net, fit_on, test, center, cfg)
    return trace, seed


def train_cae(
    train: Dataset,
    test: Dataset,
    spec: ae.NetworkSpec | None = None,
    cfg: ae.TrainConfig | None = None,
    *,
    center=None,
    init_seed: int | None = None,
) -> CaeModel:
    """Radial-loss training with test-AUROC checkpointing.

    ``center`` defaults to the training-set mass center. With zero epochs the
    returned model is the untrained network.
    """
    center = center_of_mass(train) if center is None else np.asarray(center, dtype=np.float64)
    t0 = time.perf_counter()
    trace, seed = _train(train, test, spec, cfg, center, None, init_seed)
    model = CaeModel(trace.best_net, center)
    model.test_auroc = trace.best_auroc if trace.best_epoch is not None else model_auroc(model, test)
    model.provenance = {
        "init_seed": seed,
        "train_config": _cfg_dict(cfg),
        "best_epoch": trace.best_epoch,
        "test_auroc_trace": trace.test_auroc,
        "train_loss_trace": trace.train_loss,
        "selection": "test-set AUROC checkpointing",
        "seconds": time.perf_counter() - t0,
    }
    return model


def train_cpae(
    train: Dataset,
    test: Dataset,
    spec: ae.NetworkSpec | None = None,
    cfg: ae.TrainConfig | None = None,
    budget: SearchBudget | None = None,
    *,
    c_values=None,
    center=None,
    init_seed: int | None = None,
) -> CaeModel:
    """Search the scalar compression factor; every trial is a full cAE training.

    Each trial trains on the compressed training set and tracks AUROC on the
    uncompressed test set. All trials share the initialization seed. Explicit
    ``c_values`` override the budget's sampler and must be scalars.
    """
    budget = budget or SearchBudget()
    if c_values is None:
        if budget.trials < 1:
            raise ValueError("search budget needs at least one trial")
        c_values = budget.c_values()
    values = []
    for c in c_values:
        if np.ndim(c) != 0:
            raise ValueError("compression factor must be a scalar; per-axis compression is not supported")
        values.append(float(c))
    if not values:
        raise ValueError("no compression values to try")
    center = center_of_mass(train) if center is None else np.asarray(center, dtype=np.float64)
    t0 = time.perf_counter()
    best = None
    trials = []
    for c in values:
        trace, seed = _train(train, test, spec, cfg, center, c, init_seed)
        score = trace.best_auroc
        if score is None:
            score = model_auroc(CaeModel(trace.best_net, center, c), test)
        trials.append({"c": c, "test_auroc": score, "best_epoch": trace.best_epoch})
        if best is None or score > best[0] or (score == best[0] and c < best[1]):
            best = (score, c, trace)
    score, c, trace = best
    model = CaeModel(trace.best_net, center, compression=c, test_auroc=score)
    model.provenance = {
        "init_seed": seed,
        "train_config": _cfg_dict(cfg),
        "search": {"method": budget.method, "seed": budget.seed, "trials": trials},
        "best_epoch": trace.best_epoch,
        "test_auroc_trace": trace.test_auroc,
        "selection": "test-set AUROC checkpointing and c search",
        "seconds": time.perf_counter() - t0,
    }
    return model


def eicae_sweep(
    model: CaeModel,
    data: Dataset,
    e_range: tuple[float, float] = (1.0, 20.0),
    trials: int = 50,
) -> CaeModel:
    """Pick the input expansion factor maximizing AUROC on ``data``.

    The geometric grid starts at exactly 1, the unexpanded model, so the
    result never scores below the base model on ``data``.
    """
    if model.factors is not None:
        raise ValueError("expansion sweep applies to models without output deformation")
    lo, hi = e_range
    if trials < 1 or not 1.0 <= lo <= hi:
        raise ValueError(f"invalid expansion sweep range {e_range} with {trials} trials")
    grid = np.geomspace(max(lo, 1.0), hi, trials) if trials > 1 else np.array([lo])
    grid = np.unique(np.concatenate([[1.0], grid]))
    best_e, best = 1.0, -np.inf
    sweep = []
    for e in grid:
        score = model_auroc(replace(model, expansion=float(e), provenance={}), data)
        sweep.append({"e": float(e), "auroc": score})
        if score > best:
            best_e, best = float(e), score
    out = replace(model, expansion=best_e, test_auroc=best)
    out.provenance = {**model.provenance, "expansion_sweep": sweep}
    return out


def docae(
    model: CaeModel,
    data: Dataset,
    greedy_cfg: deform.GreedyConfig | None = None,
    ascent_cfg: deform.AscentConfig | None = None,
) -> CaeModel:
    """Fit a supervised radial deformation on the model's output space.

    The optimizers start from identity factors and accept only improvements,
    so the returned model scores at least as well as ``model`` on ``data``.
    """
    if model.expansion != 1.0:
        raise ValueError("output deformation applies to models without input expansion")
    if not data.has_both_classes():
        raise ValueError("output deformation needs labeled data with both classes")
    outputs = model.net.forward(data.features)
    scorer = deform.RadialScorer(outputs, data.labels, model.center)
    res = deform.radial_deformation(scorer, greedy_cfg=greedy_cfg, ascent_cfg=ascent_cfg)
    out = replace(model, factors=res.factors, test_auroc=res.score)
    out.provenance = {
        **model.provenance,
        "output_deformation": {
            "base_auroc": res.stages[0][2],
            "stages": [list(s) for s in res.stages],
            "supervised": True,
        },
    }
    return out


def train_vanilla_ae(
    train: Dataset,
    test: Dataset,
    spec: ae.NetworkSpec | None = None,
    cfg: ae.TrainConfig | None = None,
) -> tuple[ae.Network, ae.TrainTrace]:
    """MSE-trained autoencoder scored by reconstruction error (baseline)."""
    cfg = replace(cfg or ae.TrainConfig(), loss="mse")
    spec = spec or ae.NetworkSpec.default(train.n_features)
    trace = ae.fit_with_tracking(ae.init_network(spec, cfg.seed), train, test, np.zeros(train.n_features), cfg)
    return trace.best_net, trace


def _cfg_dict(cfg) -> dict:
    return asdict(cfg or ae.TrainConfig())

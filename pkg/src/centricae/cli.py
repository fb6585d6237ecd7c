"""Command-line entry point: ``centricae <verb> [options]``.

Every verb reads an optional JSON config (``--config``), applies command-line
overrides, and writes artifacts into ``--out-dir``. Results are merged into
``<out-dir>/report.json``, one entry per method name; rerunning a verb
replaces its entries.

Seeds: the dataset generator uses the global seed as-is, so ``generate
--seed s`` writes the same data every other verb sees with ``--seed s``.
Every other random component gets ``component_seed(seed, name)``, derived
from ``SeedSequence([seed, crc32(name)])``; rerunning a single verb
therefore reproduces its numbers without rerunning the others.

Errors print one JSON object on stderr (``{"error": <category>, "message":
...}``) and exit nonzero: usage 2, data 3, io 4, config 5, internal 1.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import sys
import time
import zlib
from dataclasses import replace
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__, autoencoder as ae, cae, deform, geometry as geo, metrics
from ._backend import BACKEND

REPORT_SCHEMA_VERSION = 1
REPORT_FPRS = (0.002, 0.01)

EXIT_CODES = {"internal": 1, "usage": 2, "data": 3, "io": 4, "config": 5}

DEFAULT_CONFIG = {
    "seed": 0,
    "out_dir": "runs",
    "data": {
        "source": "generate",
        "n_points": 100_000,
        "anomaly_ratio": 0.01,
        "mean_step": geo.DEFAULT_MEAN_STEP,
        "path": "",
        "label_column": "label",
        "feature_columns": None,
        "standardize": False,
    },
    "split": {"train_fraction": 0.8},
    "baseline": {"subspaces": ["9:12"], "sweep_end": 12, "positivity": "7:12", "center": "auto"},
    "deform": {"digits": 3, "passes": 2, "epochs": 15, "step_size": 0.1, "fd_step": 0.05,
               "subsample": 1.0, "center": "auto"},
    "train": {"epochs": 200, "batch_size": 256, "learning_rate": 1e-3, "optimizer": "adam",
              "loss_k": 1.0, "layer_sizes": [], "hidden_activation": "leaky_relu",
              "output_activation": "identity", "use_bias": True, "vanilla": False},
    "cpae": {"trials": 20, "c_min": 0.01, "c_max": 0.99, "method": "random"},
    "eicae": {"model": None, "e_max": 20.0, "trials": 50},
    "docae": {"model": None},
    "compare": {"budget_seconds": 600.0, "perturbation_scale": 0.3, "temperature": 1e-3, "fpr": 0.002,
                "hop_iterations": None},
}


class CliError(Exception):
    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", f"{self.prog}: {message}")


def component_seed(seed: int, component: str) -> int:
    """Seed for one named component, derived from the global seed."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(component.encode())])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def load_schema(name: str) -> dict:
    text = resources.files("centricae").joinpath("schemas", name).read_text(encoding="utf-8")
    return json.loads(text)


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


# ---- config --------------------------------------------------------------

# (argparse dest, config section or None for top level, config key)
_OVERRIDES = [
    ("seed", None, "seed"),
    ("out_dir", None, "out_dir"),
    ("data", "data", "path"),
    ("n_points", "data", "n_points"),
    ("anomaly_ratio", "data", "anomaly_ratio"),
    ("mean_step", "data", "mean_step"),
    ("label_column", "data", "label_column"),
    ("standardize", "data", "standardize"),
    ("train_fraction", "split", "train_fraction"),
    ("subspaces", "baseline", "subspaces"),
    ("sweep_end", "baseline", "sweep_end"),
    ("positivity", "baseline", "positivity"),
    ("digits", "deform", "digits"),
    ("passes", "deform", "passes"),
    ("ascent_epochs", "deform", "epochs"),
    ("subsample", "deform", "subsample"),
    ("epochs", "train", "epochs"),
    ("batch_size", "train", "batch_size"),
    ("learning_rate", "train", "learning_rate"),
    ("optimizer", "train", "optimizer"),
    ("zero_bias", "train", "use_bias"),
    ("vanilla", "train", "vanilla"),
    ("trials", "cpae", "trials"),
    ("search", "cpae", "method"),
    ("e_trials", "eicae", "trials"),
    ("e_max", "eicae", "e_max"),
    ("budget_seconds", "compare", "budget_seconds"),
    ("hop_iterations", "compare", "hop_iterations"),
]


def build_config(args: argparse.Namespace) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                user = json.load(fh)
        except OSError as exc:
            raise CliError("io", f"cannot read config {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise CliError("config", f"config {args.config} is not valid JSON: {exc}") from None
        _validate_config(user)
        cfg = _merge(cfg, user)
    for dest, section, key in _OVERRIDES:
        val = getattr(args, dest, None)
        if val is None:
            continue
        if dest == "zero_bias":
            val = not val
        if dest == "data":
            cfg["data"]["source"] = "csv"
        target = cfg if section is None else cfg[section]
        target[key] = val
    if getattr(args, "features", None):
        cfg["data"]["feature_columns"] = [c.strip() for c in args.features.split(",") if c.strip()]
    if getattr(args, "model", None):
        cfg["eicae"]["model"] = cfg["docae"]["model"] = args.model
    _validate_config(cfg)
    if cfg["data"]["source"] == "csv" and not cfg["data"]["path"]:
        raise CliError("config", "data source 'csv' needs a path")
    return cfg


def _validate_config(doc) -> None:
    try:
        jsonschema.validate(doc, load_schema("config.schema.json"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise CliError("config", f"invalid config at {where}: {exc.message}") from None


# ---- data ----------------------------------------------------------------

def load_data(cfg: dict) -> geo.Dataset:
    d = cfg["data"]
    try:
        if d["source"] == "csv":
            return geo.load_csv(d["path"], d["label_column"], d["feature_columns"], d["standardize"])
        return geo.generate_artificial(d["n_points"], d["anomaly_ratio"], cfg["seed"], mean_step=d["mean_step"])
    except OSError as exc:
        raise CliError("io", f"cannot read data: {exc}") from None
    except ValueError as exc:
        raise CliError("data", str(exc)) from None


def split_data(cfg: dict, data: geo.Dataset) -> tuple[geo.Dataset, geo.Dataset]:
    spec = geo.SplitSpec(cfg["split"]["train_fraction"], component_seed(cfg["seed"], "split"))
    train, test = geo.split(data, spec)
    if not test.has_both_classes():
        raise CliError("data", "test split lacks one of the classes")
    return train, test


def _center(cfg: dict, section: str, data: geo.Dataset) -> np.ndarray:
    mode = cfg[section]["center"]
    if mode == "auto":
        # the generator's normal class is centered at the origin
        mode = "zero" if cfg["data"]["source"] == "generate" else "mass"
    return np.zeros(data.n_features) if mode == "zero" else geo.center_of_mass(data)


# ---- reports -------------------------------------------------------------

def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name)


class Run:
    """Collects method entries for one verb and merges them into the report."""

    def __init__(self, verb: str, cfg: dict):
        self.verb = verb
        self.cfg = cfg
        self.out = Path(cfg["out_dir"])
        self.entries: list[dict] = []

    def path(self, name: str) -> Path:
        return self.out / name

    def add(self, name: str, scores, labels, seconds: float, *, evaluated_on: str,
            artifacts: dict | None = None, flags=(), extra: dict | None = None, roc: bool = True) -> dict:
        curve = metrics.roc_curve(scores, labels)
        report = metrics.ScoreReport(
            method_name=name,
            auroc=metrics.auroc(scores, labels),
            tpr_at_fpr={f"{f:g}": metrics.tpr_at_fpr(curve, f) for f in REPORT_FPRS},
            wall_clock_seconds=seconds,
            extra=extra or {},
        )
        entry = report.to_dict()
        roc_path = None
        if roc:
            roc_path = f"roc_{_safe(name)}.csv"
            _io(curve.to_csv, self.path(roc_path))
        entry.update(command=self.verb, evaluated_on=evaluated_on, roc_csv=roc_path,
                     artifacts=dict(artifacts or {}), flags=list(flags))
        self.entries.append(entry)
        return entry

    def write(self) -> dict:
        report_path = self.path("report.json")
        doc = None
        if report_path.exists():
            try:
                doc = json.loads(report_path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise CliError("io", f"cannot read existing report {report_path}: {exc}") from None
            if doc.get("schema_version") != REPORT_SCHEMA_VERSION or doc.get("seed") != self.cfg["seed"]:
                # a report from another seed or format is replaced, not mixed
                doc = None
        if doc is None:
            doc = {"schema_version": REPORT_SCHEMA_VERSION, "created": _now(), "methods": []}
        names = {e["method_name"] for e in self.entries}
        doc["methods"] = [m for m in doc["methods"] if m["method_name"] not in names] + self.entries
        doc.update(tool_version=__version__, seed=self.cfg["seed"], updated=_now(),
                   backend=BACKEND, config=self.cfg)
        jsonschema.validate(doc, load_schema("run_report.schema.json"))
        _io(geo.atomic_write_text, report_path, json.dumps(doc, indent=2) + "\n")
        return doc


def _io(fn, *args):
    try:
        return fn(*args)
    except OSError as exc:
        raise CliError("io", str(exc)) from None


def _write_rows(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    _io(geo.atomic_write_text, path, buf.getvalue())


def _summary(doc: dict, names) -> str:
    lines = []
    for m in doc["methods"]:
        if m["method_name"] in names:
            tprs = "  ".join(f"TPR@{k}={100 * v:.2f}%" for k, v in m["tpr_at_fpr"].items())
            lines.append(f"{m['method_name']:<24} AUROC={100 * m['auroc']:.2f}%  {tprs}  "
                         f"({m['wall_clock_seconds']:.2f} s)")
    return "\n".join(lines)


# ---- model helpers -------------------------------------------------------

def _net_spec(cfg: dict, dim: int) -> ae.NetworkSpec:
    t = cfg["train"]
    sizes = tuple(t["layer_sizes"]) or ae.NetworkSpec.default(dim).layer_sizes
    if sizes[0] != dim or sizes[-1] != dim:
        raise CliError("config", f"layer_sizes {list(sizes)} do not match {dim} features")
    try:
        return ae.NetworkSpec(sizes, hidden_activation=t["hidden_activation"],
                              output_activation=t["output_activation"], use_bias=t["use_bias"])
    except ValueError as exc:
        raise CliError("config", str(exc)) from None


def _train_cfg(cfg: dict, component: str) -> ae.TrainConfig:
    t = cfg["train"]
    return ae.TrainConfig(epochs=t["epochs"], batch_size=t["batch_size"], learning_rate=t["learning_rate"],
                          optimizer=t["optimizer"], loss_k=t["loss_k"],
                          seed=component_seed(cfg["seed"], component))


def _train_base(cfg: dict, train, test) -> cae.CaeModel:
    return cae.train_cae(train, test, _net_spec(cfg, train.n_features), _train_cfg(cfg, "train-cae"),
                         init_seed=component_seed(cfg["seed"], "init"))


def _base_model(cfg: dict, key: str, train, test) -> tuple[cae.CaeModel, str]:
    path = cfg[key]["model"]
    if path:
        try:
            model = cae.CaeModel.load(path)
        except OSError as exc:
            raise CliError("io", f"cannot read model {path}: {exc}") from None
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise CliError("data", f"{path} is not a valid model file: {exc}") from None
        if model.center.size != test.n_features:
            raise CliError("data", f"model expects {model.center.size} features, data has {test.n_features}")
        return model, str(path)
    return _train_base(cfg, train, test), "trained"


# ---- verbs ---------------------------------------------------------------

def cmd_generate(args) -> int:
    try:
        data = geo.generate_artificial(args.n, args.ratio, args.seed, mean_step=args.mean_step)
    except ValueError as exc:
        raise CliError("data", str(exc)) from None
    _io(geo.save_csv, data, args.out)
    print(f"wrote {data.n_rows} rows ({data.n_anomalies} anomalies) to {args.out}")
    return 0


def cmd_baseline(cfg: dict) -> dict:
    data = load_data(cfg)
    run = Run("baseline", cfg)
    center = _center(cfg, "baseline", data)
    b = cfg["baseline"]
    try:
        subspaces = [("all", slice(0, data.n_features))]
        subspaces += [(s, geo.parse_feature_range(s, data.n_features)) for s in b["subspaces"]]
        if b["sweep_end"]:
            end = b["sweep_end"]
            geo.parse_feature_range(f"1:{end}", data.n_features)
            subspaces += [(f"{k}:{end}", slice(k - 1, end)) for k in range(1, end + 1)]
        pos = geo.parse_feature_range(b["positivity"], data.n_features) if b["positivity"] else None
    except ValueError as exc:
        raise CliError("config", str(exc)) from None
    done = set()
    for label, sl in subspaces:
        name = f"radial_{label}"
        if name in done:
            continue
        done.add(name)
        t0 = time.perf_counter()
        r = geo.radii(data.features[:, sl], center[sl])
        run.add(name, r, data.labels, time.perf_counter() - t0, evaluated_on="all",
                extra={"features": label, "center": center.tolist()})
    if pos is not None:
        t0 = time.perf_counter()
        s = geo.positivity_score(data, pos)
        run.add(f"positivity_{b['positivity']}", s, data.labels, time.perf_counter() - t0,
                evaluated_on="all", extra={"features": b["positivity"]})
    return run.write()


def _deform_configs(cfg: dict):
    d = cfg["deform"]
    greedy = deform.GreedyConfig(digits=d["digits"], passes=d["passes"])
    ascent = deform.AscentConfig(epochs=d["epochs"], step_size=d["step_size"], fd_step=d["fd_step"],
                                 subsample=d["subsample"], seed=component_seed(cfg["seed"], "ascent"))
    return greedy, ascent


def cmd_deform(cfg: dict) -> dict:
    data = load_data(cfg)
    if not data.has_both_classes():
        raise CliError("data", "radial deformation needs both classes")
    run = Run("deform", cfg)
    center = _center(cfg, "deform", data)
    greedy, ascent = _deform_configs(cfg)
    t0 = time.perf_counter()
    res = deform.radial_deformation(data, center, greedy, ascent)
    secs = time.perf_counter() - t0
    geo.save_factors(run.path("factors.json"), center, res.factors)
    _write_rows(run.path("deform_stages.csv"), ["stage", "wall_clock_s", "auroc", "tpr_at_0.002"], res.stages)
    _write_rows(run.path("greedy_trace.csv"), ["step", "auroc"], enumerate(res.greedy.trace))
    scores = geo.radii(geo.deform_array(data.features, center, res.factors), center)
    run.add("radial_deformation", scores, data.labels, secs, evaluated_on="all",
            artifacts={"factors": "factors.json", "stages": "deform_stages.csv", "greedy_trace": "greedy_trace.csv"},
            flags=["supervised"], extra={"stages": [list(s) for s in res.stages]})
    return run.write()


def _save_model(run: Run, model: cae.CaeModel, name: str) -> str:
    fname = f"model_{name}.json"
    _io(model.save, run.path(fname))
    return fname


_SELECTION_FLAGS = ["test-set checkpoint selection"]


def cmd_train_cae(cfg: dict) -> dict:
    data = load_data(cfg)
    train, test = split_data(cfg, data)
    run = Run("train-cae", cfg)
    if cfg["train"]["vanilla"]:
        t0 = time.perf_counter()
        net, trace = cae.train_vanilla_ae(train, test, _net_spec(cfg, data.n_features),
                                          replace(_train_cfg(cfg, "train-ae"), seed=component_seed(cfg["seed"], "init")))
        secs = time.perf_counter() - t0
        fname = "model_ae.json"
        _io(net.save, run.path(fname))
        run.add("ae", ae.reconstruction_error_scores(net, test), test.labels, secs, evaluated_on="test",
                artifacts={"model": fname}, flags=_SELECTION_FLAGS, extra={"best_epoch": trace.best_epoch})
    else:
        model = _train_base(cfg, train, test)
        fname = _save_model(run, model, "cae")
        run.add("cae", cae.classify(model, test), test.labels, model.provenance["seconds"], evaluated_on="test",
                artifacts={"model": fname}, flags=_SELECTION_FLAGS,
                extra={"best_epoch": model.provenance["best_epoch"]})
    return run.write()


def cmd_train_cpae(cfg: dict) -> dict:
    data = load_data(cfg)
    train, test = split_data(cfg, data)
    run = Run("train-cpae", cfg)
    p = cfg["cpae"]
    try:
        budget = cae.SearchBudget(trials=p["trials"], c_range=(p["c_min"], p["c_max"]), method=p["method"],
                                  seed=component_seed(cfg["seed"], "cpae-search"))
    except ValueError as exc:
        raise CliError("config", str(exc)) from None
    model = cae.train_cpae(train, test, _net_spec(cfg, data.n_features), _train_cfg(cfg, "train-cpae"), budget,
                           init_seed=component_seed(cfg["seed"], "init"))
    fname = _save_model(run, model, "cpae")
    trials = model.provenance["search"]["trials"]
    _write_rows(run.path("cpae_trials.csv"), ["c", "test_auroc", "best_epoch"],
                [(t["c"], t["test_auroc"], t["best_epoch"]) for t in trials])
    run.add("cpae", cae.classify(model, test), test.labels, model.provenance["seconds"], evaluated_on="test",
            artifacts={"model": fname, "trials": "cpae_trials.csv"},
            flags=_SELECTION_FLAGS + ["test-set c selection"],
            extra={"compression": model.compression, "best_epoch": model.provenance["best_epoch"]})
    return run.write()


def cmd_eicae(cfg: dict) -> dict:
    data = load_data(cfg)
    train, test = split_data(cfg, data)
    run = Run("eicae", cfg)
    base, source = _base_model(cfg, "eicae", train, test)
    if base.factors is not None:
        raise CliError("data", "input expansion needs a model without output deformation")
    t0 = time.perf_counter()
    model = cae.eicae_sweep(base, test, (1.0, cfg["eicae"]["e_max"]), cfg["eicae"]["trials"])
    secs = time.perf_counter() - t0
    name = "ei" + base.variant
    fname = _save_model(run, model, name)
    run.add(name, cae.classify(model, test), test.labels, secs, evaluated_on="test",
            artifacts={"model": fname}, flags=_SELECTION_FLAGS + ["test-set e selection"],
            extra={"expansion": model.expansion, "base_model": source, "base_auroc": cae.model_auroc(base, test)})
    return run.write()


def cmd_docae(cfg: dict) -> dict:
    data = load_data(cfg)
    train, test = split_data(cfg, data)
    run = Run("docae", cfg)
    base, source = _base_model(cfg, "docae", train, test)
    if base.expansion != 1.0 or base.factors is not None:
        raise CliError("data", "output deformation needs a plain cAE or cpAE model")
    greedy, ascent = _deform_configs(cfg)
    t0 = time.perf_counter()
    model = cae.docae(base, test, greedy, ascent)
    secs = time.perf_counter() - t0
    name = "do" + base.variant
    fname = _save_model(run, model, name)
    run.add(name, cae.classify(model, test), test.labels, secs, evaluated_on="test",
            artifacts={"model": fname}, flags=_SELECTION_FLAGS + ["supervised-hybrid"],
            extra={"base_model": source, "base_auroc": model.provenance["output_deformation"]["base_auroc"]})
    return run.write()


def compare_traces(data: geo.Dataset, center, greedy, ascent, hop: deform.BasinHopConfig, budget: float):
    """Run both optimizers under the same wall-clock budget.

    Radial deformation runs in rounds of greedy passes plus ascent, each
    round starting from the previous factors. The first round maximizes
    AUROC (the ``deform`` default); later rounds maximize TPR at
    ``hop.record_fpr`` directly and stop at the budget or when a round no
    longer improves. Basin-hopping minimizes the fraud rank sum for the whole
    budget. Returns ``(deform_factors, hop_result, deform_trace, hop_trace)``
    where each trace lists ``(iteration, seconds, best-so-far TPR)``.
    """
    if budget <= 0:
        return None, None, [], []
    fpr = hop.record_fpr
    tag = f"tpr@{fpr!r}"
    t0 = time.perf_counter()
    first = deform.radial_deformation(deform.RadialScorer.from_dataset(data, center), greedy_cfg=greedy,
                                      ascent_cfg=ascent, record_fpr=fpr, max_seconds=budget)
    scorer = deform.RadialScorer.from_dataset(data, center, tag)
    factors = first.factors
    best = scorer(factors)
    d_trace = [(0, time.perf_counter() - t0, best)]
    greedy = replace(greedy, score=tag)
    while time.perf_counter() - t0 < budget:
        left = budget - (time.perf_counter() - t0)
        res = deform.radial_deformation(scorer, greedy_cfg=greedy, ascent_cfg=ascent, record_fpr=fpr,
                                        max_seconds=left, initial=factors)
        improved = res.score > best
        if improved:
            factors, best = res.factors, res.score
        d_trace.append((len(d_trace), time.perf_counter() - t0, best))
        if not improved:
            break
    hres = deform.basin_hopping(deform.RadialScorer.from_dataset(data, center), cfg=replace(hop, max_seconds=budget))
    h_trace, best_h = [], -np.inf
    for i, (secs, tpr) in enumerate(zip(hres.wall_clock, hres.tpr)):
        best_h = max(best_h, tpr)
        h_trace.append((i, secs, best_h))
    return factors, hres, d_trace, h_trace


def cmd_compare(cfg: dict) -> dict:
    data = load_data(cfg)
    if not data.has_both_classes():
        raise CliError("data", "optimizer comparison needs both classes")
    run = Run("compare", cfg)
    c = cfg["compare"]
    center = _center(cfg, "deform", data)
    greedy, ascent = _deform_configs(cfg)
    # an iteration cap makes the comparison reproducible when the budget does not bind
    iterations = c["hop_iterations"] if c["hop_iterations"] is not None else sys.maxsize
    hop = deform.BasinHopConfig(iterations=iterations, perturbation_scale=c["perturbation_scale"],
                                temperature=c["temperature"], seed=component_seed(cfg["seed"], "basin-hopping"),
                                record_fpr=c["fpr"])
    factors, hres, d_trace, h_trace = compare_traces(data, center, greedy, ascent, hop, c["budget_seconds"])
    header = ["iteration", "wall_clock_s", f"best_tpr_at_{c['fpr']:g}"]
    _write_rows(run.path("trace_radial_deformation.csv"), header, d_trace)
    _write_rows(run.path("trace_basin_hopping.csv"), header, h_trace)
    if factors is None:
        doc = run.write()
        print("zero budget: empty traces written")
        return doc
    fpr_key = {"fpr": c["fpr"], "budget_seconds": c["budget_seconds"]}
    for name, factors, trace, secs in (
        ("compare_radial_deformation", factors, "trace_radial_deformation.csv", d_trace[-1][1]),
        ("compare_basin_hopping", hres.factors, "trace_basin_hopping.csv",
         h_trace[-1][1] if h_trace else 0.0),
    ):
        scores = geo.radii(geo.deform_array(data.features, center, factors), center)
        run.add(name, scores, data.labels, secs, evaluated_on="all", artifacts={"trace": trace},
                flags=["supervised"], extra={**fpr_key, "iterations": len(h_trace) if "basin" in name else len(d_trace)})
    return run.write()


def cmd_report(args) -> int:
    path = Path(args.out_dir or DEFAULT_CONFIG["out_dir"]) / "report.json"
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CliError("data", f"{path} is not valid JSON: {exc}") from None
    try:
        jsonschema.validate(doc, load_schema("run_report.schema.json"))
    except jsonschema.ValidationError as exc:
        raise CliError("data", f"{path} does not match the report schema: {exc.message}") from None
    if args.json:
        print(json.dumps(doc, indent=2))
        return 0
    print(f"report {path}  seed={doc['seed']}  version={doc['tool_version']}")
    fprs = sorted({k for m in doc["methods"] for k in m["tpr_at_fpr"]}, key=float)
    print(f"{'method':<28}{'on':<6}{'AUROC %':>9}" + "".join(f"{'TPR@' + k + ' %':>14}" for k in fprs)
          + f"{'seconds':>10}")
    for m in doc["methods"]:
        tpr = "".join(f"{100 * m['tpr_at_fpr'][k]:>14.2f}" if k in m["tpr_at_fpr"] else f"{'-':>14}"
                      for k in fprs)
        print(f"{m['method_name']:<28}{m.get('evaluated_on', ''):<6}{100 * m['auroc']:>9.2f}{tpr}"
              f"{m['wall_clock_seconds']:>10.2f}")
    return 0


_CONFIG_VERBS = {
    "baseline": cmd_baseline,
    "deform": cmd_deform,
    "train-cae": cmd_train_cae,
    "train-cpae": cmd_train_cpae,
    "eicae": cmd_eicae,
    "docae": cmd_docae,
    "compare": cmd_compare,
}


# ---- parser --------------------------------------------------------------

def _data_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("data")
    g.add_argument("--config", help="JSON config file; flags override its fields")
    g.add_argument("--seed", type=int)
    g.add_argument("--out-dir", dest="out_dir")
    g.add_argument("--data", help="CSV file to use instead of generated data")
    g.add_argument("--label-column", dest="label_column")
    g.add_argument("--features", help="comma-separated feature columns (CSV input)")
    g.add_argument("--standardize", action="store_true", default=None)
    g.add_argument("--n-points", dest="n_points", type=int)
    g.add_argument("--anomaly-ratio", dest="anomaly_ratio", type=float)
    g.add_argument("--mean-step", dest="mean_step", type=float)


def _split_options(p):
    p.add_argument("--train-fraction", dest="train_fraction", type=float)


def _deform_options(p):
    p.add_argument("--digits", type=int)
    p.add_argument("--passes", type=int)
    p.add_argument("--ascent-epochs", dest="ascent_epochs", type=int)
    p.add_argument("--subsample", type=float)


def _train_options(p):
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--optimizer", choices=ae.OPTIMIZERS)
    p.add_argument("--zero-bias", dest="zero_bias", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="centricae", description="Radial anomaly detection experiments.")
    parser.add_argument("--version", action="version", version=f"centricae {__version__} ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write the artificial dataset as CSV")
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--ratio", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mean-step", dest="mean_step", type=float, default=geo.DEFAULT_MEAN_STEP)
    p.add_argument("--out", required=True)

    p = sub.add_parser("baseline", help="radial and positivity baselines")
    _data_options(p)
    p.add_argument("--subspace", dest="subspaces", action="append", help="1-based range like 9:12; repeatable")
    p.add_argument("--sweep-end", dest="sweep_end", type=int)
    p.add_argument("--positivity")

    p = sub.add_parser("deform", help="greedy passes plus angular ascent")
    _data_options(p)
    _deform_options(p)

    p = sub.add_parser("train-cae", help="train a centric autoencoder")
    _data_options(p)
    _split_options(p)
    _train_options(p)
    p.add_argument("--vanilla", action="store_true", default=None, help="MSE autoencoder baseline instead")

    p = sub.add_parser("train-cpae", help="train with a searched compression factor")
    _data_options(p)
    _split_options(p)
    _train_options(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--search", choices=("random", "grid"))

    for verb, text in (("eicae", "sweep the input expansion factor"), ("docae", "fit an output deformation")):
        p = sub.add_parser(verb, help=text)
        _data_options(p)
        _split_options(p)
        _train_options(p)
        p.add_argument("--model", help="model JSON to start from; trains a cAE when omitted")
        if verb == "eicae":
            p.add_argument("--e-max", dest="e_max", type=float)
            p.add_argument("--e-trials", dest="e_trials", type=int)
        else:
            _deform_options(p)

    p = sub.add_parser("compare", help="radial deformation versus basin-hopping under one time budget")
    _data_options(p)
    _deform_options(p)
    p.add_argument("--budget-seconds", dest="budget_seconds", type=float)
    p.add_argument("--hop-iterations", dest="hop_iterations", type=int)

    p = sub.add_parser("report", help="print a report as percentages")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--json", action="store_true")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verb == "generate":
        return cmd_generate(args)
    if args.verb == "report":
        return cmd_report(args)
    cfg = build_config(args)
    doc = _CONFIG_VERBS[args.verb](cfg)
    names = {m["method_name"] for m in doc["methods"] if m["command"] == args.verb}
    text = _summary(doc, names)
    if text:
        print(text)
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except CliError as exc:
        err = {"error": exc.category, "message": str(exc)}
    except ValueError as exc:
        err = {"error": "data", "message": str(exc)}
    except OSError as exc:
        err = {"error": "io", "message": str(exc)}
    except Exception as exc:  # noqa: BLE001
        err = {"error": "internal", "message": f"{type(exc).__name__}: {exc}"}
    print(json.dumps(err), file=sys.stderr)
    return EXIT_CODES[err["error"]]


if __name__ == "__main__":
    sys.exit(main())

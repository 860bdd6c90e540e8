"""Experiment runner: config files, sweeps, evaluation and artifact files.

A config is a flat ``key = value`` text file. Solver keys may hold a list
(``alpha = [0.1, 1, 10]``) and the run covers the cross-product of all lists
in file order. ``features`` takes a list or an inclusive ``start:stop:step``
range. Lines starting with ``#`` are comments.
"""
from __future__ import annotations

import csv
import itertools
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .baselines import baseline_laplacian_score, baseline_variance_rank
from .data import DataError, load_labels, load_matrix, scale_features
from .graphs import build_feature_similarity, build_sample_graph
from .metrics import CLUSTERERS, MetricSummary, evaluate_subset
from .ranking import FeatureRanking
from .solver import SolverConfig, fit, rank_features
from .stats import wilcoxon_signed_rank


METHODS = ("splr", "variance", "laplacian_score")
SIGNIFICANCE = 0.05

# config key -> SolverConfig field
SOLVER_KEYS = {
    "alpha": "alpha", "lambda1": "lambda1", "lambda2": "lambda2",
    "lambda3": "lambda3", "gamma": "gamma", "mu": "mu", "eta0": "eta0",
    "subspace_dim": "K", "max_iter": "max_iter", "tol": "tol", "eps": "eps",
    "guard": "guard",
}
_INT_SOLVER_KEYS = {"subspace_dim", "max_iter"}
_PLAIN_KEYS = {
    "data", "labels", "format", "preprocess", "method", "clusterer",
    "restarts", "seed", "features", "workers", "debug", "track_weights",
}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


# ----------------------------------------------------------------------------
# config parsing

def parse_range(text: str) -> list[int]:
    """``"20:200:20"`` -> ``[20, 40, ..., 200]`` (stop is inclusive)."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(f"bad range {text!r}; expected start:stop[:step]")
    try:
        start, stop = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
    except ValueError:
        raise ConfigError(f"bad range {text!r}; expected integers") from None
    if step < 1 or stop < start:
        raise ConfigError(f"bad range {text!r}")
    return list(range(start, stop + 1, step))


def _scalar(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", "null", "auto"):
        return None
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "'\"":
        return text[1:-1]
    return text


def parse_value(text: str):
    """Parse one config value; ``[a, b]`` gives a list."""
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1].strip()
        return [_scalar(t) for t in inner.split(",")] if inner else []
    return _scalar(text)


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` pairs in file order. Repeated keys are an error."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if key == "features" and isinstance(value, str) and ":" in value and "[" not in value:
            out[key] = parse_range(value)
        else:
            out[key] = parse_value(value)
    return out


def _as_tuple(value) -> tuple:
    return tuple(value) if isinstance(value, list) else (value,)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs. ``sweep`` maps solver keys to value lists."""

    data: tuple = ()
    labels: tuple = ()
    format: str | None = None
    preprocess: bool = True
    method: str = "splr"
    clusterer: str = "kmeans"
    restarts: int = 20
    seed: int = 0
    features: tuple = tuple(range(20, 201, 20))
    workers: int = 1
    debug: bool = False
    track_weights: bool = False
    solver: SolverConfig = field(default_factory=SolverConfig)
    sweep: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.clusterer not in CLUSTERERS:
            raise ConfigError(f"unknown clusterer {self.clusterer!r}; choose from {', '.join(sorted(CLUSTERERS))}")
        if self.labels and len(self.data) != len(self.labels):
            raise ConfigError("data and labels need the same number of paths")
        if self.format not in (None, "csv", "tsv", "dense-text"):
            raise ConfigError(f"unknown format {self.format!r}")
        for name in ("preprocess", "debug", "track_weights"):
            if not isinstance(getattr(self, name), bool):
                raise ConfigError(f"{name} must be true or false")
        if not _is_int(self.restarts) or self.restarts < 1:
            raise ConfigError("restarts must be a positive integer")
        if not _is_int(self.workers) or self.workers < 1:
            raise ConfigError("workers must be a positive integer")
        if not _is_int(self.seed):
            raise ConfigError("seed must be an integer")
        if not self.features or not all(_is_int(N) and N >= 1 for N in self.features):
            raise ConfigError("features must be a non-empty list of positive integers")
        for key, values in self.sweep.items():
            if key not in SOLVER_KEYS:
                raise ConfigError(f"{key!r} cannot be swept")
            if not values:
                raise ConfigError(f"sweep list for {key!r} is empty")
        # a swept field's base value is its first sweep value (canonical form)
        if self.sweep:
            first = {SOLVER_KEYS[k]: v[0] for k, v in self.sweep.items()}
            try:
                object.__setattr__(self, "solver", self.solver.with_(**first))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"solver settings: {exc}") from None
            object.__setattr__(self, "sweep", {k: tuple(v) for k, v in self.sweep.items()})
        # every sweep point must be a valid solver config
        for point in self.points():
            self.solver_for(point)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        kw, base, sweep = {}, {}, {}
        for key, value in mapping.items():
            if key in SOLVER_KEYS:
                values = _as_tuple(value)
                if not values:
                    raise ConfigError(f"sweep list for {key!r} is empty")
                if key in _INT_SOLVER_KEYS and not all(v is None or _is_int(v) for v in values):
                    raise ConfigError(f"{key} must be an integer")
                if key == "guard" and not all(isinstance(v, bool) for v in values):
                    raise ConfigError("guard must be true or false")
                if len(values) == 1:
                    base[SOLVER_KEYS[key]] = values[0]
                else:
                    sweep[key] = values
            elif key in _PLAIN_KEYS:
                if key in ("data", "labels"):
                    kw[key] = tuple(str(v) for v in _as_tuple(value))
                elif key == "features":
                    kw[key] = _as_tuple(value)
                elif isinstance(value, list):
                    raise ConfigError(f"{key!r} takes a single value")
                else:
                    kw[key] = value
            else:
                raise ConfigError(f"unknown config key {key!r}")
        try:
            kw["solver"] = SolverConfig(**base)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"solver settings: {exc}") from None
        kw["sweep"] = sweep
        return cls(**kw)

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        return cls.from_mapping(parse_config_text(text))

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text())

    def to_text(self) -> str:
        """Config file text that parses back to this config."""
        lines = [
            f"data = {_fmt_list(self.data)}",
            f"labels = {_fmt_list(self.labels)}",
            f"format = {self.format or 'auto'}",
            f"preprocess = {str(self.preprocess).lower()}",
            f"method = {self.method}",
            f"clusterer = {self.clusterer}",
            f"restarts = {self.restarts}",
            f"seed = {self.seed}",
            f"features = {_fmt_list(self.features)}",
            f"workers = {self.workers}",
            f"debug = {str(self.debug).lower()}",
            f"track_weights = {str(self.track_weights).lower()}",
        ]
        for key, name in SOLVER_KEYS.items():
            if key in self.sweep:
                lines.append(f"{key} = {_fmt_list(self.sweep[key])}")
            else:
                value = getattr(self.solver, name)
                if isinstance(value, bool):
                    value = str(value).lower()
                lines.append(f"{key} = {'none' if value is None else _fmt(value)}")
        return "\n".join(lines) + "\n"

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)

    def points(self) -> list[dict]:
        """Sweep points in order; the last listed key varies fastest."""
        if self.method != "splr" or not self.sweep:
            return [{}]
        keys = list(self.sweep)
        return [dict(zip(keys, combo)) for combo in itertools.product(*self.sweep.values())]

    def solver_for(self, point: dict) -> SolverConfig:
        changes = {SOLVER_KEYS[k]: v for k, v in point.items()}
        try:
            return self.solver.with_(seed=self.seed, **changes)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"solver settings {point}: {exc}") from None


def _is_int(x) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def _fmt_list(values) -> str:
    return "[" + ", ".join(_fmt(v) for v in values) + "]"


# ----------------------------------------------------------------------------
# running

@dataclass
class RunRecord:
    """One (dataset, sweep point, N) evaluation."""

    dataset: str
    point: int
    params: dict
    method: str
    N: int
    ranking: FeatureRanking
    summary: MetricSummary
    fit_seconds: float = 0.0
    obj_history: list = field(default_factory=list)
    eta_history: list = field(default_factory=list)
    v_history: list | None = None
    iterations: int | None = None
    converged: bool | None = None


@dataclass
class Dataset:
    name: str
    X: np.ndarray
    y: np.ndarray


def load_dataset(data_path, label_path, *, preprocess: bool = True, format=None) -> Dataset:
    """Read and pair a matrix with its labels; min-max scale when asked."""
    X = load_matrix(data_path, format=format)
    y = load_labels(label_path)
    try:
        y.check_pairs_with(X)
    except DataError as exc:
        raise ConfigError(f"{data_path} / {label_path}: {exc}") from None
    if preprocess:
        X = scale_features(X)
    return Dataset(str(data_path), np.array(X.values), np.asarray(y.labels, dtype=int))


def rank_with(X: np.ndarray, method: str, solver: SolverConfig, track_weights: bool = False):
    """Rank features of ``X``; returns ``(ranking, state or None)``."""
    if method == "variance":
        return baseline_variance_rank(X), None
    if method == "laplacian_score":
        return baseline_laplacian_score(X), None
    if np.any(X < 0):
        raise ConfigError("splr needs nonnegative data; enable preprocess")
    state = fit(X, solver, track_weights=track_weights)
    return rank_features(state), state


def _run_point(task):
    ds, index, point, cfg = task
    start = time.perf_counter()
    ranking, state = rank_with(ds.X, cfg.method, cfg.solver_for(point), cfg.track_weights)
    fit_seconds = time.perf_counter() - start
    records = []
    for N in cfg.features:
        summary = evaluate_subset(ds.X, ranking.top(N), ds.y, cfg.clusterer, cfg.restarts, cfg.seed)
        rec = RunRecord(ds.name, index, dict(point), cfg.method, int(N), ranking, summary, fit_seconds)
        if state is not None:
            rec.obj_history = state.obj_history
            rec.eta_history = state.eta_history
            rec.v_history = state.v_history
            rec.iterations = state.iter
            rec.converged = state.converged
        records.append(rec)
    return records


def run_experiment(cfg: ExperimentConfig, datasets: list[Dataset] | None = None) -> list[RunRecord]:
    """Evaluate every (dataset, sweep point, N) combination.

    Records come back in dataset, sweep-point, N order whatever the worker
    count. ``datasets`` overrides the paths in ``cfg``.
    """
    if datasets is None:
        if not cfg.data:
            raise ConfigError("no data given")
        if not cfg.labels:
            raise ConfigError("evaluation needs labels")
        datasets = [load_dataset(d, l, preprocess=cfg.preprocess, format=cfg.format)
                    for d, l in zip(cfg.data, cfg.labels)]
    for ds in datasets:
        d = ds.X.shape[1]
        if max(cfg.features) > d:
            raise ConfigError(f"{ds.name}: feature count {max(cfg.features)} exceeds d={d}")
        if ds.y.size != ds.X.shape[0]:
            raise ConfigError(f"{ds.name}: labels do not match the sample count")
        if cfg.method == "splr":
            for point in cfg.points():
                try:
                    cfg.solver_for(point).subspace_dim(d)
                except ValueError as exc:
                    raise ConfigError(f"{ds.name}: {exc}") from None

    tasks = [(ds, i, p, cfg) for ds in datasets for i, p in enumerate(cfg.points())]
    if cfg.workers == 1 or len(tasks) == 1:
        chunks = [_run_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(tasks))) as pool:
            chunks = list(pool.map(_run_point, tasks))
    return [rec for chunk in chunks for rec in chunk]


def best_record(records, metric: str = "acc", dataset: str | None = None) -> RunRecord:
    """Record with the highest mean ``metric``; the earliest one wins ties."""
    pool = [r for r in records if dataset is None or r.dataset == dataset]
    if not pool:
        raise ValueError("no records to choose from")
    means = [getattr(r.summary, f"{metric}_mean") for r in pool]
    return pool[int(np.argmax(means))]


def fixed_records(records, dataset: str | None = None) -> list[RunRecord]:
    """Records of the first sweep point (no selection on labels)."""
    return [r for r in records if r.point == 0 and (dataset is None or r.dataset == dataset)]


def _datasets(records) -> list[str]:
    return list(dict.fromkeys(r.dataset for r in records))


# ----------------------------------------------------------------------------
# comparison

@dataclass(frozen=True)
class Comparison:
    metric: str
    alternative: str
    n_pairs: int
    p: float
    h: int

    def to_dict(self) -> dict:
        return {"metric": self.metric, "alternative": self.alternative,
                "n_pairs": self.n_pairs, "p": self.p, "h": self.h}


def compare_methods(records_a, records_b, metric: str = "acc",
                    alternative: str = "greater", method: str = "auto") -> Comparison:
    """Wilcoxon signed-rank test on paired per-restart values.

    Accepts RunRecords or MetricSummaries; pair ``k`` of each list must hold
    the same number of restarts. ``h = 1`` rejects the null at the 0.05 level.
    """
    if metric not in ("acc", "nmi"):
        raise ValueError("metric must be 'acc' or 'nmi'")
    if len(records_a) != len(records_b):
        raise ValueError("unpaired lengths: record lists differ in size")
    a, b = [], []
    for ra, rb in zip(records_a, records_b):
        va = getattr(getattr(ra, "summary", ra), f"{metric}_values")
        vb = getattr(getattr(rb, "summary", rb), f"{metric}_values")
        if len(va) != len(vb):
            raise ValueError("unpaired lengths: restart counts differ")
        a.extend(va)
        b.extend(vb)
    p = wilcoxon_signed_rank(a, b, alternative, method=method)
    return Comparison(metric, alternative, len(a), p, int(p < SIGNIFICANCE))


# ----------------------------------------------------------------------------
# artifact files

def _tag(records, rec) -> str:
    idx = _datasets(records).index(rec.dataset)
    return f"d{idx}-{Path(rec.dataset).stem}_p{rec.point}"


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _param_text(params: dict) -> str:
    return " ".join(f"{k}={_fmt(v)}" for k, v in params.items()) or "-"


def write_ranking(path, ranking: FeatureRanking) -> None:
    _write_csv(Path(path), ["feature", "score"],
               ((int(j), repr(float(ranking.scores[j]))) for j in ranking.order))


def load_ranking(path, descending: bool = True) -> FeatureRanking:
    """Inverse of :func:`write_ranking`; row order is the rank order."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["feature", "score"]:
        raise DataError(f"{path}: not a ranking file")
    order = np.array([int(r[0]) for r in rows[1:]], dtype=int)
    scores = np.empty(order.size)
    scores[order] = [float(r[1]) for r in rows[1:]]
    return FeatureRanking(order, scores, descending)


def write_convergence(path, obj_history, eta_history) -> None:
    _write_csv(Path(path), ["iteration", "objective", "eta"],
               ((t + 1, repr(float(o)), repr(float(e)))
                for t, (o, e) in enumerate(zip(obj_history, eta_history))))


def load_convergence(path):
    """``(iterations, objectives, etas)`` arrays."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0].astype(int), data[:, 1], data[:, 2]


def _record_dict(records, rec) -> dict:
    return {
        "dataset": rec.dataset, "point": rec.point, "method": rec.method,
        "params": rec.params, "N": rec.N, "iterations": rec.iterations,
        "converged": rec.converged, "ranking_file": f"ranking_{_tag(records, rec)}.csv",
        "descending": rec.ranking.descending, "summary": rec.summary.to_dict(),
    }


def load_metrics(path) -> dict:
    """Read ``metrics.json``; summaries come back as MetricSummary objects."""
    try:
        doc = json.loads(Path(path).read_text())
        for rec in doc["records"]:
            rec["summary"] = MetricSummary.from_dict(rec["summary"])
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"{path}: not a metrics file ({exc})") from None
    return doc


def records_from_metrics(doc: dict, base_dir) -> list[RunRecord]:
    """Rebuild RunRecords from a loaded metrics document and its rankings."""
    out = []
    for rec in doc["records"]:
        ranking = load_ranking(Path(base_dir) / rec["ranking_file"], rec["descending"])
        out.append(RunRecord(rec["dataset"], rec["point"], rec["params"], rec["method"],
                             rec["N"], ranking, rec["summary"],
                             iterations=rec["iterations"], converged=rec["converged"]))
    return out


def summary_table(records) -> str:
    """Human table in percent, ``mean±std`` to two decimals."""
    lines = ["dataset  point  params  N  ACC(%)  NMI(%)"]
    for r in records:
        lines.append(f"{Path(r.dataset).stem}  p{r.point}  {_param_text(r.params)}  "
                     f"{r.N}  {r.summary.table_row()}")
    for ds in _datasets(records):
        name = Path(ds).stem
        lines.append("")
        lines.append(f"[{name}] best over grid (selected with labels)")
        for metric in ("acc", "nmi"):
            r = best_record(records, metric, ds)
            lines.append(f"  {metric.upper()}: p{r.point} {_param_text(r.params)} N={r.N}  "
                         f"{r.summary.table_row()}")
        lines.append(f"[{name}] fixed parameters (first sweep point)")
        for r in fixed_records(records, ds):
            lines.append(f"  N={r.N}  {r.summary.table_row()}")
    return "\n".join(lines) + "\n"


def emit_outputs(records, out_dir, *, config: ExperimentConfig | None = None,
                 datasets: list[Dataset] | None = None) -> list[Path]:
    """Write ranking, convergence, metrics, summary and timing files.

    Everything except ``timing.json`` is a pure function of the records, so
    repeated runs give byte-identical files. With ``config.debug`` the
    feature similarity S, sample graph Z and Laplacian L of each dataset are
    dumped; with ``config.track_weights`` the per-iteration v as well.
    """
    if not records:
        raise ValueError("no records to write")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    seen = set()
    for rec in records:
        tag = _tag(records, rec)
        if tag in seen:
            continue
        seen.add(tag)
        path = out / f"ranking_{tag}.csv"
        write_ranking(path, rec.ranking)
        written.append(path)
        if rec.obj_history:
            path = out / f"convergence_{tag}.csv"
            write_convergence(path, rec.obj_history, rec.eta_history)
            written.append(path)
        if rec.v_history:
            path = out / f"weights_{tag}.csv"
            n = len(rec.v_history[0])
            _write_csv(path, ["iteration"] + [f"v{i}" for i in range(n)],
                       ([t + 1] + [repr(float(x)) for x in v] for t, v in enumerate(rec.v_history)))
            written.append(path)

    doc = {
        "records": [_record_dict(records, r) for r in records],
        "best": [
            {"dataset": ds, "metric": m, "record": records.index(best_record(records, m, ds))}
            for ds in _datasets(records) for m in ("acc", "nmi")
        ],
        "fixed": [records.index(r) for r in fixed_records(records)],
    }
    path = out / "metrics.json"
    path.write_text(json.dumps(doc, indent=1) + "\n")
    written.append(path)

    path = out / "summary.txt"
    path.write_text(summary_table(records))
    written.append(path)

    timing = {_tag(records, r): r.fit_seconds for r in records}
    path = out / "timing.json"
    path.write_text(json.dumps(timing, indent=1) + "\n")
    written.append(path)

    if config is not None:
        path = out / "resolved_config.txt"
        path.write_text(config.to_text())
        written.append(path)
        if config.debug and datasets:
            for idx, ds in enumerate(datasets):
                graph = build_sample_graph(ds.X)
                stem = f"d{idx}-{Path(ds.name).stem}"
                for name, mat in (("S", build_feature_similarity(ds.X)),
                                  ("Z", graph.Z), ("L", graph.L)):
                    path = out / f"debug_{stem}_{name}.csv"
                    np.savetxt(path, mat, delimiter=",", fmt="%.17g")
                    written.append(path)
    return written

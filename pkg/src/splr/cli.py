"""``splr`` command line: fit, rank, eval, sweep, compare.

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

import numpy as np

from . import harness
from .data import DataError, load_matrix, scale_features
from .graphs import build_feature_similarity, build_sample_graph
from .harness import ConfigError, ExperimentConfig
from .metrics import evaluate_subset

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2

# flag -> config key; values given as "a,b,c" become sweep lists
_SOLVER_FLAGS = {
    "alpha": "alpha", "lambda1": "lambda1", "lambda2": "lambda2",
    "lambda3": "lambda3", "gamma": "gamma", "mu": "mu", "eta0": "eta0",
    "subspace_dim": "subspace_dim", "max_iter": "max_iter", "tol": "tol",
}
_PLAIN_FLAGS = ("format", "method", "clusterer", "restarts", "seed", "workers")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common(p: argparse.ArgumentParser, *, labels: bool = True) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--data", nargs="+", help="data matrix path(s): csv, tsv or whitespace text")
    if labels:
        p.add_argument("--labels", nargs="+", help="label file path(s), one label per line")
    p.add_argument("--format", choices=["csv", "tsv", "dense-text"], help="data format (default: by extension)")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-preprocess", action="store_true", help="skip min-max scaling")
    p.add_argument("--subspace-dim", help="subspace dimension K (default 200, capped at d)")
    p.add_argument("--gamma", help="pace regularizer gamma (default 2)")
    p.add_argument("--mu", help="pace growth factor (default 1.05)")
    p.add_argument("--eta0", help="initial pace (default: from initial losses)")
    p.add_argument("--alpha", help="row-sparsity weight (default 1)")
    p.add_argument("--lambda1", help="redundancy weight (default 1)")
    p.add_argument("--lambda2", help="manifold weight (default 1)")
    p.add_argument("--lambda3", help="orthogonality weight (default 1)")
    p.add_argument("--max-iter", help="iteration cap (default 1500)")
    p.add_argument("--tol", help="relative objective tolerance (default 1e-6)")
    p.add_argument("--no-guard", action="store_true",
                   help="plain multiplicative W step without the descent check")
    p.add_argument("--debug", action="store_true", help="dump S, Z and L as CSV")
    p.add_argument("--track-weights", action="store_true", help="write per-iteration sample weights")


def _eval_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--clusterer", choices=["kmeans", "pam"], help="default kmeans")
    p.add_argument("--restarts", type=int, help="clustering restarts (default 20)")
    p.add_argument("--features", help="N list, 'a:b:step' or 'a,b,c' (default 20:200:20)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="splr", description="Unsupervised feature selection and clustering evaluation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit the subspace model and write W, H, ranking and convergence")
    _common(p, labels=False)

    p = sub.add_parser("rank", help="rank features with any method")
    _common(p, labels=False)
    p.add_argument("--method", choices=list(harness.METHODS), help="default splr")

    p = sub.add_parser("eval", help="rank (or load a ranking) and evaluate top-N subsets")
    _common(p)
    _eval_flags(p)
    p.add_argument("--method", choices=list(harness.METHODS), help="default splr")
    p.add_argument("--ranking", help="evaluate this ranking CSV instead of ranking")

    p = sub.add_parser("sweep", help="run the parameter grid and report best and fixed results")
    _common(p)
    _eval_flags(p)
    p.add_argument("--method", choices=list(harness.METHODS), help="default splr")
    p.add_argument("--workers", type=int, help="parallel sweep points (default 1)")

    p = sub.add_parser("compare", help="Wilcoxon signed-rank test between two sweep outputs")
    p.add_argument("a", help="output directory of method A")
    p.add_argument("b", help="output directory of method B")
    p.add_argument("--metric", choices=["acc", "nmi"], default="acc")
    p.add_argument("--alternative", choices=["greater", "less"], default="greater")
    p.add_argument("--select", choices=["best", "fixed"], default="best",
                   help="record per dataset: best over grid, or the first sweep point at --N")
    p.add_argument("--N", type=int, help="feature count for --select fixed")
    p.add_argument("--test", choices=["auto", "exact", "normal"], default="auto",
                   help="p-value computation (auto: exact up to 12 pairs)")
    p.add_argument("--out", help="also write comparison.json here")
    return parser


def _flag_value(text: str):
    return harness.parse_value(f"[{text}]" if "," in text else text)


def config_from_args(args) -> ExperimentConfig:
    """Config file values overridden by any flags given."""
    mapping = harness.parse_config_text(Path(args.config).read_text()) if args.config else {}
    if args.data:
        mapping["data"] = list(args.data)
    if getattr(args, "labels", None):
        mapping["labels"] = list(args.labels)
    for flag in _PLAIN_FLAGS:
        value = getattr(args, flag, None)
        if value is not None:
            mapping[flag] = value
    for flag, key in _SOLVER_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            mapping[key] = _flag_value(value)
    features = getattr(args, "features", None)
    if features is not None:
        mapping["features"] = harness.parse_range(features) if ":" in features else _flag_value(features)
    if args.no_preprocess:
        mapping["preprocess"] = False
    if args.no_guard:
        mapping["guard"] = False
    if args.debug:
        mapping["debug"] = True
    if args.track_weights:
        mapping["track_weights"] = True
    return ExperimentConfig.from_mapping(mapping)


def _single_dataset(cfg: ExperimentConfig, need_labels: bool):
    if len(cfg.data) != 1:
        raise ConfigError("this command takes exactly one --data path")
    if cfg.sweep:
        raise ConfigError(f"sweep lists given for {', '.join(cfg.sweep)}; use 'splr sweep'")
    if need_labels and not cfg.labels:
        raise ConfigError("--labels is required")
    if cfg.labels:
        return harness.load_dataset(cfg.data[0], cfg.labels[0], preprocess=cfg.preprocess, format=cfg.format)
    X = load_matrix(cfg.data[0], format=cfg.format)
    if cfg.preprocess:
        X = scale_features(X)
    return harness.Dataset(cfg.data[0], np.array(X.values), np.zeros(0, dtype=int))


def _save_matrix(path: Path, M) -> None:
    np.savetxt(path, M, delimiter=",", fmt="%.17g")


def _write_fit_outputs(out: Path, cfg, ds, ranking, state) -> None:
    out.mkdir(parents=True, exist_ok=True)
    harness.write_ranking(out / "ranking.csv", ranking)
    (out / "resolved_config.txt").write_text(cfg.to_text())
    if cfg.debug:
        graph = build_sample_graph(ds.X)
        _save_matrix(out / "debug_S.csv", build_feature_similarity(ds.X))
        _save_matrix(out / "debug_Z.csv", graph.Z)
        _save_matrix(out / "debug_L.csv", graph.L)
    if state is None:
        return
    harness.write_convergence(out / "convergence.csv", state.obj_history, state.eta_history)
    _save_matrix(out / "W.csv", state.W)
    _save_matrix(out / "H.csv", state.H)
    _save_matrix(out / "v.csv", state.v)
    if state.v_history:
        _save_matrix(out / "weights.csv", np.asarray(state.v_history))


def _cmd_rank(args, method=None) -> int:
    cfg = config_from_args(args)
    if method is not None and cfg.method != method:
        raise ConfigError(f"'fit' runs method {method}; use 'rank' for {cfg.method}")
    ds = _single_dataset(cfg, need_labels=False)
    if cfg.method == "splr":
        cfg.solver_for({}).subspace_dim(ds.X.shape[1])
    ranking, state = harness.rank_with(ds.X, cfg.method, cfg.solver_for({}), cfg.track_weights)
    _write_fit_outputs(Path(args.out), cfg, ds, ranking, state)
    if state is not None:
        print(f"{state.iter} iterations, converged={state.converged}, objective={state.obj_history[-1]:.6g}")
    print(f"wrote {args.out}")
    return EXIT_OK


def _copy_config(args) -> None:
    if args.config:
        shutil.copyfile(args.config, Path(args.out) / "config.txt")


def _cmd_eval(args) -> int:
    cfg = config_from_args(args)
    ds = _single_dataset(cfg, need_labels=True)
    if not args.ranking:
        records = harness.run_experiment(cfg, [ds])
    else:
        ranking = harness.load_ranking(args.ranking)
        if ranking.order.size != ds.X.shape[1]:
            raise ConfigError("ranking length does not match the feature count")
        if max(cfg.features) > ds.X.shape[1]:
            raise ConfigError(f"feature count {max(cfg.features)} exceeds d={ds.X.shape[1]}")
        records = [
            harness.RunRecord(ds.name, 0, {}, "file", int(N), ranking,
                              evaluate_subset(ds.X, ranking.top(N), ds.y, cfg.clusterer,
                                              cfg.restarts, cfg.seed))
            for N in cfg.features
        ]
    harness.emit_outputs(records, args.out, config=cfg, datasets=[ds])
    _copy_config(args)
    print(harness.summary_table(records), end="")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = config_from_args(args)
    datasets = [harness.load_dataset(d, l, preprocess=cfg.preprocess, format=cfg.format)
                for d, l in zip(cfg.data, cfg.labels)] if cfg.labels else None
    records = harness.run_experiment(cfg, datasets)
    harness.emit_outputs(records, args.out, config=cfg, datasets=datasets)
    _copy_config(args)
    print(harness.summary_table(records), end="")
    return EXIT_OK


def _select(doc, records, dataset, how, metric, N):
    if how == "best":
        idx = next(b["record"] for b in doc["best"] if b["dataset"] == dataset and b["metric"] == metric)
        return records[idx]
    pool = [r for r in harness.fixed_records(records, dataset) if N is None or r.N == N]
    if len(pool) != 1:
        raise ConfigError(f"{dataset}: --select fixed needs --N matching one record")
    return pool[0]


def _cmd_compare(args) -> int:
    sides = []
    for base in (args.a, args.b):
        doc = harness.load_metrics(Path(base) / "metrics.json")
        sides.append((doc, harness.records_from_metrics(doc, base)))
    (doc_a, rec_a), (doc_b, rec_b) = sides
    names_a = list(dict.fromkeys(r.dataset for r in rec_a))
    names_b = list(dict.fromkeys(r.dataset for r in rec_b))
    if names_a != names_b:
        raise ConfigError("the two outputs cover different datasets")
    rows = []
    for name in names_a:
        ra = _select(doc_a, rec_a, name, args.select, args.metric, args.N)
        rb = _select(doc_b, rec_b, name, args.select, args.metric, args.N)
        try:
            cmp = harness.compare_methods([ra], [rb], args.metric, args.alternative, args.test)
        except ValueError as exc:
            raise ConfigError(f"{name}: {exc}") from None
        rows.append({"dataset": name, "N_a": ra.N, "N_b": rb.N, **cmp.to_dict()})
        print(f"{Path(name).stem}: p={cmp.p:.4g} h={cmp.h}")
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "comparison.json").write_text(json.dumps(rows, indent=1) + "\n")
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "fit":
            return _cmd_rank(args, method="splr")
        if args.command == "rank":
            return _cmd_rank(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_compare(args)
    except ConfigError as exc:
        print(f"splr: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, DataError) as exc:
        print(f"splr: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"splr: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

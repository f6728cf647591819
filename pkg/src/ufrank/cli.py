"""Command-line entry point.

Commands: rank, eval, curve, compare, synth, ari-check. Every artifact is
JSON (with CSV mirrors where a table shape is natural) and embeds the
resolved configuration that produced it, minus execution-only knobs
(worker count, output directory), so a report can be reproduced from its
own config block and re-running with a different --workers value yields
byte-identical files.

Options resolve as: explicit flags, then values from a --config JSON file,
then built-in defaults.

Exit codes: 0 success, 1 usage error, 2 data error, 3 computation error.
Errors print a one-line JSON record to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .data import ComputationError, Dataset, IngestionError, load_csv
from .evaluate import (FoldPlan, clustering_hypothesis_ari, compare_methods,
                       comparison_to_csv, curve_points_csv, cv_mse,
                       error_curve, report_json)
from .rankers import METHODS, make_ranker
from .scores import ranking_rows, ranking_to_csv
from .synth import SynthSpec, write_planted


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract says 1
        raise UsageError(message)


def _nonneg(value: str) -> int:
    n = int(value)
    if n < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return n


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def _add_data_flags(p: _Parser) -> None:
    p.add_argument("--data", required=True, help="input CSV (header row)")
    p.add_argument("--target-column", default=None,
                   help="column to hold out as the target")


def _add_method_flags(p: _Parser) -> None:
    p.add_argument("--method", choices=METHODS, default="genie3")
    p.add_argument("--trees", type=_positive, default=100,
                   help="ensemble size (tree methods)")
    p.add_argument("--ensemble", choices=["bagging", "rf", "et"], default="et")
    p.add_argument("--subset-rule", choices=["log2", "sqrt", "all"],
                   default="log2", help="per-node attribute sample size")
    p.add_argument("--neighbors", type=_positive, default=None,
                   help="urelief neighborhood size (default min(30, m-1))")
    p.add_argument("--iterations", type=_positive, default=None,
                   help="urelief iteration count (default m)")


def _add_common_flags(p: _Parser) -> None:
    p.add_argument("--seed", type=_nonneg, default=0)
    p.add_argument("--workers", type=_positive,
                   default=max(1, os.cpu_count() or 1))
    p.add_argument("--out", default=None, help="directory for artifact files")
    p.add_argument("--config", default=None,
                   help="JSON file of flag defaults (explicit flags win)")


def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    parser = _Parser(prog="ufrank",
                     description="Unsupervised feature ranking and evaluation")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)
    commands: dict[str, _Parser] = {}

    p = commands["rank"] = sub.add_parser(
        "rank", help="rank the attributes of a dataset")
    _add_data_flags(p)
    _add_method_flags(p)
    _add_common_flags(p)

    p = commands["eval"] = sub.add_parser(
        "eval", help="cross-validated 1NN MSE at a fixed k")
    _add_data_flags(p)
    _add_method_flags(p)
    p.add_argument("--folds", type=_positive, default=10)
    p.add_argument("--top-k", type=_positive, default=16)
    _add_common_flags(p)

    p = commands["curve"] = sub.add_parser(
        "curve", help="error curve over the geometric k grid")
    _add_data_flags(p)
    _add_method_flags(p)
    p.add_argument("--folds", type=_positive, default=10)
    _add_common_flags(p)

    p = commands["compare"] = sub.add_parser(
        "compare", help="rank-based comparison of eval artifacts")
    p.add_argument("inputs", nargs="+", help="eval JSON artifacts")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None,
                   help="JSON file of flag defaults (explicit flags win)")

    p = commands["synth"] = sub.add_parser(
        "synth", help="generate a planted-feature dataset")
    p.add_argument("--m", type=_positive, default=200)
    p.add_argument("--informative", type=_positive, default=5)
    p.add_argument("--noise", type=_nonneg, default=45)
    p.add_argument("--clusters", type=_positive, default=4)
    p.add_argument("--separation", type=float, default=6.0)
    p.add_argument("--name", default=None)
    p.add_argument("--seed", type=_nonneg, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None,
                   help="JSON file of flag defaults (explicit flags win)")

    p = commands["ari-check"] = sub.add_parser(
        "ari-check", help="median ARI of k-means clusters vs class labels")
    _add_data_flags(p)
    p.add_argument("--classes", type=_positive, default=None,
                   help="k for k-means (default: number of target classes)")
    p.add_argument("--runs", type=_positive, default=10)
    _add_common_flags(p)

    return parser, commands


def _config_file_from(argv: list[str]) -> str | None:
    for i, token in enumerate(argv):
        if token == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config requires a file path")
            return argv[i + 1]
        if token.startswith("--config="):
            return token.split("=", 1)[1]
    return None


def _apply_config_defaults(commands: dict[str, _Parser], path: str) -> None:
    """Seed parser defaults from a JSON object of flag values. Explicit
    command-line flags still override; unknown keys or values a flag would
    reject are usage errors."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise UsageError("config file must hold a JSON object of flag values")

    known: set[str] = set()
    for sub in commands.values():
        known.update(a.dest for a in sub._actions)
    for key, value in raw.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise UsageError(f"config file sets unknown option {key!r}")
        for sub in commands.values():
            action = next((a for a in sub._actions if a.dest == dest), None)
            if action is None:
                continue
            converted = value
            if action.type is not None and isinstance(value, (str, int, float)):
                try:
                    converted = action.type(str(value))
                except (ValueError, argparse.ArgumentTypeError) as exc:
                    raise UsageError(f"config option {key!r}: {exc}") from exc
            if action.choices is not None and converted not in action.choices:
                raise UsageError(f"config option {key!r}: invalid choice "
                                 f"{converted!r} (choose from "
                                 f"{', '.join(map(str, action.choices))})")
            sub.set_defaults(**{dest: converted})


@dataclass
class RunConfig:
    command: str
    args: argparse.Namespace


def _load(args) -> Dataset:
    return load_csv(args.data, target_column=args.target_column)


def _method_config(args, d: Dataset) -> dict:
    cfg = {"method": args.method, "seed": args.seed}
    if args.method == "urelief":
        m = d.m
        cfg["neighbors"] = (min(30, m - 1) if args.neighbors is None
                            else args.neighbors)
        cfg["iterations"] = m if args.iterations is None else args.iterations
    else:
        cfg["ensemble"] = args.ensemble
        cfg["trees"] = args.trees
        cfg["subset_rule"] = args.subset_rule
    return cfg


def _ranker(args):
    return make_ranker(args.method, trees=args.trees, ensemble=args.ensemble,
                       subset_rule=args.subset_rule, neighbors=args.neighbors,
                       iterations=args.iterations, seed=args.seed,
                       workers=args.workers)


def _emit(args, stem: str, payload: dict) -> Path | None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{stem}.json"
    path.write_text(text, encoding="utf-8")
    return path


def _cmd_rank(args) -> int:
    d = _load(args)
    ranking = _ranker(args)(d.without_target())
    payload = {
        "artifact": "ranking",
        "config": {"command": "rank", "data": args.data,
                   "target_column": args.target_column,
                   **_method_config(args, d)},
        "dataset": {"name": d.name, "m": d.m, "n": d.n},
        "ranking": ranking_rows(ranking),
    }
    stem = f"{d.name}_{args.method}_rank_{args.seed}"
    path = _emit(args, stem, payload)
    if path is not None:
        ranking_to_csv(ranking, path.with_suffix(".csv"))
    return 0


def _cmd_eval(args) -> int:
    d = _load(args)
    plan = FoldPlan.make(d.m, args.folds, args.seed)
    mse = cv_mse(d, _ranker(args), args.top_k, plan)
    payload = {
        "artifact": "eval",
        "config": {"command": "eval", "data": args.data,
                   "target_column": args.target_column, "folds": args.folds,
                   "top_k": args.top_k, **_method_config(args, d)},
        "dataset": {"name": d.name, "m": d.m, "n": d.n},
        "method": args.method,
        "mse": mse,
    }
    _emit(args, f"{d.name}_{args.method}_eval_{args.seed}", payload)
    return 0


def _cmd_curve(args) -> int:
    d = _load(args)
    plan = FoldPlan.make(d.m, args.folds, args.seed)
    report = error_curve(d, _ranker(args), plan)
    payload = {
        "artifact": "curve",
        "config": {"command": "curve", "data": args.data,
                   "target_column": args.target_column, "folds": args.folds,
                   **_method_config(args, d)},
        **report.to_dict(),
    }
    stem = f"{d.name}_{args.method}_curve_{args.seed}"
    path = _emit(args, stem, payload)
    if path is not None:
        curve_points_csv(report, path.with_name(f"{stem}_points.csv"))
    return 0


def _cmd_compare(args) -> int:
    cells: dict[str, dict[str, float]] = {}
    methods: list[str] = []
    for raw in args.inputs:
        try:
            record = json.loads(Path(raw).read_text(encoding="utf-8"))
        except OSError as exc:
            raise IngestionError(f"cannot read {raw}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise IngestionError(f"{raw} is not valid JSON: {exc}") from exc
        if record.get("artifact") != "eval" or "mse" not in record:
            raise IngestionError(f"{raw} is not an eval artifact")
        dataset = record["dataset"]["name"]
        method = record["method"]
        cells.setdefault(dataset, {})
        if method in cells[dataset]:
            raise IngestionError(f"duplicate result for {dataset}/{method}")
        cells[dataset][method] = float(record["mse"])
        if method not in methods:
            methods.append(method)
    datasets = sorted(cells)
    for dataset in datasets:
        missing = [meth for meth in methods if meth not in cells[dataset]]
        if missing:
            raise IngestionError(f"dataset {dataset!r} lacks results for "
                                 f"{', '.join(missing)}")
    matrix = [[cells[ds][meth] for meth in methods] for ds in datasets]
    report = compare_methods(matrix, methods, datasets, args.alpha)
    payload = {"artifact": "compare",
               "config": {"command": "compare", "alpha": args.alpha},
               **report.to_dict()}
    path = _emit(args, "compare", payload)
    if path is not None:
        comparison_to_csv(report, path.with_suffix(".csv"))
    return 0


def _cmd_synth(args) -> int:
    spec = SynthSpec(args.m, args.informative, args.noise, args.clusters,
                     args.separation, args.seed, args.name)
    csv_path, truth_path = write_planted(spec, args.out)
    sys.stdout.write(json.dumps(
        {"artifact": "synth", "csv": str(csv_path), "truth": str(truth_path)},
        indent=2, sort_keys=True) + "\n")
    return 0


def _cmd_ari(args) -> int:
    d = _load(args)
    if d.target is None:
        raise IngestionError("ari-check needs --target-column")
    ari = clustering_hypothesis_ari(d, args.classes, args.runs, args.seed)
    payload = {
        "artifact": "ari",
        "config": {"command": "ari-check", "data": args.data,
                   "target_column": args.target_column,
                   "classes": args.classes, "runs": args.runs,
                   "seed": args.seed},
        "dataset": {"name": d.name, "m": d.m, "n": d.n},
        "ari_median": ari,
    }
    _emit(args, f"{d.name}_ari-check_{args.seed}", payload)
    return 0


_COMMANDS = {"rank": _cmd_rank, "eval": _cmd_eval, "curve": _cmd_curve,
             "compare": _cmd_compare, "synth": _cmd_synth,
             "ari-check": _cmd_ari}


def run(cfg: RunConfig) -> int:
    return _COMMANDS[cfg.command](cfg.args)


def _fail(code: int, kind: str, message: str) -> int:
    record = {"error": {"exit_code": code, "kind": kind, "message": message}}
    sys.stderr.write(json.dumps(record, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, commands = build_parser()
    try:
        config_path = _config_file_from(argv)
        if config_path is not None:
            _apply_config_defaults(commands, config_path)
        args = parser.parse_args(argv)
        return run(RunConfig(args.command, args))
    except UsageError as exc:
        return _fail(1, "usage", str(exc))
    except IngestionError as exc:
        return _fail(2, "data", str(exc))
    except ComputationError as exc:
        return _fail(3, "computation", str(exc))
    except ValueError as exc:
        # configuration found incompatible with the data after loading
        return _fail(2, "data", str(exc))


if __name__ == "__main__":
    sys.exit(main())

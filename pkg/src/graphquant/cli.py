"""Command-line harness.

Exit codes: 0 success, 1 usage or I/O error, 2 bound/pruning violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import dataset as ds
from .evaluation import (
    CSV_COLUMNS,
    CSV_SCHEMA_VERSION,
    TrainReport,
    format_number,
    pairwise_distances,
    speedup,
    write_csv,
)
from .matching import MATCHERS
from .quantizer import DELTA_MODES, LearningRate, TrainConfig, train_accelerated, train_standard

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_training_flags(p: argparse.ArgumentParser, algo: bool = True) -> None:
    p.add_argument("--dataset", required=True, help="JSON-lines graph file")
    if algo:
        p.add_argument("--algo", choices=("std", "acc"), default="acc")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--cycles", type=int, default=150)
    p.add_argument("--theta", type=float, default=None, help="staleness threshold (acc only, default 0)")
    p.add_argument("--matcher", choices=MATCHERS, default="exact")
    p.add_argument("--lr", default="harmonic", help="'harmonic' or 'exp:ETA0:TAU'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", choices=DELTA_MODES, default="path", help="code-graph movement estimate")
    p.add_argument("--max-nodes", type=int, default=None, help="branch-and-bound expansion budget")
    p.add_argument("--out-report", default=None)
    p.add_argument("--out-cycles", default=None)
    p.add_argument("--instrument", action="store_true", help="audit bounds against exact distances")
    p.add_argument("--corrupt-lower-bound", type=float, default=0.0, help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graphquant", description="Competitive learning graph quantization.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a codebook with one algorithm")
    _add_training_flags(p)

    p = sub.add_parser("compare", help="run std and acc under the same seed")
    _add_training_flags(p, algo=False)

    p = sub.add_parser("validate-bounds", help="instrumented acc run; exit 2 on any violation")
    _add_training_flags(p, algo=False)

    p = sub.add_parser("generate", help="write a synthetic distorted-prototype dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--prototypes", default=None, help="JSON-lines prototypes (default: built-in letters)")
    p.add_argument("--copies", type=int, default=20)
    p.add_argument("--noise", type=float, default=0.3)
    p.add_argument("--flip", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _config(args, algo: str, instrument: bool) -> TrainConfig:
    if args.theta is not None and args.theta != 0 and algo == "std":
        raise UsageError("--theta only applies to --algo acc")
    try:
        lr = LearningRate.parse(args.lr)
        return TrainConfig(
            k=args.k,
            cycles=args.cycles,
            theta=args.theta or 0.0,
            matcher=args.matcher,
            max_nodes=args.max_nodes,
            lr=lr,
            seed=args.seed,
            instrument_bounds=instrument,
            delta_mode=args.delta,
            corrupt_lower_bound=args.corrupt_lower_bound,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _config_record(config: TrainConfig) -> dict:
    return {
        "record": "config",
        "k": config.k,
        "cycles": config.cycles,
        "theta": config.theta,
        "matcher": config.matcher,
        "lr": str(config.lr),
        "seed": config.seed,
        "delta_mode": config.delta_mode,
        "instrument_bounds": config.instrument_bounds,
        "csv_schema_version": CSV_SCHEMA_VERSION,
    }


def _load(args):
    data = ds.load(args.dataset)
    S = data.representations()
    labels = data.labels if data.has_labels else None
    return S, labels


def _run(algo: str, S, labels, config: TrainConfig, pairwise=None) -> TrainReport:
    trainer = train_standard if algo == "std" else train_accelerated
    _, report = trainer(S, labels, config, pairwise=pairwise)
    return report


def _write_records(path, records) -> None:
    if path is None:
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def _write_cycles(path, rows, columns) -> None:
    if path is None:
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_csv(rows, columns, fh)


def _report_record(report: TrainReport) -> dict:
    rec = {"record": "report"}
    rec.update(report.to_record())
    return rec


def cmd_train(args) -> int:
    config = _config(args, args.algo, args.instrument)
    S, labels = _load(args)
    report = _run(args.algo, S, labels, config)
    _write_records(args.out_report, [_config_record(config), _report_record(report)])
    _write_cycles(args.out_cycles, report.csv_rows(), CSV_COLUMNS)
    final = report.final
    print(
        f"{report.algo}: distortion={format_number(final['distortion'])} "
        f"accuracy={format_number(final['accuracy'])} silhouette={format_number(final['silhouette'])} "
        f"matcher_calls={report.matcher_calls}"
    )
    if args.instrument:
        print(f"bound_violations={report.bound_violations} wrong_prunes={report.wrong_prunes}")
    return EXIT_OK


def summary_rows(std: TrainReport, acc: TrainReport) -> list[tuple[str, str, str]]:
    try:
        acc_speedup = speedup(std.matcher_calls, acc.matcher_calls)
    except ZeroDivisionError:
        acc_speedup = math.inf

    def pct(v):
        return None if v is None else 100.0 * v

    return [
        ("error", format_number(std.final["distortion"]), format_number(acc.final["distortion"])),
        ("accuracy (%)", format_number(pct(std.final["accuracy"])), format_number(pct(acc.final["accuracy"]))),
        ("silhouette", format_number(std.final["silhouette"]), format_number(acc.final["silhouette"])),
        ("matchings", str(std.matcher_calls), str(acc.matcher_calls)),
        ("speedup", format_number(1.0), format_number(acc_speedup)),
    ]


def cmd_compare(args) -> int:
    std_config = _config(args, "std", False)
    acc_config = _config(args, "acc", args.instrument)
    S, labels = _load(args)
    # silhouette distances depend only on the training set
    pairwise = pairwise_distances(S, std_config.new_matcher())
    std = _run("std", S, labels, std_config, pairwise)
    acc = _run("acc", S, labels, acc_config, pairwise)
    rows = summary_rows(std, acc)

    width = max(len(r[0]) for r in rows)
    print(f"{'measure':<{width}}  {'std':>10}  {'acc':>10}")
    for name, a, b in rows:
        print(f"{name:<{width}}  {a:>10}  {b:>10}")

    summary = {"record": "summary"}
    summary.update({name: {"std": a, "acc": b} for name, a, b in rows})
    _write_records(
        args.out_report,
        [_config_record(acc_config), _report_record(std), _report_record(acc), summary],
    )
    cycle_rows = [{"algo": "std", **r} for r in std.csv_rows()] + [{"algo": "acc", **r} for r in acc.csv_rows()]
    _write_cycles(args.out_cycles, cycle_rows, ("algo",) + CSV_COLUMNS)
    return EXIT_OK


def cmd_validate_bounds(args) -> int:
    if args.matcher == "ga":
        raise UsageError("validate-bounds requires an exact matcher")
    config = _config(args, "acc", True)
    S, labels = _load(args)
    report = _run("acc", S, labels, config)
    _write_records(args.out_report, [_config_record(config), _report_record(report)])
    _write_cycles(args.out_cycles, report.csv_rows(), CSV_COLUMNS)
    excess = max((c.theta_excess_max for c in report.per_cycle), default=0.0)
    print(f"bound_violations={report.bound_violations}")
    print(f"wrong_prunes={report.wrong_prunes}")
    print(f"theta_violations={report.theta_violations} (max upper-bound excess {excess:.3g}, theta {config.theta:g})")
    if report.bound_violations or report.wrong_prunes or report.theta_violations:
        print("FAIL: bound invariants violated", file=sys.stderr)
        return EXIT_VIOLATION
    print("OK")
    return EXIT_OK


def cmd_generate(args) -> int:
    protos = ds.load(args.prototypes).graphs if args.prototypes else ds.demo_prototypes()
    try:
        data = ds.generate_synthetic(protos, args.copies, args.noise, args.flip, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    ds.save(data, args.out)
    print(f"wrote {len(data)} graphs to {args.out}")
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "compare": cmd_compare,
    "validate-bounds": cmd_validate_bounds,
    "generate": cmd_generate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ds.DatasetError, OSError, ValueError) as exc:
        print(f"graphquant {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``leobuf <subcommand> [flags]`` writes CSV."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .allocation import PolicyKind
from .config import build_config, parse_assignments, parse_value
from .errors import ConfigError, LeobufError
from .experiments import ExperimentKind, ExperimentSpec, run_experiment

FLAG_KEYS = {
    "alpha": "alpha", "beta": "beta", "lambda_": "lambda", "c": "c", "L": "L",
    "slots": "slots", "warmup": "warmup", "seed": "seed", "measure": "measure",
}
VALIDATE_DEFAULT_SLOTS = 10_000_000


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="key=value file; flags override it")
    parser.add_argument("--alpha")
    parser.add_argument("--beta")
    parser.add_argument("--lambda", dest="lambda_")
    parser.add_argument("--c")
    parser.add_argument("--L")
    parser.add_argument("--qmax")
    parser.add_argument("--tau", nargs="+", help="thresholds, space or comma separated")
    parser.add_argument("--slots")
    parser.add_argument("--warmup")
    parser.add_argument("--seed")
    parser.add_argument("--replications", type=int, default=1)
    parser.add_argument("--policy", choices=["no-isl", "virtual", "mqla", "all"], default="all")
    parser.add_argument("--measure", choices=["post", "pre"])
    parser.add_argument("--mode", choices=["exceed", "drop"], default="exceed")
    parser.add_argument("--values", nargs="+", help="override the sweep grid")
    parser.add_argument("--target", type=float, default=1e-4, help="overflow target for analyze")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--out", type=Path, help="CSV path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leobuf", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in ExperimentKind:
        _common(sub.add_parser(kind.value))
    return parser


def _sweep_values(kind: ExperimentKind, raw: list[str] | None) -> tuple:
    if not raw:
        return ()
    items = [p for r in raw for p in r.split(",") if p]
    if kind in (ExperimentKind.SWEEP_ALPHA, ExperimentKind.SWEEP_BETA):
        return tuple(float(x) for x in items)
    return tuple(int(x) for x in items)


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    kind = ExperimentKind(args.command)
    values = {}
    if args.config is not None:
        values.update(parse_assignments(args.config.read_text(encoding="utf-8")))
    for attr, key in FLAG_KEYS.items():
        raw = getattr(args, attr)
        if raw is not None:
            values[key] = parse_value(key, raw)
    if args.tau:
        values["tau"] = parse_value("tau", ",".join(args.tau))
    qmax = parse_value("qmax", args.qmax) if args.qmax is not None else values.pop("qmax", None)
    if args.mode == "drop":
        if qmax is None and kind is not ExperimentKind.SWEEP_TAU:
            raise ConfigError("drop mode needs --qmax", key="qmax")
        values["qmax"] = qmax
    else:
        values["qmax"] = None
        if qmax is not None and "tau" not in values:
            values["tau"] = (qmax,)
    if kind is ExperimentKind.VALIDATE and "slots" not in values:
        values["slots"] = VALIDATE_DEFAULT_SLOTS
    base = build_config(values)
    if args.policy == "all":
        policies = (PolicyKind.NO_ISL, PolicyKind.VIRTUAL_QUEUE, PolicyKind.MQLA_ISL)
    else:
        policies = (PolicyKind(args.policy),)
    return ExperimentSpec(
        kind=kind,
        base=base,
        values=_sweep_values(kind, args.values),
        replications=args.replications,
        policies=policies,
        mode=args.mode,
        target=args.target,
        workers=args.workers,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        spec = spec_from_args(args)
        result = run_experiment(spec)
    except (LeobufError, ValueError) as exc:
        print(f"leobuf: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"leobuf: I/O error: {exc}", file=sys.stderr)
        return 3
    try:
        if args.out is None:
            result.to_csv(sys.stdout)
        else:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                result.to_csv(fh)
    except OSError as exc:
        print(f"leobuf: I/O error: {exc}", file=sys.stderr)
        return 3
    return 0 if result.ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

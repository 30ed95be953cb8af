"""Command-line front end.

Exit codes: 0 success, 2 parse or validation error, 3 runtime engine error,
4 demo verdict failure. Every error exit writes exactly one line to stderr
starting with ``dmm: <kind>:``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections.abc import Sequence
from contextlib import contextmanager
from typing import TextIO

from . import demos
from .engine import NeuronAddress, active_neurons, row_groups, run, self_accumulator
from .errors import DMMError, NetworkFileError
from .lightweight import wave_as_dmm
from .netfile import dump_network, load_network
from .vspace import DEFAULT_EPSILON, from_terms, max_rank, to_json

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RUNTIME = 3
EXIT_VERDICT = 4


class CLIError(Exception):
    def __init__(self, code: int, kind: str, message: str) -> None:
        super().__init__(message)
        self.code = code
        self.kind = kind


def _nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return value


def _addresses(text: str) -> list[NeuronAddress]:
    try:
        return [NeuronAddress.parse(part) for part in text.split(",") if part]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _payload(text: str) -> tuple[int, list[float]]:
    try:
        j, row = text.split(":", 1)
        return int(j), [float(x) for x in row.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"payload {text!r} is not of the form J:x1,x2,x3,x4"
        ) from None


def _seed(args: argparse.Namespace) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("DMM_SEED")
    if env is None or env == "":
        return None
    try:
        return int(env)
    except ValueError:
        raise CLIError(EXIT_INVALID, "validation-error", f"DMM_SEED={env!r} is not an integer")


def _load(path: str, seed: int | None = None, epsilon: float = DEFAULT_EPSILON):
    try:
        return load_network(path, seed=seed, epsilon=epsilon)
    except OSError as exc:
        raise CLIError(EXIT_INVALID, "validation-error", f"{path}: {exc.strerror}")
    except (NetworkFileError, DMMError) as exc:
        raise CLIError(EXIT_INVALID, "validation-error", f"{path}: {exc}")


@contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def cmd_run(args: argparse.Namespace) -> int:
    state = _load(args.network, _seed(args), args.epsilon)
    trace = args.trace or []
    with _output(args.out) as out:
        try:
            # one step at a time so records stream out as they are produced
            for _ in range(args.steps):
                state, records = run(state, 1, trace)
                for rec in records:
                    _write_record(out, rec.t, str(rec.address), to_json(rec.value))
        except DMMError as exc:
            raise CLIError(EXIT_RUNTIME, "runtime-error", f"step {state.step_count}: {exc}")
    if state.rejected_updates:
        logging.getLogger("dmm").info("%d self-updates rejected", state.rejected_updates)
    return EXIT_OK


def _write_record(out: TextIO, t: int, address: str, value: object) -> None:
    record = {"t": t, "address": address, "value": value}
    out.write(json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":")))
    out.write("\n")


def cmd_inspect(args: argparse.Namespace) -> int:
    state = _load(args.network)
    groups = row_groups(state.matrix)
    active = active_neurons(state.matrix)
    lines = [f"{sum(groups.values())} nonzero weights, {len(active)} active neurons"]
    for (f, n), count in sorted(groups.items()):
        lines.append(f"row group {f}/{n}: {count} weight{'' if count == 1 else 's'}")
    for (f, n), v in sorted(state.outputs.items()):
        rank = max_rank(v)
        lines.append(f"output {f}/{n}: max_rank={'none' if rank is None else rank}")
    if state.self_address is not None:
        lines.append(f"self: {state.self_address}")
    print("\n".join(lines))
    return EXIT_OK


def cmd_demo(args: argparse.Namespace) -> int:
    name = args.name
    if name == "wave":
        report = demos.demo_wave(args.steps or 12, grid=args.grid, payload=dict(args.payload or []))
    elif name == "rnn":
        report = demos.demo_rnn(seed=_seed(args) or 0, steps=args.steps or 100)
    elif name == "self-accumulate":
        report = demos.demo_self_accumulate(args.steps or 10)
    else:
        seed = _seed(args)
        report = demos.demo_sampling(args.draws, seed=7 if seed is None else seed)
    for line in report.lines:
        print(line)
    if not report.passed:
        raise CLIError(EXIT_VERDICT, "verdict-failure", f"demo {name} failed")
    print(f"PASS {name}")
    return EXIT_OK


EXPORTS = ("wave", "self-accumulate")


def cmd_export(args: argparse.Namespace) -> int:
    seed = _seed(args) or 0
    if args.name == "wave":
        state = wave_as_dmm(seed=seed)
    else:
        update = from_terms([(("identity", "a", "single", "identity", "b", "single"), 1.0)])
        state = self_accumulator(update, seed=seed)
    with _output(args.out) as out:
        out.write(dump_network(state, seed) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmm", description="Run dataflow matrix machines over prefix-tree vectors."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a network file and stream a line-delimited JSON trace")
    p.add_argument("network", help="network definition file (JSON)")
    p.add_argument("--steps", type=_nonnegative_int, default=1)
    p.add_argument("--trace", type=_addresses, help="comma-separated type/neuron/port list")
    p.add_argument("--seed", type=int, help="overrides the file's seed; falls back to $DMM_SEED")
    p.add_argument("--epsilon", type=_positive_float, default=DEFAULT_EPSILON,
                   help="pruning tolerance for linear combinations")
    p.add_argument("--out", help="trace destination (default: stdout)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("inspect", help="summarize a network file's matrix and outputs")
    p.add_argument("network")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("demo", help="run a built-in scenario and report PASS/FAIL")
    p.add_argument("name", choices=demos.DEMOS)
    p.add_argument("--steps", type=_nonnegative_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--draws", type=_nonnegative_int, default=100_000)
    p.add_argument("--grid", action="store_true", help="wave: print Y^1 after each step")
    p.add_argument("--payload", type=_payload, action="append",
                   help="wave: row 3 of U^J, e.g. 2:1,0,0,0 (repeatable)")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("export", help="write a built-in network as a network file")
    p.add_argument("name", choices=EXPORTS)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"dmm: {exc.kind}: {exc}", file=sys.stderr)
        return exc.code
    except DMMError as exc:
        print(f"dmm: runtime-error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

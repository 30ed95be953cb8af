"""Built-in scenarios with self-checking verdicts, used by ``dmm demo``."""

from __future__ import annotations

import math
import random
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .engine import (
    build_rnn,
    read_scalars,
    rnn_hidden_key,
    self_accumulator,
    step,
)
from .errors import InvariantBrokenError
from .lightweight import build_wave_example, lw_step, wave_position
from .samples import SignedSample, combine_samples
from .vspace import from_terms, linear_combination


@dataclass
class DemoReport:
    name: str
    passed: bool = True
    lines: list[str] = field(default_factory=list)

    def fail(self, message: str) -> None:
        self.passed = False
        self.lines.append("mismatch: " + message)


def demo_wave(
    steps: int = 12,
    grid: bool = False,
    payload: Mapping[int, Sequence[float]] | None = None,
) -> DemoReport:
    """Step the wave example, printing the position of the moving 1 in row 2."""
    report = DemoReport("wave")
    sys = build_wave_example(M=3 if payload else 2, payload=payload)
    for t in range(steps):
        try:
            pos = wave_position(sys)
        except InvariantBrokenError as exc:
            report.fail(str(exc))
            return report
        line = f"t={t} position={pos}"
        if payload and sys.X is not None:
            line += f" payload={sys.X[1][2].tolist()}"
        report.lines.append(line)
        if grid:
            report.lines.extend("    " + " ".join(f"{x:4g}" for x in row) for row in sys.A)
        expected = 2 + t % 3
        if pos != expected:
            report.fail(f"t={t}: position {pos}, expected {expected}")
            return report
        sys = lw_step(sys)
    report.lines.append(f"period 3 over {steps} steps: 2 -> 3 -> 4 -> 2")
    return report


def dense_rnn(
    w_rec: np.ndarray, w_in: np.ndarray, inputs: np.ndarray, steps: int, f=np.tanh
) -> np.ndarray:
    """Hidden states ``y^1 .. y^steps`` of a plain RNN started at zero."""
    y = np.zeros(w_rec.shape[0])
    out = []
    for t in range(steps):
        y = f(w_rec @ y + w_in @ inputs[t])
        out.append(y)
    return np.array(out)


def demo_rnn(seed: int = 0, k: int = 4, m: int = 2, steps: int = 100) -> DemoReport:
    """Random RNN run both as a network and densely; report the largest deviation."""
    report = DemoReport("rnn")
    gen = np.random.default_rng(seed)
    w_rec = gen.normal(scale=0.8, size=(k, k))
    w_in = gen.normal(size=(k, m))
    inputs = gen.normal(size=(steps, m))
    reference = dense_rnn(w_rec, w_in, inputs, steps)
    state = build_rnn(w_rec, w_in, "tanh", inputs, seed=seed)
    keys = [rnn_hidden_key(a) for a in range(k)]
    worst = 0.0
    for t in range(steps):
        state = step(state)
        worst = max(worst, float(np.max(np.abs(read_scalars(state, keys) - reference[t]))))
    report.lines.append(f"k={k} m={m} steps={steps} max deviation={worst:.3e}")
    if not worst < 1e-12:
        report.fail(f"deviation {worst} exceeds 1e-12")
    return report


def demo_self_accumulate(steps: int = 10) -> DemoReport:
    report = DemoReport("self-accumulate")
    update = from_terms(
        [
            (("identity", "a", "single", "identity", "b", "single"), 2.0),
            (("identity", "b", "single", "identity", "a", "single"), -1.0),
        ]
    )
    state = self_accumulator(update)
    w0 = state.matrix
    for t in range(1, steps + 1):
        state = step(state)
        expected = linear_combination([(1.0, w0), (float(t), update)])
        ok = state.matrix == expected
        report.lines.append(f"t={t} matrix == W0 + {t}*U: {ok}")
        if not ok:
            report.fail(f"t={t}: {state.matrix!r}")
            break
    return report


SAMPLING_CASES = ((0.3, 0.7), (0.5, -0.5), (0.0, 0.0))


def demo_sampling(draws: int = 100_000, seed: int = 7) -> DemoReport:
    """Check selection frequencies of the signed-sample rule against 3-sigma bounds."""
    report = DemoReport("sampling")
    rng = random.Random(seed)
    p, q = SignedSample("p", 1), SignedSample("q", 1)
    for a, b in SAMPLING_CASES:
        counts: dict[object, int] = {}
        for _ in range(draws):
            slot = combine_samples([(a, p), (b, q)], rng)
            counts[slot] = counts.get(slot, 0) + 1
        total = abs(a) + abs(b)
        if total == 0:
            ok = counts == {None: draws}
            report.lines.append(f"({a}, {b}): missing in {counts.get(None, 0)}/{draws} draws")
            if not ok:
                report.fail(f"({a}, {b}) produced {counts}")
            continue
        expected = {
            SignedSample("p", 1 if a > 0 else -1): abs(a) / total,
            SignedSample("q", 1 if b > 0 else -1): abs(b) / total,
        }
        unexpected = set(counts) - set(expected)
        if unexpected:
            report.fail(f"({a}, {b}) produced unexpected slots {unexpected}")
        for slot, prob in expected.items():
            freq = counts.get(slot, 0) / draws
            bound = 3 * math.sqrt(prob * (1 - prob) / draws)
            ok = abs(freq - prob) <= bound
            sign = "+" if slot.sign > 0 else "-"
            report.lines.append(
                f"({a}, {b}): <{slot.point},{sign}1> freq={freq:.5f} "
                f"expected={prob:.5f} bound={bound:.5f}"
            )
            if not ok:
                report.fail(f"({a}, {b}) frequency of {slot} is {freq}, expected {prob}")
    return report


DEMOS = ("wave", "rnn", "self-accumulate", "sampling")

"""Streams of signed samples.

A finite signed measure is represented by a single draw ``<x, s>`` where
``s`` is +1 or -1; the zero measure is represented by a missing sample, which
is spelled ``None`` throughout this package. Linear combinations of measures
are computed stochastically: pick term ``i`` with probability proportional
to ``|alpha_i|`` and flip the sign of its sample when ``alpha_i < 0``.

Extended vectors carry an optional sample on any node next to the number.
Paths are combined independently of each other.
"""

from __future__ import annotations

import random
from collections import Counter
from collections.abc import Iterable, Sequence
from typing import Optional

from .vspace import (
    DEFAULT_EPSILON,
    PTVector,
    SignedSample,
    linear_combination,
)

__all__ = [
    "SignedSample",
    "act_sample_add",
    "combine_extended",
    "combine_samples",
    "empirical_signed_measure",
    "sample_leaf",
]

SampleSlot = Optional[SignedSample]


def _pick_index(weights: Sequence[float], rng: random.Random) -> int:
    total = sum(weights)
    u = rng.random() * total
    acc = 0.0
    last = -1
    for i, w in enumerate(weights):
        if w == 0.0:
            continue
        acc += w
        last = i
        if u < acc:
            return i
    # u * total rounded up onto the total
    return last


def combine_samples(
    pairs: Sequence[tuple[float, SampleSlot]], rng: random.Random
) -> SampleSlot:
    """Draw one slot representing ``sum(alpha_i * mu_i)``.

    Returns ``None`` (missing) when every coefficient is zero or when the
    selected term is itself missing.
    """
    weights = [abs(float(alpha)) for alpha, _ in pairs]
    if not any(weights):
        return None
    i = _pick_index(weights, rng)
    alpha, slot = pairs[i]
    if slot is None:
        return None
    return slot if alpha > 0 else slot.negated()


def combine_extended(
    pairs: Iterable[tuple[float, PTVector]],
    rng: random.Random,
    epsilon: float = DEFAULT_EPSILON,
) -> PTVector:
    """Linear combination of sample-bearing vectors.

    Numbers combine exactly as in :func:`dmm.vspace.linear_combination`. At
    every path that carries a sample in at least one input, the result's
    sample is :func:`combine_samples` over that path's slots, using the same
    coefficients; inputs lacking the path contribute a missing slot. Paths
    with no samples anywhere consume no randomness.
    """
    return linear_combination(
        pairs, epsilon, sample_rule=lambda slots: combine_samples(slots, rng)
    )


def empirical_signed_measure(slots: Iterable[SampleSlot]) -> dict[str, float]:
    """Signed frequency of each point; missing slots count toward the total only."""
    counts: Counter[str] = Counter()
    total = 0
    for slot in slots:
        total += 1
        if slot is not None:
            counts[slot.point] += slot.sign
    if total == 0:
        return {}
    return {point: c / total for point, c in sorted(counts.items()) if c != 0}


def sample_leaf(point: str, sign: int = 1, number: float = 0.0) -> PTVector:
    return PTVector(number, sample=SignedSample(point, sign))


def act_sample_add(v: PTVector, rng: random.Random) -> PTVector:
    """Variadic sum of all inputs with unit weights, combining samples stochastically."""
    total = combine_extended([(1.0, child) for child in v.children.values()], rng)
    return PTVector(children={"single": total})

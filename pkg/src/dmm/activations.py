"""Built-in neuron types.

Every neuron has one input and one output, both prefix-tree vectors; the
first-level keys of the input name its arguments and the first-level keys of
the output name its results. Single-result types emit under ``single``.
"""

from __future__ import annotations

import math
import random
from collections.abc import Callable, Iterable, Iterator, Mapping
from dataclasses import dataclass
from typing import Optional

from .errors import UnknownNeuronTypeError
from .samples import act_sample_add
from .vspace import (
    PTVector,
    linear_combination,
    map_coefficients,
    scale,
    subtree,
    zero,
)

SINGLE = "single"
DEFAULT_DECAY = 0.9
CONST_PREFIX = "const:"


def _single(v: PTVector) -> PTVector:
    return PTVector(children={SINGLE: v})


def act_add(v: PTVector) -> PTVector:
    """Sum every named input. With inputs ``accum`` and ``delta`` this is the Self neuron."""
    return _single(linear_combination([(1.0, child) for child in v.children.values()]))


def act_identity(v: PTVector) -> PTVector:
    return _single(subtree(v, SINGLE))


def act_leaky(v: PTVector) -> PTVector:
    """``single <- decay * single + delta``; the decay defaults to 0.9 when not supplied."""
    decay = subtree(v, "decay")
    lam = decay.scalar if decay else DEFAULT_DECAY
    return _single(linear_combination([(lam, subtree(v, SINGLE)), (1.0, subtree(v, "delta"))]))


def act_multiply(v: PTVector) -> PTVector:
    """Gate ``signal`` by the scalar component of ``mask``."""
    gate = subtree(v, "mask").scalar
    return _single(scale(gate, subtree(v, "signal")))


def act_tanh(v: PTVector) -> PTVector:
    return _single(map_coefficients(math.tanh, subtree(v, SINGLE)))


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def act_sigmoid(v: PTVector) -> PTVector:
    # applied to stored coefficients only; absent paths stay absent
    return _single(map_coefficients(_sigmoid, subtree(v, SINGLE)))


def act_input(v: PTVector) -> PTVector:
    # outputs of input neurons are supplied by the engine's feeds
    return zero()


@dataclass(frozen=True)
class NeuronType:
    """A named transform V -> V.

    Stochastic types receive the engine's random generator as a second argument.
    ``constant`` is set for types built by :func:`act_const`.
    """

    name: str
    transform: Callable[..., PTVector]
    stochastic: bool = False
    constant: Optional[PTVector] = None

    def __call__(self, v: PTVector, rng: random.Random | None = None) -> PTVector:
        if self.stochastic:
            if rng is None:
                raise ValueError(f"neuron type {self.name!r} needs a random generator")
            return self.transform(v, rng)
        return self.transform(v)


def act_const(c: PTVector, name: str = "c") -> NeuronType:
    """Neuron type ``const:<name>`` that ignores its input and emits ``{single: c}``."""
    out = _single(c)
    return NeuronType(CONST_PREFIX + name, lambda v: out, constant=c)


BUILTINS: dict[str, NeuronType] = {
    nt.name: nt
    for nt in [
        NeuronType("add", act_add),
        NeuronType("identity", act_identity),
        NeuronType("leaky", act_leaky),
        NeuronType("multiply", act_multiply),
        NeuronType("tanh", act_tanh),
        NeuronType("sigmoid", act_sigmoid),
        NeuronType("input", act_input),
        NeuronType("sample_add", act_sample_add, stochastic=True),
    ]
}


class NeuronTypeRegistry(Mapping[str, NeuronType]):
    """Name -> neuron type lookup. Missing names raise :class:`UnknownNeuronTypeError`."""

    def __init__(self, types: Iterable[NeuronType] = ()) -> None:
        self._types: dict[str, NeuronType] = {}
        for nt in types:
            self.register(nt)

    def register(self, nt: NeuronType) -> None:
        self._types[nt.name] = nt

    def __getitem__(self, name: str) -> NeuronType:
        try:
            return self._types[name]
        except KeyError:
            raise UnknownNeuronTypeError(name) from None

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self._types))

    def __len__(self) -> int:
        return len(self._types)

    def __repr__(self) -> str:
        return f"NeuronTypeRegistry({list(self)})"

    def constants(self) -> dict[str, PTVector]:
        return {
            name[len(CONST_PREFIX):]: nt.constant
            for name, nt in self._types.items()
            if nt.constant is not None
        }


def default_registry(constants: Mapping[str, PTVector] | None = None) -> NeuronTypeRegistry:
    """All built-in types plus one ``const:<name>`` type per entry of ``constants``."""
    registry = NeuronTypeRegistry(BUILTINS.values())
    for name, c in (constants or {}).items():
        registry.register(act_const(c, name))
    return registry


def registry_from_names(
    names: Iterable[str], constants: Mapping[str, PTVector] | None = None
) -> NeuronTypeRegistry:
    """Registry holding exactly ``names``; ``const:<x>`` names need ``constants[x]``."""
    constants = constants or {}
    registry = NeuronTypeRegistry()
    for name in names:
        if name.startswith(CONST_PREFIX):
            key = name[len(CONST_PREFIX):]
            if key not in constants:
                raise UnknownNeuronTypeError(name)
            registry.register(act_const(constants[key], key))
        elif name in BUILTINS:
            registry.register(BUILTINS[name])
        else:
            raise UnknownNeuronTypeError(name)
    return registry

"""Two-stroke execution engine over prefix-tree vectors.

The network matrix is a vector whose nonzero paths all have length six,
``(f, n_f, i, g, n_g, o)``: the weight from output ``o`` of neuron ``n_g``
(of type ``g``) to input ``i`` of neuron ``n_f`` (of type ``f``).

One step is

* down movement: every input with a nonzero matrix row is recomputed as the
  weighted sum of the current outputs it is connected to;
* up movement: every neuron that received an input map applies its type's
  transform to it, producing its next output map.

When ``self_address`` is set, the output found there after the up movement
becomes the matrix for the next step.
"""

from __future__ import annotations

import logging
import random
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Union

import numpy as np

from .activations import SINGLE, NeuronTypeRegistry, act_const, default_registry
from .errors import DimensionError, MatrixDepthError
from .samples import combine_extended
from .vspace import (
    DEFAULT_EPSILON,
    PTVector,
    coefficient,
    get_in,
    linear_combination,
    nodes,
    subtree,
    terms,
    with_coefficient,
    zero,
)

log = logging.getLogger(__name__)

MATRIX_DEPTH = 6

NeuronKey = tuple[str, str]
Feed = Union[Sequence[PTVector], Callable[[int], PTVector]]


class NeuronAddress(NamedTuple):
    """``(type, neuron, port)``; written ``type/neuron/port`` on the command line."""

    type_name: str
    neuron_name: str
    port: str

    @classmethod
    def parse(cls, text: str) -> NeuronAddress:
        parts = text.split("/")
        if len(parts) != 3 or not all(parts):
            raise ValueError(f"address {text!r} is not of the form type/neuron/port")
        return cls(*parts)

    @property
    def neuron(self) -> NeuronKey:
        return (self.type_name, self.neuron_name)

    def __str__(self) -> str:
        return "/".join(self)


class TraceRecord(NamedTuple):
    t: int
    address: NeuronAddress
    value: PTVector


@dataclass(frozen=True)
class EngineState:
    """Everything needed to advance a network by one step.

    ``outputs`` maps ``(type, neuron)`` to that neuron's output map at time
    ``step_count``. ``feeds`` supply the outputs of input neurons: a sequence
    indexed by time (zero past its end) or a callable of time.
    """

    matrix: PTVector
    outputs: Mapping[NeuronKey, PTVector]
    registry: NeuronTypeRegistry
    self_address: Optional[NeuronAddress] = None
    step_count: int = 0
    rng: random.Random = field(default_factory=lambda: random.Random(0), compare=False)
    feeds: Mapping[NeuronKey, Feed] = field(default_factory=dict)
    epsilon: float = DEFAULT_EPSILON
    rejected_updates: int = 0

    def output(self, address: NeuronAddress) -> PTVector:
        v = self.outputs.get(address.neuron)
        return subtree(v, address.port) if v is not None else zero()


def feed_value(feed: Feed, t: int) -> PTVector:
    if callable(feed):
        return feed(t)
    return feed[t] if t < len(feed) else zero()


def validate_matrix(m: PTVector) -> PTVector:
    """Raise :class:`MatrixDepthError` unless every nonzero path has length 6."""
    for path, _ in nodes(m):
        if len(path) != MATRIX_DEPTH:
            raise MatrixDepthError(path)
    return m


def make_state(
    matrix: PTVector,
    registry: NeuronTypeRegistry | None = None,
    outputs: Mapping[NeuronKey, PTVector] | None = None,
    self_address: NeuronAddress | None = None,
    feeds: Mapping[NeuronKey, Feed] | None = None,
    seed: int = 0,
    epsilon: float = DEFAULT_EPSILON,
) -> EngineState:
    """Build a time-0 state.

    The Self output defaults to the matrix itself and fed neurons start at
    their time-0 feed values, so the state is consistent before the first step.
    """
    validate_matrix(matrix)
    outs = dict(outputs or {})
    if self_address is not None and self_address.neuron not in outs:
        outs[self_address.neuron] = PTVector(children={self_address.port: matrix})
    feeds = dict(feeds or {})
    for key, feed in feeds.items():
        outs[key] = feed_value(feed, 0)
    return EngineState(
        matrix=matrix,
        outputs=outs,
        registry=registry if registry is not None else default_registry(),
        self_address=self_address,
        rng=random.Random(seed),
        feeds=feeds,
        epsilon=epsilon,
    )


def down_movement(
    matrix: PTVector,
    outputs: Mapping[NeuronKey, PTVector],
    rng: random.Random | None = None,
    epsilon: float = DEFAULT_EPSILON,
) -> dict[NeuronKey, PTVector]:
    """Apply the matrix to all current outputs.

    Returns one input map per neuron ``(f, n_f)`` that has a nonzero row.
    With ``rng``, sample-bearing outputs are combined stochastically.
    """
    validate_matrix(matrix)
    result: dict[NeuronKey, PTVector] = {}
    for f, by_name in matrix.children.items():
        for n_f, by_input in by_name.children.items():
            inputs: dict[str, PTVector] = {}
            for i, row in by_input.children.items():
                pairs = []
                for g, row_g in row.children.items():
                    for n_g, row_n in row_g.children.items():
                        y = outputs.get((g, n_g))
                        for o, w in row_n.children.items():
                            pairs.append((w.scalar, subtree(y, o) if y is not None else zero()))
                if rng is None:
                    inputs[i] = linear_combination(pairs, epsilon)
                else:
                    inputs[i] = combine_extended(pairs, rng, epsilon)
            result[(f, n_f)] = PTVector(children=inputs)
    return result


def up_movement(
    registry: NeuronTypeRegistry,
    inputs: Mapping[NeuronKey, PTVector],
    rng: random.Random | None = None,
) -> dict[NeuronKey, PTVector]:
    """Apply each neuron's transform to its input map.

    Every type name is resolved before any transform runs, so an unknown
    name fails without partial results.
    """
    types = {key: registry[key[0]] for key in inputs}
    return {key: types[key](v, rng) for key, v in inputs.items()}


def step(state: EngineState) -> EngineState:
    inputs = down_movement(state.matrix, state.outputs, state.rng, state.epsilon)
    outputs = up_movement(state.registry, inputs, state.rng)
    t = state.step_count + 1
    for key, feed in state.feeds.items():
        outputs[key] = feed_value(feed, t)

    matrix = state.matrix
    rejected = state.rejected_updates
    addr = state.self_address
    if addr is not None and addr.neuron in outputs:
        candidate = subtree(outputs[addr.neuron], addr.port)
        try:
            matrix = validate_matrix(candidate)
        except MatrixDepthError as exc:
            rejected += 1
            log.warning(
                "self-update rejected at step %d: %s; keeping previous matrix",
                t,
                exc,
                extra={"step": t, "address": str(addr), "path": exc.path},
            )
    return replace(
        state, matrix=matrix, outputs=outputs, step_count=t, rejected_updates=rejected
    )


def run(
    state: EngineState, n: int, trace: Iterable[NeuronAddress] = ()
) -> tuple[EngineState, list[TraceRecord]]:
    """Advance ``n`` steps.

    For each step, the log records the value at every traced address as it
    stands when the step begins, i.e. at times ``step_count .. step_count+n-1``.
    """
    if n < 0:
        raise ValueError("number of steps must be nonnegative")
    trace = list(trace)
    log_: list[TraceRecord] = []
    for _ in range(n):
        for addr in trace:
            log_.append(TraceRecord(state.step_count, addr, state.output(addr)))
        state = step(state)
    return state, log_


def weight_path(src: NeuronAddress, dst: NeuronAddress) -> tuple[str, ...]:
    return (dst.type_name, dst.neuron_name, dst.port, src.type_name, src.neuron_name, src.port)


def get_weight(state: EngineState, src: NeuronAddress, dst: NeuronAddress) -> float:
    return coefficient(state.matrix, weight_path(src, dst))


def set_weight(
    state: EngineState, src: NeuronAddress, dst: NeuronAddress, w: float
) -> EngineState:
    """Set the weight from output ``src`` to input ``dst``; 0 removes it.

    With a Self neuron the designated output is updated too, so the next
    step starts from the edited matrix.
    """
    matrix = with_coefficient(state.matrix, weight_path(src, dst), w)
    outputs = dict(state.outputs)
    addr = state.self_address
    if addr is not None:
        prev = outputs.get(addr.neuron, zero())
        outputs[addr.neuron] = PTVector(
            prev.scalar, {**prev.children, addr.port: matrix}, prev.sample
        )
    return replace(state, matrix=matrix, outputs=outputs)


def row_groups(matrix: PTVector) -> dict[NeuronKey, int]:
    """Number of nonzero weights in the rows of each receiving neuron."""
    counts: dict[NeuronKey, int] = {}
    for path, _ in terms(matrix):
        key = (path[0], path[1])
        counts[key] = counts.get(key, 0) + 1
    return counts


def active_neurons(matrix: PTVector) -> set[NeuronKey]:
    """Neurons with at least one nonzero weight on either side."""
    active: set[NeuronKey] = set()
    for path, _ in terms(matrix):
        active.add((path[0], path[1]))
        active.add((path[3], path[4]))
    return active


# -- classical RNN as a network ------------------------------------------

RNN_TYPES = ("tanh", "sigmoid", "identity")


def rnn_hidden_key(a: int, nonlinearity: str = "tanh") -> NeuronKey:
    return (nonlinearity, f"h{a + 1}")


def rnn_input_key(j: int) -> NeuronKey:
    return ("input", f"i{j + 1}")


def _scalar_out(x: float) -> PTVector:
    return PTVector(children={SINGLE: PTVector(x)})


def build_rnn(
    w_rec: np.ndarray,
    w_in: np.ndarray | None = None,
    nonlinearity: str = "tanh",
    inputs: np.ndarray | None = None,
    y0: np.ndarray | None = None,
    seed: int = 0,
    epsilon: float = DEFAULT_EPSILON,
) -> EngineState:
    """Encode a classical RNN as a network over scalar streams.

    With ``k`` hidden neurons and ``m`` input streams, ``x^{t+1} = w_rec @ y^t
    + w_in @ i^t`` and ``y^{t+1} = f(x^{t+1})``. ``inputs[t]`` is ``i^t``; time
    steps beyond its length read zero. Hidden neuron ``a`` is
    ``(nonlinearity, "h{a+1}")`` and input ``j`` is ``("input", "i{j+1}")``.
    """
    w_rec = np.asarray(w_rec, dtype=float)
    if w_rec.ndim != 2 or w_rec.shape[0] != w_rec.shape[1]:
        raise DimensionError(f"recurrent matrix must be square, got shape {w_rec.shape}")
    k = w_rec.shape[0]
    if w_in is None:
        w_in = np.zeros((k, 0))
    w_in = np.asarray(w_in, dtype=float)
    if w_in.ndim != 2 or w_in.shape[0] != k:
        raise DimensionError(f"input matrix must have {k} rows, got shape {w_in.shape}")
    m = w_in.shape[1]
    if inputs is None:
        inputs = np.zeros((0, m))
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 2 or inputs.shape[1] != m:
        raise DimensionError(f"input streams must have shape (T, {m}), got {inputs.shape}")
    if y0 is not None:
        y0 = np.asarray(y0, dtype=float)
        if y0.shape != (k,):
            raise DimensionError(f"initial state must have shape ({k},), got {y0.shape}")
    if nonlinearity not in RNN_TYPES:
        raise ValueError(f"nonlinearity must be one of {RNN_TYPES}, got {nonlinearity!r}")

    matrix = zero()
    for a in range(k):
        dst = rnn_hidden_key(a, nonlinearity) + (SINGLE,)
        for b in range(k):
            if w_rec[a, b] != 0.0:
                src = rnn_hidden_key(b, nonlinearity) + (SINGLE,)
                matrix = with_coefficient(matrix, dst + src, w_rec[a, b])
        for j in range(m):
            if w_in[a, j] != 0.0:
                src = rnn_input_key(j) + (SINGLE,)
                matrix = with_coefficient(matrix, dst + src, w_in[a, j])

    outputs = {}
    if y0 is not None:
        outputs = {rnn_hidden_key(a, nonlinearity): _scalar_out(y0[a]) for a in range(k)}
    feeds = {
        rnn_input_key(j): tuple(_scalar_out(x) for x in inputs[:, j]) for j in range(m)
    }
    return make_state(matrix, outputs=outputs, feeds=feeds, seed=seed, epsilon=epsilon)


def read_scalars(state: EngineState, keys: Sequence[NeuronKey]) -> np.ndarray:
    """Scalar component of the ``single`` output of each neuron, as an array."""
    return np.array(
        [get_in(state.outputs.get(key, zero()), (SINGLE,)).scalar for key in keys]
    )


# -- Self as an accumulator -------------------------------------------------

SELF = NeuronAddress("add", "Self", SINGLE)


def self_accumulator(
    update: PTVector,
    extra: PTVector | None = None,
    update_name: str = "U",
    seed: int = 0,
) -> EngineState:
    """Network whose Self neuron accumulates a constant update each step.

    Self sums ``accum`` (its own output, weight 1) and ``delta`` (the output of
    ``const:<update_name>``, weight 1). The constant neuron is kept firing by a
    weight from Self into its ignored ``tick`` input. ``extra`` is added to the
    initial matrix. After ``t`` steps the matrix is ``W0 + t * update``.
    """
    const = NeuronAddress("const:" + update_name, update_name, SINGLE)
    w0 = zero() if extra is None else extra
    w0 = with_coefficient(w0, weight_path(SELF, SELF._replace(port="accum")), 1.0)
    w0 = with_coefficient(w0, weight_path(const, SELF._replace(port="delta")), 1.0)
    w0 = with_coefficient(w0, weight_path(SELF, const._replace(port="tick")), 1.0)
    nt = act_const(update, update_name)
    registry = default_registry()
    registry.register(nt)
    outputs = {const.neuron: nt(zero())}
    return make_state(w0, registry, outputs, self_address=SELF, seed=seed)

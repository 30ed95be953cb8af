"""Lightweight pure machines over fixed-size rectangular matrices.

There are ``M + N`` streams of ``M x N`` matrices, ``X^1..X^M`` and
``Y^1..Y^N``. With ``A = Y^1_t``::

    X^i_{t+1} = sum_j A[i, j] * Y^j_t
    Y^j_{t+1} = f^j(X^1_{t+1}, ..., X^M_{t+1})

so ``Y^1`` is the connectivity matrix that the system rewrites each step.
Indices in this module's public API (rows, columns, stream numbers) are
1-based as in the usual notation; arrays are plain 0-based numpy arrays.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .activations import act_const, default_registry
from .engine import SELF, EngineState, NeuronAddress, make_state, weight_path
from .errors import DimensionError, InvariantBrokenError
from .vspace import PTVector, coefficient, from_terms

StreamFn = Callable[[tuple[np.ndarray, ...]], np.ndarray]


@dataclass(frozen=True)
class LightweightSystem:
    """State of a lightweight machine at time ``t``.

    ``fns[j]`` computes ``Y^{j+1}`` from the tuple of all ``X`` matrices.
    ``X`` holds the matrices computed by the most recent step (``None`` at t=0).
    """

    fns: tuple[StreamFn, ...]
    Y: tuple[np.ndarray, ...]
    t: int = 0
    X: Optional[tuple[np.ndarray, ...]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if len(self.fns) != len(self.Y):
            raise DimensionError(f"{len(self.fns)} stream functions for {len(self.Y)} Y streams")
        if not self.Y:
            raise DimensionError("a system needs at least one Y stream")
        shape = self.Y[0].shape
        if len(shape) != 2 or shape[1] != len(self.Y):
            raise DimensionError(f"Y matrices must be M x {len(self.Y)}, got {shape}")
        for j, y in enumerate(self.Y):
            if y.shape != shape:
                raise DimensionError(f"Y^{j + 1} has shape {y.shape}, expected {shape}")

    @property
    def M(self) -> int:
        return self.Y[0].shape[0]

    @property
    def N(self) -> int:
        return self.Y[0].shape[1]

    @property
    def A(self) -> np.ndarray:
        return self.Y[0]


def lw_step(sys: LightweightSystem) -> LightweightSystem:
    A = sys.A
    stack = np.stack(sys.Y)  # (N, M, N)
    X = tuple(np.tensordot(A[i], stack, axes=1) for i in range(sys.M))
    Y = []
    for j, fn in enumerate(sys.fns):
        y = np.asarray(fn(X), dtype=float)
        if y.shape != A.shape:
            raise DimensionError(f"f^{j + 1} returned shape {y.shape}, expected {A.shape}")
        Y.append(y)
    return replace(sys, Y=tuple(Y), t=sys.t + 1, X=X)


def lw_run(sys: LightweightSystem, n: int) -> list[LightweightSystem]:
    """Return the states at times ``t .. t+n``."""
    states = [sys]
    for _ in range(n):
        sys = lw_step(sys)
        states.append(sys)
    return states


def sum_of_rows(rows: Sequence[int]) -> StreamFn:
    """``f(X) = sum of X^r for r in rows`` (1-based)."""
    rows = tuple(rows)
    return lambda X: sum((X[r - 1] for r in rows), np.zeros_like(X[0]))


def constant(U: np.ndarray) -> StreamFn:
    U = np.array(U, dtype=float)
    return lambda X: U.copy()


def accumulating_system(
    A0: np.ndarray, updates: Sequence[np.ndarray], sum_rows: Sequence[int] = (1, 2)
) -> LightweightSystem:
    """``f^1 = sum of X^r over sum_rows``, ``f^j = U^j`` constant for ``j >= 2``.

    ``updates`` lists ``U^2 .. U^N``; they also serve as the initial ``Y^j_0``.
    """
    A0 = np.array(A0, dtype=float)
    Us = [np.array(U, dtype=float) for U in updates]
    fns = (sum_of_rows(sum_rows),) + tuple(constant(U) for U in Us)
    return LightweightSystem(fns=fns, Y=(A0, *Us))


# -- the wave example --------------------------------------------------------


def wave_parameters(
    M: int = 2, payload: Mapping[int, Sequence[float]] | None = None
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Initial matrix and the three constant updates ``U^2, U^3, U^4``.

    ``A`` has ``a_11 = a_22 = 1``. In row 2, each ``U^j`` points to itself with
    weight -1 and to the next update (2 -> 3 -> 4 -> 2) with weight +1.
    ``payload`` maps ``j`` to a row placed in row 3 of ``U^j`` (requires M >= 3).
    """
    N = 4
    if M < 2:
        raise DimensionError("the wave example needs M >= 2")
    A = np.zeros((M, N))
    A[0, 0] = 1.0
    A[1, 1] = 1.0
    updates = []
    for j, nxt in ((2, 3), (3, 4), (4, 2)):
        U = np.zeros((M, N))
        U[1, j - 1] = -1.0
        U[1, nxt - 1] = 1.0
        updates.append(U)
    for j, row in (payload or {}).items():
        if j not in (2, 3, 4):
            raise ValueError(f"payload stream must be 2, 3 or 4, got {j}")
        if M < 3:
            raise DimensionError("payload rows need M >= 3")
        row = np.asarray(row, dtype=float)
        if row.shape != (N,):
            raise DimensionError(f"payload row must have {N} entries, got {row.shape}")
        updates[j - 2][2] = row
    return A, updates


def build_wave_example(
    M: int = 2, payload: Mapping[int, Sequence[float]] | None = None
) -> LightweightSystem:
    A, updates = wave_parameters(M, payload)
    return accumulating_system(A, updates, sum_rows=(1, 2))


def wave_position(sys: LightweightSystem) -> int:
    """1-based column of the single 1 in row 2 of ``Y^1``.

    Raises :class:`InvariantBrokenError` unless row 2 is exactly one 1 and zeros.
    """
    row = sys.A[1]
    ones = np.flatnonzero(row == 1.0)
    if len(ones) != 1 or np.count_nonzero(row) != 1:
        raise InvariantBrokenError(f"row 2 of Y^1 at t={sys.t} is {row.tolist()}")
    return int(ones[0]) + 1


# -- encoding as a network over prefix trees -----------------------------------


def row_target(i: int, sum_rows: Sequence[int]) -> tuple[str, str, str]:
    """Input that row ``i`` of the matrix feeds: a Self input or a sink neuron."""
    if i in sum_rows:
        return (SELF.type_name, SELF.neuron_name, f"x{i}")
    return ("identity", f"x{i}", "single")


def column_source(j: int) -> tuple[str, str, str]:
    if j == 1:
        return tuple(SELF)
    return (f"const:U{j}", f"U{j}", "single")


def encode_matrix(B: np.ndarray, sum_rows: Sequence[int] = (1, 2)) -> PTVector:
    """Embed an ``M x N`` matrix as a depth-6 vector."""
    M, N = B.shape
    return from_terms(
        (row_target(i + 1, sum_rows) + column_source(j + 1), B[i, j])
        for i in range(M)
        for j in range(N)
        if B[i, j] != 0.0
    )


def decode_matrix(
    matrix: PTVector, M: int, N: int, sum_rows: Sequence[int] = (1, 2)
) -> np.ndarray:
    B = np.zeros((M, N))
    for i in range(M):
        for j in range(N):
            B[i, j] = coefficient(matrix, row_target(i + 1, sum_rows) + column_source(j + 1))
    return B


def encode_as_dmm(
    A0: np.ndarray,
    updates: Sequence[np.ndarray],
    sum_rows: Sequence[int] = (1, 2),
    seed: int = 0,
) -> EngineState:
    """The same dynamics as :func:`accumulating_system`, as a network.

    Self (type ``add``) sums inputs ``x<r>`` for ``r`` in ``sum_rows``; matrix
    entry ``(i, j)`` is the weight from column source ``j`` to row target
    ``i``. Each ``U^j`` is a ``const:U<j>`` neuron kept firing by a unit weight
    from Self into its ignored ``tick`` input. Those tick weights survive the
    accumulation only if column 1 of ``A`` restricted to ``sum_rows`` sums to 1
    and the updates never touch it, which is checked here.
    """
    A0 = np.array(A0, dtype=float)
    M, N = A0.shape
    if len(updates) != N - 1:
        raise DimensionError(f"expected {N - 1} update matrices, got {len(updates)}")
    rows = [r - 1 for r in sum_rows]
    if A0[rows, 0].sum() != 1.0 or any(np.asarray(U)[rows, 0].any() for U in updates):
        raise ValueError("column 1 of A over the summed rows must sum to 1 and stay fixed")

    registry = default_registry()
    outputs = {}
    matrix = encode_matrix(A0, sum_rows)
    for j, U in enumerate(updates, start=2):
        nt = act_const(encode_matrix(np.asarray(U, dtype=float), sum_rows), f"U{j}")
        registry.register(nt)
        src = NeuronAddress(*column_source(j))
        outputs[src.neuron] = nt(PTVector())
        tick = weight_path(SELF, src._replace(port="tick"))
        matrix = matrix + from_terms([(tick, 1.0)])
    return make_state(matrix, registry, outputs, self_address=SELF, seed=seed)


def wave_as_dmm(M: int = 2, seed: int = 0) -> EngineState:
    A, updates = wave_parameters(M)
    return encode_as_dmm(A, updates, sum_rows=(1, 2), seed=seed)

"""Finite prefix trees with numeric leaves.

A :class:`PTVector` is a finite formal linear combination of token strings.
Each term ``alpha * l1 ... ln`` is a path ``(l1, ..., ln)`` through the tree
whose node carries the coefficient ``alpha``; the empty path is the scalar
slot at the root. Seen as a recurrent map, a vector is a scalar plus a finite
map from tokens to vectors, which is exactly how nodes are stored here.

Vectors are immutable and always canonical: no child subtree is zero. Nodes
may additionally carry a :class:`SignedSample` (see :mod:`dmm.samples`).
"""

from __future__ import annotations

import json
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from types import MappingProxyType
from typing import Any, Optional

from .errors import ParseError, ReservedTokenError, TokenError

__all__ = [
    "DEFAULT_EPSILON",
    "NUMBER",
    "SAMPLE",
    "PTVector",
    "SignedSample",
    "add",
    "attach",
    "coefficient",
    "dumps",
    "from_json",
    "from_terms",
    "get_in",
    "linear_combination",
    "loads",
    "max_rank",
    "prune",
    "scale",
    "subtree",
    "terms",
    "to_json",
    "with_coefficient",
    "zero",
]

NUMBER = ":number"
SAMPLE = ":sample"
RESERVED = frozenset({NUMBER, SAMPLE})

DEFAULT_EPSILON = 1e-12

Path = tuple[str, ...]


@dataclass(frozen=True)
class SignedSample:
    """A point of the sample space tagged with a sign of +1 or -1."""

    point: str
    sign: int

    def __post_init__(self) -> None:
        if not isinstance(self.point, str):
            raise TypeError(f"sample point must be a string, got {type(self.point).__name__}")
        if isinstance(self.sign, bool) or self.sign not in (1, -1):
            raise ValueError(f"sample sign must be +1 or -1, got {self.sign!r}")

    def negated(self) -> SignedSample:
        return SignedSample(self.point, -self.sign)


def check_token(token: str) -> str:
    if not isinstance(token, str) or not token:
        raise TokenError(f"token must be a nonempty string, got {token!r}")
    if token in RESERVED:
        raise ReservedTokenError(f"{token!r} is reserved and cannot be used as a key")
    return token


class PTVector:
    """Immutable prefix-tree vector.

    The constructor drops zero children, so every instance is canonical as long
    as its children are. Use :func:`from_terms` or :func:`from_json` to build
    vectors from flat data.
    """

    __slots__ = ("_scalar", "_children", "_sample", "_hash")

    def __init__(
        self,
        scalar: float = 0.0,
        children: Mapping[str, PTVector] | None = None,
        sample: SignedSample | None = None,
    ) -> None:
        kept: dict[str, PTVector] = {}
        if children:
            for key in sorted(children):
                child = children[key]
                if not isinstance(child, PTVector):
                    raise TypeError(f"child {key!r} is not a PTVector")
                check_token(key)
                if not child.is_zero():
                    kept[key] = child
        self._scalar = float(scalar) + 0.0  # normalizes -0.0
        self._children = kept
        self._sample = sample
        self._hash: int | None = None

    @property
    def scalar(self) -> float:
        return self._scalar

    @property
    def children(self) -> Mapping[str, PTVector]:
        return MappingProxyType(self._children)

    @property
    def sample(self) -> SignedSample | None:
        return self._sample

    def is_zero(self) -> bool:
        return self._scalar == 0.0 and not self._children and self._sample is None

    def is_leaf(self) -> bool:
        return not self._children

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PTVector):
            return NotImplemented
        return (
            self._scalar == other._scalar
            and self._sample == other._sample
            and self._children == other._children
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._scalar, self._sample, tuple(self._children.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"PTVector({dumps(self)})"

    def __add__(self, other: PTVector) -> PTVector:
        if not isinstance(other, PTVector):
            return NotImplemented
        return linear_combination([(1.0, self), (1.0, other)])

    def __sub__(self, other: PTVector) -> PTVector:
        if not isinstance(other, PTVector):
            return NotImplemented
        return linear_combination([(1.0, self), (-1.0, other)])

    def __neg__(self) -> PTVector:
        return scale(-1.0, self)

    def __mul__(self, alpha: float) -> PTVector:
        if isinstance(alpha, PTVector):
            return NotImplemented
        return scale(alpha, self)

    __rmul__ = __mul__

    def __getitem__(self, token: str) -> PTVector:
        return subtree(self, token)


_ZERO = PTVector()


def zero() -> PTVector:
    return _ZERO


def scalar_vector(x: float) -> PTVector:
    return PTVector(x)


def _from_flat(flat: Mapping[Path, float], depth: int = 0) -> PTVector:
    scalar = 0.0
    groups: dict[str, dict[Path, float]] = {}
    for path, value in flat.items():
        if len(path) == depth:
            scalar = value
        else:
            groups.setdefault(path[depth], {})[path] = value
    children = {key: _from_flat(group, depth + 1) for key, group in groups.items()}
    return PTVector(scalar, children)


def from_terms(
    terms: Iterable[tuple[Sequence[str], float]], epsilon: float = DEFAULT_EPSILON
) -> PTVector:
    """Sum ``(path, coefficient)`` terms; like terms combine, near-zero sums vanish."""
    sums: dict[Path, float] = {}
    for path, value in terms:
        path = tuple(path)
        for token in path:
            check_token(token)
        sums[path] = sums.get(path, 0.0) + float(value)
    kept = {path: value for path, value in sums.items() if abs(value) >= epsilon}
    return _from_flat(kept)


def get_in(v: PTVector, path: Sequence[str]) -> PTVector:
    node = v
    for token in path:
        child = node._children.get(token)
        if child is None:
            return _ZERO
        node = child
    return node


def coefficient(v: PTVector, path: Sequence[str]) -> float:
    """Coefficient of the term ``path``; interior nodes and absent paths give 0."""
    return get_in(v, path)._scalar


def subtree(v: PTVector, token: str) -> PTVector:
    check_token(token)
    return v._children.get(token, _ZERO)


def attach(v: PTVector, token: str, w: PTVector) -> PTVector:
    """Return ``v`` with the subtree under ``token`` replaced by ``w``."""
    check_token(token)
    children = dict(v._children)
    children[token] = w
    return PTVector(v._scalar, children, v._sample)


def with_coefficient(v: PTVector, path: Sequence[str], value: float) -> PTVector:
    """Return ``v`` with the coefficient at ``path`` set to ``value``."""
    if not path:
        return PTVector(value, v._children, v._sample)
    head, rest = path[0], path[1:]
    return attach(v, head, with_coefficient(subtree(v, head), rest, value))


def terms(v: PTVector) -> Iterator[tuple[Path, float]]:
    """Yield ``(path, coefficient)`` for every nonzero coefficient, in path order."""
    stack: list[tuple[Path, PTVector]] = [((), v)]
    while stack:
        path, node = stack.pop()
        if node._scalar != 0.0:
            yield path, node._scalar
        for key in reversed(node._children):
            stack.append((path + (key,), node._children[key]))


def nodes(v: PTVector) -> Iterator[tuple[Path, PTVector]]:
    """Yield every present leaf ``(path, node)``: nonzero scalar or a sample."""
    stack: list[tuple[Path, PTVector]] = [((), v)]
    while stack:
        path, node = stack.pop()
        if node._scalar != 0.0 or node._sample is not None:
            yield path, node
        for key in reversed(node._children):
            stack.append((path + (key,), node._children[key]))


def max_rank(v: PTVector) -> Optional[int]:
    """Length of the longest path with a nonzero coefficient; ``None`` for zero."""
    best: int | None = None
    for path, _ in nodes(v):
        if best is None or len(path) > best:
            best = len(path)
    return best


SampleRule = Callable[[list[tuple[float, Optional[SignedSample]]]], Optional[SignedSample]]


def _combine(
    alphas: Sequence[float],
    present: list[tuple[int, PTVector]],
    epsilon: float,
    sample_rule: SampleRule | None,
) -> PTVector:
    # present: (index into alphas, input subtree) for inputs that have this node
    scalar = 0.0
    keys: set[str] = set()
    has_sample = False
    for i, v in present:
        scalar += alphas[i] * v._scalar
        keys.update(v._children)
        if v._sample is not None:
            has_sample = True
    if abs(scalar) < epsilon:
        scalar = 0.0

    sample = None
    if sample_rule is not None and has_sample:
        slots: list[SignedSample | None] = [None] * len(alphas)
        for i, v in present:
            slots[i] = v._sample
        sample = sample_rule(list(zip(alphas, slots)))

    children: dict[str, PTVector] = {}
    for key in sorted(keys):
        sub = [(i, c) for i, v in present if (c := v._children.get(key)) is not None]
        child = _combine(alphas, sub, epsilon, sample_rule)
        if not child.is_zero():
            children[key] = child
    return PTVector(scalar, children, sample)


def linear_combination(
    pairs: Iterable[tuple[float, PTVector]],
    epsilon: float = DEFAULT_EPSILON,
    sample_rule: SampleRule | None = None,
) -> PTVector:
    """Compute ``sum(alpha_i * v_i)`` over the given ``(alpha, v)`` pairs.

    Coefficients whose magnitude ends below ``epsilon`` are dropped. Samples are
    discarded unless ``sample_rule`` is given; it is then called once per path
    that carries a sample in some input, with the full list of
    ``(alpha, sample-or-None)`` pairs for that path (inputs lacking the path
    contribute ``None``).
    """
    pairs = list(pairs)
    alphas = [float(a) for a, _ in pairs]
    present = [
        (i, v) for i, (_, v) in enumerate(pairs) if alphas[i] != 0.0 and not v.is_zero()
    ]
    if not present:
        return _ZERO
    return _combine(alphas, present, epsilon, sample_rule)


def add(u: PTVector, v: PTVector, epsilon: float = DEFAULT_EPSILON) -> PTVector:
    return linear_combination([(1.0, u), (1.0, v)], epsilon)


def scale(alpha: float, v: PTVector, epsilon: float = DEFAULT_EPSILON) -> PTVector:
    return linear_combination([(alpha, v)], epsilon)


def prune(v: PTVector, epsilon: float = DEFAULT_EPSILON) -> PTVector:
    """Drop coefficients smaller than ``epsilon`` in magnitude, recursively."""
    scalar = v._scalar if abs(v._scalar) >= epsilon else 0.0
    children = {key: prune(child, epsilon) for key, child in v._children.items()}
    return PTVector(scalar, children, v._sample)


def map_coefficients(fn: Callable[[float], float], v: PTVector) -> PTVector:
    """Apply ``fn`` to every stored coefficient. Absent paths are left at zero."""
    scalar = fn(v._scalar) if v._scalar != 0.0 else 0.0
    children = {key: map_coefficients(fn, child) for key, child in v._children.items()}
    return PTVector(scalar, children)


# -- serialization ---------------------------------------------------------


def to_json(v: PTVector, _top: bool = True) -> Any:
    """Nested-map form: scalar under ``":number"``, bare numbers for plain leaves."""
    if not _top and not v._children and v._sample is None:
        return v._scalar
    out: dict[str, Any] = {}
    if v._scalar != 0.0:
        out[NUMBER] = v._scalar
    if v._sample is not None:
        out[SAMPLE] = {"point": v._sample.point, "sign": v._sample.sign}
    for key, child in v._children.items():
        out[key] = to_json(child, False)
    return out


def dumps(v: PTVector, **kwargs: Any) -> str:
    kwargs.setdefault("sort_keys", True)
    kwargs.setdefault("ensure_ascii", False)
    return json.dumps(to_json(v), **kwargs)


def _number(value: Any, where: Path) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {type(value).__name__}", where)
    return float(value)


def _sample(value: Any, where: Path) -> SignedSample:
    if not isinstance(value, Mapping) or set(value) != {"point", "sign"}:
        raise ParseError('sample must be an object with keys "point" and "sign"', where)
    try:
        return SignedSample(value["point"], value["sign"])
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), where) from None


def from_json(obj: Any, _where: Path = ()) -> PTVector:
    """Inverse of :func:`to_json`; raises :class:`ParseError` naming the bad key path."""
    if not isinstance(obj, Mapping):
        return PTVector(_number(obj, _where))
    scalar = 0.0
    sample = None
    children: dict[str, PTVector] = {}
    for key, value in obj.items():
        if key == NUMBER:
            scalar = _number(value, _where + (key,))
        elif key == SAMPLE:
            sample = _sample(value, _where + (key,))
        else:
            try:
                check_token(key)
            except TokenError as exc:
                raise ParseError(str(exc), _where + (str(key),)) from None
            children[key] = from_json(value, _where + (key,))
    return PTVector(scalar, children, sample)


def loads(text: str) -> PTVector:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return from_json(obj)

"""Network definition files.

A network file is a JSON object::

    {
      "registry": ["add", "const:U", ...],
      "constants": {"U": <vector>},                 # values of const:<name> types
      "matrix": <depth-6 vector>,
      "init_outputs": {"<type>/<neuron>": <vector>},
      "feeds": {"<type>/<neuron>": [<vector>, ...]}, # output at t = 0, 1, ...
      "self": "add/Self/single" | null,
      "seed": <int>
    }

Only ``registry`` and ``matrix`` are required. Vectors use the nested-map
format of :mod:`dmm.vspace`.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from pathlib import Path
from typing import Any

from .activations import registry_from_names
from .engine import EngineState, NeuronAddress, NeuronKey, make_state, validate_matrix
from .errors import (
    MatrixDepthError,
    NetworkFileError,
    ParseError,
    UnknownNeuronTypeError,
)
from .vspace import DEFAULT_EPSILON, PTVector, from_json, terms, to_json

REQUIRED = ("registry", "matrix")
OPTIONAL = ("constants", "init_outputs", "feeds", "self", "seed")


def _vector(obj: Any, key: str) -> PTVector:
    try:
        return from_json(obj)
    except ParseError as exc:
        raise NetworkFileError(f"{key}: {exc}") from None


def _neuron_key(text: Any, where: str) -> NeuronKey:
    parts = text.split("/") if isinstance(text, str) else []
    if len(parts) != 2 or not all(parts):
        raise NetworkFileError(f"{where}: key {text!r} is not of the form type/neuron")
    return parts[0], parts[1]


def network_from_json(
    doc: Any, seed: int | None = None, epsilon: float = DEFAULT_EPSILON
) -> EngineState:
    """Validate a parsed network document and build its time-0 state.

    ``seed`` overrides the document's own seed. Every failure raises
    :class:`NetworkFileError` with a message naming the offending key or path.
    """
    if not isinstance(doc, Mapping):
        raise NetworkFileError("network file must contain a JSON object")
    for key in REQUIRED:
        if key not in doc:
            raise NetworkFileError(f"missing required key {key!r}")
    for key in doc:
        if key not in REQUIRED + OPTIONAL:
            raise NetworkFileError(f"unknown key {key!r}")

    names = doc["registry"]
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise NetworkFileError("registry: expected a list of type names")
    raw_constants = doc.get("constants", {})
    if not isinstance(raw_constants, Mapping):
        raise NetworkFileError("constants: expected an object")
    constants = {name: _vector(v, f"constants/{name}") for name, v in raw_constants.items()}
    try:
        registry = registry_from_names(names, constants)
    except UnknownNeuronTypeError as exc:
        raise NetworkFileError(f"registry: {exc}") from None

    matrix = _vector(doc["matrix"], "matrix")
    try:
        validate_matrix(matrix)
    except MatrixDepthError as exc:
        raise NetworkFileError(f"matrix: {exc}") from None
    for path, _ in terms(matrix):
        for type_name in (path[0], path[3]):
            if type_name not in registry:
                raise NetworkFileError(
                    f"matrix: path {'/'.join(path)} uses type {type_name!r} "
                    "missing from the registry"
                )

    outputs: dict[NeuronKey, PTVector] = {}
    raw_outputs = doc.get("init_outputs", {})
    if not isinstance(raw_outputs, Mapping):
        raise NetworkFileError("init_outputs: expected an object")
    for key, value in raw_outputs.items():
        nk = _neuron_key(key, "init_outputs")
        if nk[0] not in registry:
            raise NetworkFileError(f"init_outputs/{key}: type {nk[0]!r} missing from the registry")
        outputs[nk] = _vector(value, f"init_outputs/{key}")

    feeds: dict[NeuronKey, tuple[PTVector, ...]] = {}
    raw_feeds = doc.get("feeds", {})
    if not isinstance(raw_feeds, Mapping):
        raise NetworkFileError("feeds: expected an object")
    for key, values in raw_feeds.items():
        nk = _neuron_key(key, "feeds")
        if not isinstance(values, list):
            raise NetworkFileError(f"feeds/{key}: expected a list of vectors")
        feeds[nk] = tuple(_vector(v, f"feeds/{key}/{t}") for t, v in enumerate(values))

    self_address = None
    raw_self = doc.get("self")
    if raw_self is not None:
        try:
            self_address = NeuronAddress.parse(raw_self) if isinstance(raw_self, str) else None
        except ValueError as exc:
            raise NetworkFileError(f"self: {exc}") from None
        if self_address is None:
            raise NetworkFileError("self: expected a type/neuron/port string or null")
        if self_address.type_name not in registry:
            raise NetworkFileError(f"self: type {self_address.type_name!r} missing from the registry")

    file_seed = doc.get("seed", 0)
    if isinstance(file_seed, bool) or not isinstance(file_seed, int):
        raise NetworkFileError("seed: expected an integer")
    return make_state(
        matrix,
        registry,
        outputs,
        self_address=self_address,
        feeds=feeds,
        seed=file_seed if seed is None else seed,
        epsilon=epsilon,
    )


def load_network(
    path: str | Path, seed: int | None = None, epsilon: float = DEFAULT_EPSILON
) -> EngineState:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise NetworkFileError(f"invalid JSON: {exc}") from None
    return network_from_json(doc, seed=seed, epsilon=epsilon)


def network_to_json(state: EngineState, seed: int = 0) -> dict[str, Any]:
    """Document describing ``state`` as a time-0 network.

    Feeds must be sequences; callable feeds cannot be written out.
    """
    feeds = {}
    for (f, n), feed in sorted(state.feeds.items()):
        if callable(feed):
            raise ValueError(f"feed {f}/{n} is a callable and cannot be serialized")
        feeds[f"{f}/{n}"] = [to_json(v) for v in feed]
    fed = set(state.feeds)
    doc: dict[str, Any] = {
        "registry": sorted(state.registry),
        "matrix": to_json(state.matrix),
        "init_outputs": {
            f"{f}/{n}": to_json(v)
            for (f, n), v in sorted(state.outputs.items())
            if (f, n) not in fed and v
        },
        "self": str(state.self_address) if state.self_address else None,
        "seed": seed,
    }
    constants = state.registry.constants()
    if constants:
        doc["constants"] = {name: to_json(c) for name, c in sorted(constants.items())}
    if feeds:
        doc["feeds"] = feeds
    return doc


def dump_network(state: EngineState, seed: int = 0) -> str:
    return json.dumps(network_to_json(state, seed), sort_keys=True, indent=2, ensure_ascii=False)


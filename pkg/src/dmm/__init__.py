"""Dataflow matrix machines over streams of prefix-tree vectors."""

from .activations import NeuronType, NeuronTypeRegistry, default_registry
from .engine import (
    EngineState,
    NeuronAddress,
    build_rnn,
    down_movement,
    make_state,
    run,
    set_weight,
    step,
    up_movement,
)
from .errors import (
    DimensionError,
    DMMError,
    InvariantBrokenError,
    MatrixDepthError,
    NetworkFileError,
    ParseError,
    ReservedTokenError,
    UnknownNeuronTypeError,
)
from .vspace import PTVector, SignedSample, from_terms, linear_combination, zero

__version__ = "0.1.0"

"""Moment-matrix criteria for nonclassicality and NPT entanglement of bosonic states."""

from .algebra import PolyOperator, Word, commutator, normal_product
from .errors import (
    CutoffError,
    GridLookupError,
    MomentCritError,
    NumericalInconsistencyError,
    SpecError,
    TruncationError,
)
from .fock import (
    CoherentMixtureSpec,
    FockState,
    ModeShape,
    MomentCache,
    make_coherent,
    make_fock,
    make_sq_vac,
    make_thermal,
    make_tmsv,
    mix,
    tensor,
)
from .moments import MomentMatrix, OperatorSet, build_gamma, build_normal, build_plain, positivity

__version__ = "0.1.0"

__all__ = [
    "CoherentMixtureSpec", "CutoffError", "FockState", "GridLookupError", "ModeShape", "MomentCache",
    "MomentCritError", "MomentMatrix", "NumericalInconsistencyError", "OperatorSet", "PolyOperator",
    "SpecError", "TruncationError", "Word", "__version__", "build_gamma", "build_normal", "build_plain",
    "commutator", "make_coherent", "make_fock", "make_sq_vac", "make_thermal", "make_tmsv", "mix",
    "normal_product", "positivity", "tensor",
]

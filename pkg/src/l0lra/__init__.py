"""Exact-arithmetic toolkit for low-rank approximation under entry-count error."""
from .additive import Solution, run_additive
from .core import FactorPair, RationalMatrix, Subspace, l0_error, parse, plant, rank, serialize
from .errors import (BudgetExhausted, CertificateError, DimensionError, IdentifiedNo, L0LRAError,
                     ParameterError, ParseError, ScaleError)
from .estimator import L0LowRank
from .hardness import SetCoverInstance, certify_yes, reduce, soundness_probe
from .layers import decompose
from .oracle import exact_rank1, min_over_patterns
from .ptas import ParamSet, run_ptas
from .voting import vote

__version__ = "0.1.0"

__all__ = [
    "BudgetExhausted", "CertificateError", "DimensionError", "FactorPair", "IdentifiedNo",
    "L0LRAError", "L0LowRank", "ParamSet", "ParameterError", "ParseError", "RationalMatrix",
    "ScaleError", "SetCoverInstance", "Solution", "Subspace", "certify_yes", "decompose",
    "exact_rank1", "l0_error", "min_over_patterns", "parse", "plant", "rank", "reduce",
    "run_additive", "run_ptas", "serialize", "soundness_probe", "vote",
]

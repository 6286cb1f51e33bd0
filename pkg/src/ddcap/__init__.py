"""Capacity of doubly-dispersive Gaussian channels: eigenvalue and symbol
water-filling with numerical checks of the trace asymptotics behind them."""

from .errors import (ContractError, DDCapError, DomainError, InfeasibleError, NumericError,
                     RangeError, ResolutionError, ResourceError, ValidationError)
from .symbol import Symbol, SymbolTable, envelope, eval_kernel, eval_symbol, ideal_band
from .discretization import GridSpec, OperatorMatrix, Spectrum, build_operator, eigen_spectrum
from .waterfill import WaterfillResult, waterfill_eigen, waterfill_symbol

__all__ = [
    "ContractError", "DDCapError", "DomainError", "InfeasibleError", "NumericError",
    "RangeError", "ResolutionError", "ResourceError", "ValidationError",
    "Symbol", "SymbolTable", "envelope", "eval_kernel", "eval_symbol", "ideal_band",
    "GridSpec", "OperatorMatrix", "Spectrum", "build_operator", "eigen_spectrum",
    "WaterfillResult", "waterfill_eigen", "waterfill_symbol",
]

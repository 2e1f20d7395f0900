"""Staircase-circuit compilation of spin-chain quench dynamics.

Short-time evolution of the transverse-field Ising chain is compressed
into fixed-depth staircase circuits by sweep optimization against MPS
(state) and MPO (propagator) targets; long times are reached by chaining
the compiled blocks, and a global depolarizing model scores the result
against pure tensor-network simulation.
"""

__version__ = "0.1.0"

from .errors import (CapabilityError, CircuitFormatError, NumericError,
                     ShapeError, ValidationError)

__all__ = [
    "CapabilityError",
    "CircuitFormatError",
    "NumericError",
    "ShapeError",
    "ValidationError",
    "__version__",
]

"""Quantum kicked top: symmetric-state correlations and their periodicities."""

__version__ = "0.1.0"

from .spinalg import ContractError, DickeVector, NumericalError, SpinQuantum, coherent_state
from .dynamics import FloquetParams, RationalKick, build_floquet, evolve
from .measures import CorrelationReport, report

__all__ = [
    "ContractError",
    "CorrelationReport",
    "DickeVector",
    "FloquetParams",
    "NumericalError",
    "RationalKick",
    "SpinQuantum",
    "build_floquet",
    "coherent_state",
    "evolve",
    "report",
]

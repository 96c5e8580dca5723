"""Spectral measures of Jacobi matrices with unbounded recurrence coefficients."""
from .coeffs import CoefficientSequence, check_hypotheses, epsilon, epsilon_tail, frozen, preset
from .kernels import BACKEND

__all__ = [
    "BACKEND",
    "CoefficientSequence",
    "check_hypotheses",
    "epsilon",
    "epsilon_tail",
    "frozen",
    "preset",
]
__version__ = "0.1.0"

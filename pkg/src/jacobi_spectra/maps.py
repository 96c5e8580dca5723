"""Exterior map rho(z) = z + sqrt(z^2 - 1) and the per-index transfer scalars."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .coeffs import CoefficientSequence

__all__ = ["rho", "rho_array", "TransferPair", "transfer", "band_argument"]


def _upper(z: complex, boundary: bool) -> complex:
    z = complex(z)
    if boundary:
        # x + i0+: a signed zero would otherwise pick the lower branch
        return complex(z.real, 0.0) if z.imag == 0.0 else z
    return z


def rho(z, boundary: bool = False) -> complex:
    """Exterior conformal map of C \\ [-1, 1] onto |w| > 1, with rho(z)/z -> 2.

    The square root is realised as sqrt(z - 1) * sqrt(z + 1) with principal
    roots, which is analytic off [-1, 1]. With ``boundary`` set, real ``z`` is
    read as ``z + i0+`` (so rho(x) = x + i sqrt(1 - x^2) on (-1, 1)).
    """
    z = _upper(z, boundary)
    return z + cmath.sqrt(z - 1.0) * cmath.sqrt(z + 1.0)


def rho_array(z: np.ndarray, boundary: bool = False) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if boundary:
        z = np.where(z.imag == 0.0, z.real + 0.0j, z)
    return z + np.sqrt(z - 1.0) * np.sqrt(z + 1.0)


def band_argument(seq: CoefficientSequence, n: int, x) -> complex:
    """(x - b_n) / (2 sqrt(a_n a_{n+1})); x lies in band n iff this is in [-1, 1]."""
    return (x - seq.b(n)) / (2.0 * math.sqrt(seq.a(n) * seq.a(n + 1)))


@dataclass(frozen=True)
class TransferPair:
    t1: complex
    t2: complex
    t1_tilde: complex
    arg_t1: float
    index: int


def transfer(seq: CoefficientSequence, n: int, x, boundary: bool = False) -> TransferPair:
    """t1 = sqrt(a_n/a_{n+1}) rho(u), t2 = (a_n/a_{n+1}) / t1 at index ``n``.

    For n in {-1, 0} both scalars are 1 by convention.
    """
    if n < -1:
        raise ValueError("transfer index must be >= -1")
    if n <= 0:
        return TransferPair(1.0 + 0j, 1.0 + 0j, 1.0 + 0j, 0.0, n)
    an, an1 = seq.a(n), seq.a(n + 1)
    x = _upper(x, boundary)
    t1_tilde = rho((x - seq.b(n)) / (2.0 * math.sqrt(an * an1)), boundary=boundary)
    t1 = math.sqrt(an / an1) * t1_tilde
    t2 = (an / an1) / t1
    return TransferPair(t1, t2, t1_tilde, cmath.phase(t1), n)

"""Orthogonal polynomial bases keyed by input distribution.

Hermite polynomials follow the probabilists' convention (He_n, orthogonal
under the standard normal density, ||He_n||^2 = n!).  Legendre polynomials
are orthogonal under the uniform probability measure on [-1, 1], so
||P_n||^2 = 1/(2n+1).  Both families satisfy P_0 = 1 with unit norm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import UnsupportedDistribution

__all__ = [
    "OrthoPolyFamily",
    "hermite_eval",
    "legendre_eval",
    "hermite_vander",
    "legendre_vander",
    "norm_sq",
    "basis_for",
    "HERMITE",
    "LEGENDRE",
]


def hermite_vander(x, N: int) -> np.ndarray:
    """Columns He_0(x) .. He_N(x) via He_{k+1} = x He_k - k He_{k-1}."""
    x = np.asarray(x, dtype=float)
    V = np.empty(x.shape + (N + 1,))
    V[..., 0] = 1.0
    if N >= 1:
        V[..., 1] = x
    for k in range(1, N):
        V[..., k + 1] = x * V[..., k] - k * V[..., k - 1]
    return V


def legendre_vander(x, N: int) -> np.ndarray:
    """Columns P_0(x) .. P_N(x) via (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}."""
    x = np.asarray(x, dtype=float)
    V = np.empty(x.shape + (N + 1,))
    V[..., 0] = 1.0
    if N >= 1:
        V[..., 1] = x
    for k in range(1, N):
        V[..., k + 1] = ((2 * k + 1) * x * V[..., k] - k * V[..., k - 1]) / (k + 1)
    return V


def hermite_eval(n: int, x):
    if n < 0:
        raise ValueError("degree must be >= 0")
    v = hermite_vander(x, n)[..., n]
    return v if np.ndim(v) else float(v)


def legendre_eval(n: int, x):
    if n < 0:
        raise ValueError("degree must be >= 0")
    v = legendre_vander(x, n)[..., n]
    return v if np.ndim(v) else float(v)


@dataclass(frozen=True)
class OrthoPolyFamily:
    name: str
    weight: str
    support: tuple[float, float]
    vander: Callable[[np.ndarray, int], np.ndarray]
    _norm_sq: Callable[[int], float]

    def eval(self, n: int, x):
        if n < 0:
            raise ValueError("degree must be >= 0")
        v = self.vander(x, n)[..., n]
        return v if np.ndim(v) else float(v)

    def norm_sq(self, n: int) -> float:
        if n < 0:
            raise ValueError("degree must be >= 0")
        return self._norm_sq(n)

    def series(self, coeffs, x):
        coeffs = np.asarray(coeffs, dtype=float)
        return self.vander(x, len(coeffs) - 1) @ coeffs


HERMITE = OrthoPolyFamily(
    "hermite", "gaussian", (-math.inf, math.inf), hermite_vander, lambda n: float(math.factorial(n))
)
LEGENDRE = OrthoPolyFamily(
    "legendre", "uniform", (-1.0, 1.0), legendre_vander, lambda n: 1.0 / (2 * n + 1)
)


def norm_sq(family: OrthoPolyFamily, n: int) -> float:
    return family.norm_sq(n)


_REGISTRY = {"gaussian": HERMITE, "normal": HERMITE, "uniform": LEGENDRE}
# remaining rows of the Askey correspondence; names only
_KNOWN_UNSUPPORTED = {
    "gamma": "laguerre",
    "beta": "jacobi",
    "poisson": "charlier",
    "binomial": "krawtchouk",
    "negative_binomial": "meixner",
    "hypergeometric": "hahn",
}


def basis_for(distribution: str) -> OrthoPolyFamily:
    key = distribution.strip().lower().replace(" ", "_").replace("-", "_")
    if key in _REGISTRY:
        return _REGISTRY[key]
    if key in _KNOWN_UNSUPPORTED:
        raise UnsupportedDistribution(
            f"{distribution}: {_KNOWN_UNSUPPORTED[key].capitalize()} basis is not implemented"
        )
    raise UnsupportedDistribution(f"unknown distribution {distribution!r}")

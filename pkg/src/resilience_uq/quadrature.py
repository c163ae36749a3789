"""Gauss rules for uniform hypercubes and the standard normal measure."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.polynomial.legendre import leggauss

from .errors import DimensionTooLarge, NonFiniteValue

__all__ = [
    "TensorGridRule",
    "GaussHermiteRule",
    "tensor_gauss_legendre",
    "integrate_mean",
    "gauss_hermite",
    "NODE_BUDGET",
]

NODE_BUDGET = 10**7


@dataclass(frozen=True)
class TensorGridRule:
    """Tensor Gauss-Legendre rule on the box ``prod_i [lower_i, upper_i]``.

    ``nodes`` has shape (points_per_axis**d, d); weights sum to the box volume.
    """

    d: int
    points_per_axis: int
    nodes: np.ndarray
    weights: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))


@dataclass(frozen=True)
class GaussHermiteRule:
    """Nodes/weights for E[h(Z)], Z ~ N(0, 1); weights sum to one."""

    points: int
    nodes: np.ndarray
    weights: np.ndarray

    def expect(self, h) -> float:
        return float(self.weights @ np.asarray(h(self.nodes), dtype=float))


def tensor_gauss_legendre(d: int, points_per_axis: int, a=-1.0, b=1.0,
                          node_budget: int = NODE_BUDGET) -> TensorGridRule:
    """Tensor-product Gauss-Legendre rule mapped to ``[a, b]^d``.

    ``a`` and ``b`` may also be length-``d`` sequences for a box with
    per-axis bounds.
    """
    if d < 1 or points_per_axis < 1:
        raise ValueError("need d >= 1 and points_per_axis >= 1")
    lower = np.broadcast_to(np.asarray(a, dtype=float), (d,)).copy()
    upper = np.broadcast_to(np.asarray(b, dtype=float), (d,)).copy()
    if np.any(lower >= upper):
        raise ValueError(f"empty box: lower={lower}, upper={upper}")
    total = points_per_axis**d
    if total > node_budget:
        raise DimensionTooLarge(f"{points_per_axis}^{d} = {total} nodes exceeds budget {node_budget}")

    x, w = leggauss(points_per_axis)
    half = 0.5 * (upper - lower)
    mid = 0.5 * (upper + lower)
    grids = np.meshgrid(*([x] * d), indexing="ij")
    unit = np.stack([gr.ravel() for gr in grids], axis=-1)
    wgrids = np.meshgrid(*([w] * d), indexing="ij")
    weights = np.prod(np.stack([gr.ravel() for gr in wgrids], axis=-1), axis=-1) * np.prod(half)
    nodes = mid + half * unit
    return TensorGridRule(d, points_per_axis, nodes, weights, lower, upper)


def integrate_mean(rule: TensorGridRule, h) -> float:
    """Average of ``h`` over the box under the uniform probability measure.

    ``h`` is called once with the full (N, d) node array and must return N values.
    """
    vals = np.asarray(h(rule.nodes), dtype=float)
    vals = np.broadcast_to(vals, rule.weights.shape)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteValue("integrand is not finite at some quadrature node")
    return float(rule.weights @ vals) / rule.volume


def gauss_hermite(points: int) -> GaussHermiteRule:
    if points < 1:
        raise ValueError("need at least one point")
    x, w = hermegauss(points)
    w = w / np.sqrt(2.0 * np.pi)
    return GaussHermiteRule(points, x, w)

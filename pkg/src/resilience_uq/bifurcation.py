"""Saddle-node detection for scalar maps.

The smallest positive critical point ``rho`` of a realisation Xi is found by
scanning a central-difference derivative on a uniform grid and bisecting the
first sign change; ``tau = Xi(rho)`` then decides resilience by its sign.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateShape, NonFiniteValue
from .meanfield import MeanFieldMoments, realize_xi

__all__ = [
    "Status",
    "ResilienceIndicator",
    "GRID_POINTS",
    "TIE_TOL",
    "fd_step",
    "derivative",
    "smallest_positive_root_of_derivative",
    "indicator",
    "tau_of_zeta",
    "tau_many",
]

GRID_POINTS = 512
TIE_TOL = 1e-12
ROOT_RTOL = 1e-10


class Status(str, Enum):
    RESILIENT = "Resilient"
    NON_RESILIENT = "NonResilient"
    DEGENERATE = "Degenerate"


@dataclass(frozen=True)
class ResilienceIndicator:
    rho: float | None
    tau: float | None
    status: Status
    zeta: float | None = None

    @property
    def rho_absent(self) -> bool:
        return self.rho is None


def fd_step(x):
    return 1e-6 * np.maximum(1.0, np.abs(x))


def derivative(h, x, step=None):
    """Central difference ``(h(x+s) - h(x-s)) / 2s``; ``x`` may be an array."""
    x = np.asarray(x, dtype=float)
    s = fd_step(x) if step is None else np.asarray(step, dtype=float)
    d = (np.asarray(h(x + s), dtype=float) - np.asarray(h(x - s), dtype=float)) / (2.0 * s)
    if not np.all(np.isfinite(d)):
        raise NonFiniteValue("derivative is not finite")
    return d if d.ndim else float(d)


def _scan_grid(search_hi, grid_points):
    if not search_hi > 0:
        raise ValueError("search_hi must be positive")
    if grid_points < 16:
        raise ValueError("grid_points must be >= 16")
    return search_hi * np.arange(1, grid_points + 1) / grid_points


def _first_change(d):
    """Index j of the first grid cell (j-1, j] holding a sign change, or -1.

    Returns 0 when the very first grid value is an exact zero.
    """
    s = np.sign(d)
    if s[0] == 0:
        return 0
    hits = np.nonzero((s[1:] == 0) | (s[1:] != s[:-1]))[0]
    return int(hits[0]) + 1 if hits.size else -1


def smallest_positive_root_of_derivative(xi, search_hi: float, grid_points: int = GRID_POINTS):
    """Smallest positive root of ``xi'`` on (0, search_hi], or None.

    ``xi`` must accept numpy arrays.
    """
    xs = _scan_grid(search_hi, grid_points)
    d = derivative(xi, xs)
    j = _first_change(d)
    if j < 0:
        return None
    if d[j] == 0:
        return float(xs[j])
    lo, hi = float(xs[j - 1]), float(xs[j])
    s_lo = np.sign(d[j - 1])
    tol = ROOT_RTOL * search_hi
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        s_mid = np.sign(derivative(xi, mid))
        if s_mid == 0:
            return mid
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def indicator(xi, search_hi: float, grid_points: int = GRID_POINTS) -> ResilienceIndicator:
    zeta = getattr(xi, "zeta", None)
    rho = smallest_positive_root_of_derivative(xi, search_hi, grid_points)
    if rho is None:
        # monotone map: no unhealthy equilibrium can exist
        return ResilienceIndicator(None, None, Status.RESILIENT, zeta)
    tau = float(xi(rho))
    if abs(tau) <= TIE_TOL:
        status = Status.DEGENERATE
    elif tau > 0:
        status = Status.RESILIENT
    else:
        status = Status.NON_RESILIENT
    return ResilienceIndicator(rho, tau, status, zeta)


def tau_of_zeta(mom: MeanFieldMoments, n: int, m: int, zeta: float, search_hi: float,
                grid_points: int = GRID_POINTS) -> float:
    ind = indicator(realize_xi(mom, n, m, zeta), search_hi, grid_points)
    if ind.rho is None:
        raise DegenerateShape(f"no positive critical point of Xi on (0, {search_hi}] at zeta={zeta}")
    return ind.tau


def tau_many(mom: MeanFieldMoments, n: int, m: int, zetas, search_hi: float,
             grid_points: int = GRID_POINTS) -> np.ndarray:
    """Vectorised ``tau_of_zeta``; entries with no critical point are NaN.

    Xi is affine in zeta, so the scan evaluates the moments once on the grid
    and reuses them for every draw.
    """
    zetas = np.atleast_1d(np.asarray(zetas, dtype=float))
    xs = _scan_grid(search_hi, grid_points)

    def dparts(x):
        h = fd_step(x)
        cp, sp = mom.center_and_slope(x + h, n, m)
        cm, sm = mom.center_and_slope(x - h, n, m)
        return (cp - cm) / (2 * h), (sp - sm) / (2 * h)

    dc, ds = dparts(xs)
    D = dc[None, :] + ds[None, :] * zetas[:, None]
    if not np.all(np.isfinite(D)):
        raise NonFiniteValue("derivative of Xi is not finite on the scan grid")

    out = np.full(zetas.shape, np.nan)
    lo = np.empty_like(zetas)
    hi = np.empty_like(zetas)
    s_lo = np.empty_like(zetas)
    active = np.zeros(zetas.shape, dtype=bool)
    rho = np.full(zetas.shape, np.nan)
    for i in range(zetas.size):
        j = _first_change(D[i])
        if j < 0:
            continue
        if D[i, j] == 0:
            rho[i] = xs[j]
            continue
        lo[i], hi[i], s_lo[i] = xs[j - 1], xs[j], np.sign(D[i, j - 1])
        active[i] = True

    tol = ROOT_RTOL * search_hi
    while active.any():
        idx = np.nonzero(active)[0]
        mid = 0.5 * (lo[idx] + hi[idx])
        a, b = dparts(mid)
        s_mid = np.sign(a + b * zetas[idx])
        exact = s_mid == 0
        rho[idx[exact]] = mid[exact]
        active[idx[exact]] = False
        same = (s_mid == s_lo[idx]) & ~exact
        lo[idx[same]] = mid[same]
        diff = (s_mid != s_lo[idx]) & ~exact
        hi[idx[diff]] = mid[diff]
        done = active & (hi - lo < tol)
        rho[done] = 0.5 * (lo[done] + hi[done])
        active &= ~done

    found = np.isfinite(rho)
    if found.any():
        c, s = mom.center_and_slope(rho[found], n, m)
        out[found] = c + s * zetas[found]
    return out

"""One-dimensional polynomial chaos surrogates fitted by least squares.

A surrogate ``tau_N(zeta) = sum_n a_n P_n(zeta)`` is fitted to point
evaluations of ``tau`` at random draws of ``zeta``.  The downstream
statistics are the probability that the surrogate is positive (computed
exactly from its real roots) and histogram PDF / empirical CDF curves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import ndtr

from .errors import DegenerateShape, NoConvergence, RankDeficient
from .orthopoly import HERMITE, OrthoPolyFamily
from .quadrature import GaussHermiteRule

__all__ = [
    "FitMeta",
    "PceModel",
    "ResilienceEstimate",
    "TauCache",
    "default_samples",
    "draw_zetas",
    "fit_from_samples",
    "fit_pce",
    "evaluate_pce",
    "truncation_gap",
    "fit_adaptive",
    "pos",
    "resilience_probability",
    "surrogate_cdf",
    "tau_distribution",
    "empirical_cdf_sup_distance",
    "bootstrap_probability_stderr",
]

ROOT_WINDOW = 8.0
ROOT_GRID = 4001


@dataclass(frozen=True)
class FitMeta:
    samples: int
    residual_rms: float
    seed: int | None
    excluded: int = 0


@dataclass(frozen=True)
class PceModel:
    family: OrthoPolyFamily
    order: int
    coeffs: np.ndarray
    fit_meta: FitMeta | None = None

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).copy()
        if c.shape != (self.order + 1,):
            raise ValueError(f"need {self.order + 1} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __call__(self, zeta):
        return evaluate_pce(self, zeta)


@dataclass(frozen=True)
class ResilienceEstimate:
    probability: float
    pdf_curve: np.ndarray
    cdf_curve: np.ndarray
    order: int
    degenerate_fraction: float
    seed: int
    probability_stderr: float = 0.0
    extra: dict = field(default_factory=dict)


def default_samples(order: int) -> int:
    return max(10 * (order + 1), 100)


def draw_zetas(family: OrthoPolyFamily, size: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    if family.weight == "gaussian":
        return rng.standard_normal(size)
    lo, hi = family.support
    return rng.uniform(lo, hi, size)


class TauCache:
    """Memoises ``tau`` by zeta value so several fits can share evaluations.

    ``tau`` maps an array of zetas to an array of values (NaN marks a draw
    where tau is undefined).  With ``vectorized=False`` it is called one
    zeta at a time and DegenerateShape is mapped to NaN.
    """

    def __init__(self, tau: Callable, vectorized: bool = True):
        self.tau = tau
        self.vectorized = vectorized
        self._store: dict[float, float] = {}

    def __len__(self):
        return len(self._store)

    def __call__(self, zetas):
        zetas = np.atleast_1d(np.asarray(zetas, dtype=float))
        missing = np.array(sorted({z for z in zetas.tolist() if z not in self._store}))
        if missing.size:
            vals = _call_tau(self.tau, missing, self.vectorized)
            self._store.update(zip(missing.tolist(), vals.tolist()))
        return np.array([self._store[z] for z in zetas.tolist()])


def _call_tau(tau, zetas, vectorized):
    if isinstance(tau, TauCache):
        return tau(zetas)
    if vectorized:
        vals = np.asarray(tau(zetas), dtype=float)
        return np.broadcast_to(vals, zetas.shape).copy()
    out = np.empty(zetas.shape)
    for i, z in enumerate(zetas):
        try:
            out[i] = float(tau(float(z)))
        except DegenerateShape:
            out[i] = np.nan
    return out


def fit_from_samples(zetas, taus, family: OrthoPolyFamily = HERMITE, order: int = 3,
                     seed=None) -> PceModel:
    """Least-squares coefficients from paired samples; NaN taus are excluded."""
    zetas = np.asarray(zetas, dtype=float)
    taus = np.asarray(taus, dtype=float)
    ok = np.isfinite(taus)
    z, t = zetas[ok], taus[ok]
    if z.size <= order:
        raise RankDeficient(f"{z.size} usable samples cannot determine {order + 1} coefficients")
    V = family.vander(z, order)
    coeffs, _, rank, _ = np.linalg.lstsq(V, t, rcond=None)
    if rank < order + 1:
        raise RankDeficient(f"design matrix rank {rank} < {order + 1}")
    resid = t - V @ coeffs
    rms = float(np.sqrt(np.mean(resid**2)))
    meta = FitMeta(int(z.size), rms, seed, int((~ok).sum()))
    return PceModel(family, order, coeffs, meta)


def fit_pce(tau, family: OrthoPolyFamily = HERMITE, order: int = 3, samples: int | None = None,
            seed: int = 0, vectorized: bool = True) -> PceModel:
    M = default_samples(order) if samples is None else int(samples)
    if M <= order:
        raise ValueError(f"need more samples than the order ({M} <= {order})")
    zetas = draw_zetas(family, M, seed)
    taus = _call_tau(tau, zetas, vectorized)
    return fit_from_samples(zetas, taus, family, order, seed)


def evaluate_pce(model: PceModel, zeta):
    v = model.family.series(model.coeffs, zeta)
    return v if np.ndim(v) else float(v)


def truncation_gap(model: PceModel, quantile_range=None, points: int = 1001) -> float:
    """max |a_N P_N(zeta)| over a uniform grid on ``quantile_range``."""
    if quantile_range is None:
        quantile_range = (-4.0, 4.0) if model.family.weight == "gaussian" else model.family.support
    aN = model.coeffs[-1]
    if aN == 0:
        return 0.0
    z = np.linspace(quantile_range[0], quantile_range[1], points)
    return float(np.max(np.abs(aN * model.family.eval(model.order, z))))


def fit_adaptive(tau, family: OrthoPolyFamily = HERMITE, precision: float = 1e-7, max_order: int = 8,
                 samples_per_order: Callable[[int], int] = default_samples, seed: int = 0,
                 vectorized: bool = True, start_order: int = 2) -> PceModel:
    """Raise the order from ``start_order`` until the last term is below ``precision``."""
    if max_order < start_order:
        raise ValueError(f"max_order must be >= {start_order}")
    cached = tau if isinstance(tau, TauCache) else TauCache(tau, vectorized)
    gap = None
    for N in range(start_order, max_order + 1):
        model = fit_pce(cached, family, N, samples_per_order(N), seed)
        gap = truncation_gap(model)
        if gap < precision:
            return model
    raise NoConvergence(max_order, gap)


def pos(x):
    if np.ndim(x):
        return (np.asarray(x) > 0).astype(int)
    return 1 if x > 0 else 0


def _real_roots(model: PceModel, lo: float, hi: float) -> list[float]:
    z = np.linspace(lo, hi, ROOT_GRID)
    v = model(z)
    roots = []
    for i in range(z.size):
        if v[i] == 0:
            roots.append(float(z[i]))
        elif i + 1 < z.size and v[i] * v[i + 1] < 0:
            a, b, fa = z[i], z[i + 1], v[i]
            for _ in range(200):
                mid = 0.5 * (a + b)
                if mid in (a, b):
                    break
                fm = model(mid)
                if fm == 0:
                    a = b = mid
                    break
                if (fm > 0) == (fa > 0):
                    a, fa = mid, fm
                else:
                    b = mid
            roots.append(0.5 * (a + b))
    return roots


def _measure(family: OrthoPolyFamily, a: float, b: float) -> float:
    if family.weight == "gaussian":
        # right tail via symmetry keeps precision when both ends are large
        if a > 0:
            return float(ndtr(-a) - ndtr(-b))
        return float(ndtr(b) - ndtr(a))
    lo, hi = family.support
    a, b = max(a, lo), min(b, hi)
    return max(b - a, 0.0) / (hi - lo)


def resilience_probability(model: PceModel, rule: GaussHermiteRule | None = None, refine: bool = True,
                           valid=(-math.inf, math.inf)) -> float:
    """P(tau_N(zeta) > 0) under the distribution of zeta.

    With ``refine`` the positivity set is located exactly from the real roots
    of the surrogate; otherwise ``rule`` integrates pos(tau_N) directly.
    Mass outside ``valid`` (draws where tau itself is undefined) counts as
    resilient.
    """
    lo_v, hi_v = valid
    fam = model.family
    if not refine:
        if rule is None or rule.points < 32:
            raise ValueError("quadrature path needs a Gauss-Hermite rule with >= 32 points")
        inside = (rule.nodes > lo_v) & (rule.nodes < hi_v)
        p = float(rule.weights @ np.where(inside, pos(model(rule.nodes)), 1))
        return min(max(p, 0.0), 1.0)

    if fam.weight == "gaussian":
        win_lo, win_hi = -ROOT_WINDOW, ROOT_WINDOW
    else:
        win_lo, win_hi = fam.support
    roots = _real_roots(model, win_lo, win_hi)
    cuts = [win_lo] + roots + [win_hi]
    ends = [-math.inf] + roots + [math.inf]
    total = 0.0
    last = len(cuts) - 2
    for i in range(last + 1):
        a, b = cuts[i], cuts[i + 1]
        if b > a:
            probe = 0.5 * (a + b)
        elif i == 0:
            probe = b - 1.0
        elif i == last:
            probe = a + 1.0
        else:
            continue
        if model(probe) > 0:
            lo, hi = max(ends[i], lo_v), min(ends[i + 1], hi_v)
            if hi > lo:
                total += _measure(fam, lo, hi)
    total += _measure(fam, -math.inf, lo_v) if lo_v > -math.inf else 0.0
    total += _measure(fam, hi_v, math.inf) if hi_v < math.inf else 0.0
    return min(max(total, 0.0), 1.0)


def surrogate_cdf(model: PceModel, t) -> np.ndarray:
    """Exact P(tau_N(zeta) <= t) for each threshold in ``t``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    for i, ti in enumerate(t):
        c = model.coeffs.copy()
        c[0] -= ti
        shifted = PceModel(model.family, model.order, c)
        out[i] = 1.0 - resilience_probability(shifted)
    return out


def tau_distribution(model: PceModel, draws: int = 100_000, bins: int = 100, seed: int = 0):
    """Histogram PDF and empirical CDF of the surrogate under random zeta draws.

    Returns two (bins, 2) arrays: (bin centre, density) and (right bin edge,
    cumulative probability).
    """
    if draws < 10_000:
        raise ValueError("need at least 1e4 draws")
    vals = model(draw_zetas(model.family, draws, seed))
    counts, edges = np.histogram(vals, bins=bins)
    width = np.diff(edges)
    density = counts / (draws * width)
    centres = 0.5 * (edges[:-1] + edges[1:])
    cum = np.cumsum(counts) / draws
    return np.column_stack([centres, density]), np.column_stack([edges[1:], cum])


def empirical_cdf_sup_distance(a, b) -> float:
    """Kolmogorov distance between the empirical CDFs of two samples."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    pts = np.concatenate([a, b])
    Fa = np.searchsorted(a, pts, side="right") / a.size
    Fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(Fa - Fb)))


def bootstrap_probability_stderr(zetas, taus, family: OrthoPolyFamily, order: int,
                                 resamples: int = 200, seed: int = 0, valid=(-math.inf, math.inf)) -> float:
    """Standard deviation of the resilience probability over bootstrap refits."""
    zetas = np.asarray(zetas, dtype=float)
    taus = np.asarray(taus, dtype=float)
    ok = np.isfinite(taus)
    z, t = zetas[ok], taus[ok]
    rng = np.random.default_rng(seed)
    probs = []
    for _ in range(resamples):
        idx = rng.integers(0, z.size, z.size)
        try:
            m = fit_from_samples(z[idx], t[idx], family, order)
        except RankDeficient:
            continue
        probs.append(resilience_probability(m, valid=valid))
    if len(probs) < 2:
        return 0.0
    return float(np.std(probs, ddof=1))

"""Brute-force reference: integrate the full coupled system per parameter draw.

A realisation is called resilient when every probe initial condition
(uniform states, one near zero and one above the carrying capacity) relaxes
to the same equilibrium.  Repeating this over independent draws gives a
Monte Carlo estimate of the resilience probability that uses no mean-field
reduction.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from .bifurcation import Status
from .dynamics import DynamicsModel, RealizedParams, realize_params
from .errors import NonFiniteValue, StiffnessFailure, Unclassifiable
from .graph import WeightedDigraph

__all__ = [
    "TrajectoryResult",
    "OracleEstimate",
    "rhs",
    "integrate_to_equilibrium",
    "default_probes",
    "classify_realization",
    "mc_resilience_probability",
]

log = logging.getLogger(__name__)

# Dormand-Prince 5(4)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
# b5 - b4, last entry multiplies the FSAL stage
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

MIN_STEP = 1e-12
NEGATIVE_WARN = 1e-6
# Newton polish: attempted once max|dx/dt| drops below POLISH_AT
POLISH_AT = 1e-3
POLISH_MAX_SHIFT = 1e-2
POLISH_RETRY_STEPS = 50
EIG_CHECK_MAX_N = 2000


@dataclass(frozen=True)
class TrajectoryResult:
    final_state: np.ndarray
    converged: bool
    steps: int
    t_final: float


@dataclass(frozen=True)
class OracleEstimate:
    p_hat: float
    stderr: float
    trials: int
    resilient: int
    classified: int
    unclassifiable: int


def rhs(model: DynamicsModel, g: WeightedDigraph, realized: RealizedParams, x) -> np.ndarray:
    """Vector field: f(x_i, A_i) + sum over edges j->i of w_ji g(x_i, x_j, B_ji)."""
    x = np.asarray(x, dtype=float)
    out = np.asarray(model.f(x, realized.A.T), dtype=float)
    out = np.broadcast_to(out, x.shape).copy()
    if g.m:
        xi, xj = x[g.dst], x[g.src]
        contrib = realized.weights * model.g(xi, xj, realized.B.T)
        out += np.bincount(g.dst, weights=contrib, minlength=g.n)
    if not np.all(np.isfinite(out)):
        raise NonFiniteValue("vector field is not finite")
    return out


def _jacobian(F, x, fx):
    n = x.size
    J = np.empty((n, n))
    for j in range(n):
        h = 1e-7 * max(1.0, abs(x[j]))
        xp = x.copy()
        xp[j] += h
        J[:, j] = (F(xp) - fx) / h
    return J


def _newton_polish(F, y, fy, tol, max_iter=8):
    """Refine a near-equilibrium state by Newton steps; None unless a nearby stable root is found.

    Explicit steps near the stability limit leave a residual far above
    ``tol``; a local Newton solve certifies the fixed point instead.
    """
    x, fx = y.copy(), fy
    for _ in range(max_iter):
        J = _jacobian(F, x, fx)
        try:
            x = x - np.linalg.solve(J, fx)
        except np.linalg.LinAlgError:
            return None
        if np.max(np.abs(x - y)) > POLISH_MAX_SHIFT or x.min() < 0:
            return None
        fx = F(x)
        if np.max(np.abs(fx)) < tol:
            if x.size <= EIG_CHECK_MAX_N and np.max(np.linalg.eigvals(J).real) >= 0:
                return None
            return x
    return None


def integrate_to_equilibrium(model: DynamicsModel, g: WeightedDigraph, realized: RealizedParams, x0,
                             t_max: float = 500.0, tol: float = 1e-9, rtol: float = 1e-7,
                             atol: float = 1e-9) -> TrajectoryResult:
    """Adaptive Dormand-Prince integration until max |dx/dt| < tol or t_max.

    States are clamped at zero after every accepted step.  Once the flow has
    nearly settled, a local Newton solve (accepted only if it lands on a
    stable equilibrium close to the current state) certifies convergence.
    """
    F = partial(rhs, model, g, realized)
    y = np.maximum(np.asarray(x0, dtype=float), 0.0)
    f = F(y)
    t, steps = 0.0, 0
    if np.max(np.abs(f)) < tol:
        return TrajectoryResult(y, True, 0, 0.0)
    next_polish = 0

    scale = atol + rtol * np.abs(y)
    d0 = np.sqrt(np.mean((y / scale) ** 2))
    d1 = np.sqrt(np.mean((f / scale) ** 2))
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6

    k = [None] * 7
    while t < t_max:
        h = min(h, t_max - t)
        k[0] = f
        for s in range(1, 6):
            ys = y + h * sum(a * k[j] for j, a in enumerate(_A[s]) if a)
            k[s] = F(ys)
        y_new = y + h * sum(b * k[j] for j, b in enumerate(_B) if b)
        k[6] = F(y_new)
        err = h * sum(e * k[j] for j, e in enumerate(_E) if e)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))

        if err_norm <= 1.0:
            t += h
            steps += 1
            low = float(y_new.min())
            if low < 0.0:
                if low < -NEGATIVE_WARN:
                    log.warning("state went negative (%.3e) at t=%.4g before clamping", low, t)
                y_new = np.maximum(y_new, 0.0)
                f = F(y_new)
            else:
                f = k[6]
            y = y_new
            resid = np.max(np.abs(f))
            if resid < tol:
                return TrajectoryResult(y, True, steps, t)
            if resid < POLISH_AT and steps >= next_polish:
                x_eq = _newton_polish(F, y, f, tol)
                if x_eq is not None:
                    return TrajectoryResult(x_eq, True, steps, t)
                next_polish = steps + POLISH_RETRY_STEPS
            fac = 10.0 if err_norm == 0 else min(10.0, 0.9 * err_norm**-0.2)
        else:
            fac = max(0.2, 0.9 * err_norm**-0.2)
        h *= fac
        if h < MIN_STEP:
            raise StiffnessFailure(f"step size {h:.3e} collapsed at t={t:.6g}")
    return TrajectoryResult(y, False, steps, t)


def default_probes(model: DynamicsModel) -> tuple[float, float]:
    if model.capacity is None:
        return (0.01, 10.0)
    K = model.A_params[model.A_names.index(model.capacity)].mean
    return (0.01, 1.2 * K)


def classify_realization(model: DynamicsModel, g: WeightedDigraph, realized: RealizedParams,
                         probes=None, t_max: float = 500.0, tol: float = 1e-9) -> Status:
    """Resilient iff all uniform probe starts reach one attractor.

    Attractors are told apart by their node-mean state (distinct if the
    means differ by more than 10 * tol).
    """
    probes = default_probes(model) if probes is None else tuple(probes)
    if len(probes) < 2:
        raise ValueError("need at least two probes")
    means = []
    for p in probes:
        res = integrate_to_equilibrium(model, g, realized, np.full(g.n, float(p)), t_max, tol)
        if not res.converged:
            raise Unclassifiable(f"probe {p} did not reach equilibrium by t={t_max}")
        means.append(float(res.final_state.mean()))
    spread = max(means) - min(means)
    return Status.NON_RESILIENT if spread > 10 * tol else Status.RESILIENT


def _trial(model, g, probes, t_max, tol, seed):
    realized = realize_params(model, g, seed)
    try:
        return classify_realization(model, g, realized, probes, t_max, tol) is Status.RESILIENT
    except (Unclassifiable, StiffnessFailure) as exc:
        log.info("trial seed %d unclassifiable: %s", seed, exc)
        return None


def mc_resilience_probability(model: DynamicsModel, g: WeightedDigraph, trials: int, probes=None,
                              seed: int = 0, t_max: float = 500.0, tol: float = 1e-9,
                              workers: int = 1) -> OracleEstimate:
    """Fraction of resilient draws over ``trials`` seeds ``seed, seed+1, ...``.

    Unclassifiable trials are counted separately and left out of p_hat.
    """
    if trials < 30:
        raise ValueError("need at least 30 trials")
    job = partial(_trial, model, g, probes, t_max, tol)
    seeds = [seed + i for i in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(job, seeds, chunksize=max(1, trials // (4 * workers))))
    else:
        outcomes = [job(s) for s in seeds]
    classified = [o for o in outcomes if o is not None]
    k = len(classified)
    if k == 0:
        raise Unclassifiable("no trial could be classified")
    res = sum(classified)
    p = res / k
    return OracleEstimate(p, float(np.sqrt(p * (1 - p) / k)), trials, res, k, trials - k)

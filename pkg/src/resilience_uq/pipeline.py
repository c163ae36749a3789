"""End-to-end estimation: config -> model + graph -> moments -> tau -> PCE -> probability."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .bifurcation import tau_many
from .config import GraphConfig, ModelConfig, RunConfig
from .dynamics import MODELS, DynamicsModel, UncertainParam
from .errors import ConfigError
from .graph import WeightedDigraph, generate_random_graph, mean_weight, read_graph, scale_weights
from .meanfield import MeanFieldMoments, compute_moments, moment_rules
from .orthopoly import HERMITE
from .pce import (
    PceModel,
    ResilienceEstimate,
    TauCache,
    bootstrap_probability_stderr,
    default_samples,
    draw_zetas,
    fit_adaptive,
    fit_pce,
    resilience_probability,
    tau_distribution,
)

__all__ = [
    "derive_seeds",
    "build_model",
    "build_graph",
    "MeanFieldTau",
    "mean_field_tau",
    "valid_interval",
    "EstimateRun",
    "run_estimate",
    "apply_sweep_value",
]


def derive_seeds(seed: int) -> dict[str, int]:
    """Independent streams derived from the master seed."""
    return {"fit": seed, "draws": seed + 1, "bootstrap": seed + 2, "oracle": seed + 3}


def build_model(mc: ModelConfig) -> DynamicsModel:
    if mc.name not in MODELS:
        raise ConfigError(f"model.name: unknown model {mc.name!r} (known: {', '.join(sorted(MODELS))})")
    base = MODELS[mc.name]()
    current = dict(zip(base.A_names + base.B_names, base.A_params + base.B_params))
    params, constants = {}, {}
    for name, spec in mc.params.items():
        path = f"model.params.{name}"
        if name in current:
            p = current[name]
            params[name] = UncertainParam(
                p.mean if spec.mean is None else spec.mean,
                p.e if spec.e is None else spec.e,
                p.support if spec.support is None else spec.support,
            )
        elif name in base.constants:
            if spec.e not in (None, 0.0) or spec.support is not None:
                raise ConfigError(f"{path}: {name} is a fixed constant; only 'mean' may be set")
            if spec.mean is not None:
                constants[name] = spec.mean
        else:
            known = ", ".join(list(current) + list(base.constants))
            raise ConfigError(f"{path}: unknown parameter (known: {known})")
    e0 = base.edge_uncertainty
    edge = UncertainParam(
        1.0 if mc.edge.mean is None else mc.edge.mean,
        e0.e if mc.edge.e is None else mc.edge.e,
        e0.support if mc.edge.support is None else mc.edge.support,
    )
    try:
        return MODELS[mc.name](params=params, constants=constants, edge=edge)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"model.params: {exc}") from None


def build_graph(gc: GraphConfig, cfg: RunConfig | None = None) -> WeightedDigraph:
    if gc.file is not None:
        path = cfg.resolve_path(gc.file) if cfg is not None else gc.file
        return read_graph(path)
    gen = gc.generator
    return generate_random_graph(gen.n, gen.p, gen.weight, gen.seed)


class MeanFieldTau:
    """tau(zeta) for a fixed model and graph; accepts arrays, NaN where no critical point exists."""

    def __init__(self, moments: MeanFieldMoments, n: int, m: int, search_hi: float, grid_points: int):
        self.moments = moments
        self.n, self.m = n, m
        self.search_hi = search_hi
        self.grid_points = grid_points

    def __call__(self, zetas):
        return tau_many(self.moments, self.n, self.m, zetas, self.search_hi, self.grid_points)


def mean_field_tau(model: DynamicsModel, g: WeightedDigraph, cfg: RunConfig) -> MeanFieldTau:
    rule_f, rule_g = moment_rules(model, cfg.quadrature.points)
    mom = compute_moments(model, mean_weight(g), rule_f, rule_g)
    hi = cfg.bifurcation.search_hi or model.default_search_hi()
    return MeanFieldTau(mom, g.n, g.m, hi, cfg.bifurcation.grid_points)


def valid_interval(zetas, taus) -> tuple[float, float]:
    """ζ window outside which tau is undefined, from the degenerate tails of a sample.

    Undefined draws below (above) every defined draw push the lower (upper)
    end to the midpoint of the gap.
    """
    zetas = np.asarray(zetas, dtype=float)
    ok = np.isfinite(np.asarray(taus, dtype=float))
    if ok.all() or not ok.any():
        return (-math.inf, math.inf)
    good, bad = zetas[ok], zetas[~ok]
    lo, hi = -math.inf, math.inf
    below = bad[bad < good.min()]
    above = bad[bad > good.max()]
    if below.size:
        lo = 0.5 * (below.max() + good.min())
    if above.size:
        hi = 0.5 * (above.min() + good.max())
    return (float(lo), float(hi))


@dataclass
class EstimateRun:
    estimate: ResilienceEstimate
    pce: PceModel | None
    zetas: np.ndarray
    taus: np.ndarray
    valid: tuple[float, float]
    tau: MeanFieldTau


def _fit(cache: TauCache, cfg: RunConfig, seed: int) -> PceModel:
    pc = cfg.pce
    if pc.order is not None:
        return fit_pce(cache, HERMITE, pc.order, pc.samples, seed)
    per_order = default_samples if pc.samples is None else (lambda N: max(pc.samples, N + 1))
    return fit_adaptive(cache, HERMITE, pc.precision, pc.max_order, per_order, seed)


def run_estimate(model: DynamicsModel, g: WeightedDigraph, cfg: RunConfig, seed: int | None = None,
                 bootstrap: int | None = None, cache: TauCache | None = None) -> EstimateRun:
    seeds = derive_seeds(cfg.seed if seed is None else seed)
    tau = cache.tau if cache is not None else mean_field_tau(model, g, cfg)
    cache = cache or TauCache(tau)
    pc = cfg.pce
    order_for_samples = pc.order if pc.order is not None else 2
    probe = draw_zetas(HERMITE, pc.samples or default_samples(order_for_samples), seeds["fit"])
    if not np.isfinite(cache(probe)).any():
        # Xi is monotone for every draw tried: no unhealthy equilibrium anywhere
        empty = np.empty((0, 2))
        est = ResilienceEstimate(1.0, empty, empty, 0, 1.0, seeds["fit"], 0.0, {"valid": [-math.inf, math.inf]})
        return EstimateRun(est, None, probe, cache(probe), (-math.inf, math.inf), tau)

    model_pce = _fit(cache, cfg, seeds["fit"])
    M = model_pce.fit_meta.samples + model_pce.fit_meta.excluded
    zetas = draw_zetas(HERMITE, M, seeds["fit"])
    taus = cache(zetas)
    valid = valid_interval(zetas, taus)
    prob = resilience_probability(model_pce, valid=valid)
    nboot = pc.bootstrap if bootstrap is None else bootstrap
    stderr = bootstrap_probability_stderr(zetas, taus, HERMITE, model_pce.order, nboot, seeds["bootstrap"], valid)
    pdf, cdf = tau_distribution(model_pce, pc.draws, pc.bins, seeds["draws"])
    degenerate = float(np.mean(~np.isfinite(taus)))
    est = ResilienceEstimate(prob, pdf, cdf, model_pce.order, degenerate, seeds["fit"], stderr,
                             {"valid": list(valid)})
    return EstimateRun(est, model_pce, zetas, taus, valid, tau)


def apply_sweep_value(model_cfg: ModelConfig, g: WeightedDigraph, key: str, value: float):
    """(model, graph) with one sweep lever set to ``value``.

    ``edge_weight`` rescales the graph so its mean edge weight equals ``value``.
    """
    if key == "edge_weight":
        if g.m == 0:
            raise ConfigError("sweep.key: edge_weight sweep needs a graph with edges")
        return build_model(model_cfg), scale_weights(g, value / mean_weight(g))
    params = dict(model_cfg.params)
    spec = params.get(key)
    params[key] = replace(spec, mean=value) if spec is not None else type(model_cfg.edge)(mean=value)
    return build_model(replace(model_cfg, params=params)), g

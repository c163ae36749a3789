"""Mean-field moments of self-dynamics and coupling, and realisations of Xi.

For a state value ``x`` shared by every node, the node average of ``f`` and
the per-node sum of coupling terms are approximated by normals whose means
and variances are uniform-measure integrals over the parameter noise.  A
realisation of the resulting scalar map is

    Xi(x) = mu_f(x) + (m/n) mu_g(x) + sqrt(var_f(x)/n + m var_g(x)/n^2) * zeta
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import DynamicsModel
from .errors import NonFiniteValue
from .quadrature import TensorGridRule, tensor_gauss_legendre

__all__ = [
    "phi",
    "varphi",
    "MeanFieldMoments",
    "XiRealization",
    "moment_rules",
    "compute_moments",
    "realize_xi",
]

_CHUNK_ELEMS = 2_000_000


def _realize(params, u):
    u = np.asarray(u, dtype=float)
    return [p.realize(u[..., j]) for j, p in enumerate(params)]


def phi(model: DynamicsModel, x, u):
    """Self-dynamics with every mean parameter perturbed by its own noise coordinate."""
    return model.f(x, _realize(model.A_params, u))


def varphi(model: DynamicsModel, E_M: float, x, u, u_edge):
    """Per-edge coupling contribution at y = x, edge weight E_M perturbed by ``u_edge``."""
    w = E_M * model.edge_uncertainty.realize(u_edge)
    return w * model.g(x, x, _realize(model.B_params, u))


def moment_rules(model: DynamicsModel, points: int = 20) -> tuple[TensorGridRule, TensorGridRule]:
    """Tensor rules matching the noise supports of the self and coupling parameters."""
    a_params = model.A_params
    b_params = model.B_params + (model.edge_uncertainty,)
    rule_f = tensor_gauss_legendre(
        len(a_params), points, [p.support[0] for p in a_params], [p.support[1] for p in a_params]
    )
    rule_g = tensor_gauss_legendre(
        len(b_params), points, [p.support[0] for p in b_params], [p.support[1] for p in b_params]
    )
    return rule_f, rule_g


class MeanFieldMoments:
    """Evaluators for mu_f, var_f, mu_g, var_g as functions of the state ``x``.

    All evaluators accept scalars or arrays of ``x``.  Parameter values at
    the quadrature nodes are realised once at construction; nothing depending
    on ``x`` is cached.
    """

    def __init__(self, model: DynamicsModel, E_M: float, rule_f: TensorGridRule, rule_g: TensorGridRule):
        if rule_f.d != model.k:
            raise ValueError(f"rule_f has dimension {rule_f.d}, model has k={model.k}")
        if rule_g.d != model.l + 1:
            raise ValueError(f"rule_g has dimension {rule_g.d}, expected l+1={model.l + 1}")
        _check_box(rule_f, model.A_params, "rule_f")
        _check_box(rule_g, model.B_params + (model.edge_uncertainty,), "rule_g")
        self.model = model
        self.E_M = float(E_M)
        self.rule_f = rule_f
        self.rule_g = rule_g
        self._A = [a[None, :] for a in _realize(model.A_params, rule_f.nodes)]
        self._wf = rule_f.weights / rule_f.volume
        self._B = [b[None, :] for b in _realize(model.B_params, rule_g.nodes[:, :-1])]
        self._edge = (self.E_M * model.edge_uncertainty.realize(rule_g.nodes[:, -1]))[None, :]
        self._wg = rule_g.weights / rule_g.volume

    @property
    def provenance(self) -> dict:
        return {
            "model": self.model.name,
            "quadrature_points": self.rule_f.points_per_axis,
            "mean_edge_weight": self.E_M,
        }

    def _stats(self, x, func, weights):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        mean = np.empty_like(flat)
        var = np.empty_like(flat)
        step = max(1, _CHUNK_ELEMS // weights.size)
        for i in range(0, flat.size, step):
            xs = flat[i:i + step, None]
            vals = func(xs)
            if not np.all(np.isfinite(vals)):
                raise NonFiniteValue(f"moment integrand not finite near x={flat[i]}")
            # shift by one node value so constant integrands give exact zeros
            ref = vals[:, :1]
            d = vals - ref
            md = d @ weights
            mean[i:i + step] = ref[:, 0] + md
            var[i:i + step] = np.maximum(((d - md[:, None]) ** 2) @ weights, 0.0)
        return mean.reshape(x.shape), var.reshape(x.shape)

    def f_stats(self, x):
        return self._stats(x, lambda xs: self.model.f(xs, self._A), self._wf)

    def g_stats(self, x):
        return self._stats(x, lambda xs: self._edge * self.model.g(xs, xs, self._B), self._wg)

    def mu_f(self, x):
        return self.f_stats(x)[0]

    def var_f(self, x):
        return self.f_stats(x)[1]

    def mu_g(self, x):
        return self.g_stats(x)[0]

    def var_g(self, x):
        return self.g_stats(x)[1]

    def center_and_slope(self, x, n: int, m: int):
        """Return (mean, zeta-slope) of Xi at ``x`` for a graph with n nodes and m edges."""
        mf, vf = self.f_stats(x)
        mg, vg = self.g_stats(x)
        center = mf + (m / n) * mg
        slope = np.sqrt(vf / n + (m / n**2) * vg)
        return center, slope


def _check_box(rule, params, label):
    lo = np.array([p.support[0] for p in params])
    hi = np.array([p.support[1] for p in params])
    if not (np.allclose(rule.lower, lo) and np.allclose(rule.upper, hi)):
        raise ValueError(f"{label} box {rule.lower}..{rule.upper} does not match noise supports {lo}..{hi}")


def compute_moments(model: DynamicsModel, E_M: float, rule_f: TensorGridRule,
                    rule_g: TensorGridRule) -> MeanFieldMoments:
    return MeanFieldMoments(model, E_M, rule_f, rule_g)


@dataclass(frozen=True)
class XiRealization:
    moments: MeanFieldMoments
    n: int
    m: int
    zeta: float

    def __call__(self, x):
        c, s = self.moments.center_and_slope(x, self.n, self.m)
        return c + s * self.zeta

    def slope(self, x):
        return self.moments.center_and_slope(x, self.n, self.m)[1]


def realize_xi(mom: MeanFieldMoments, n: int, m: int, zeta: float) -> XiRealization:
    if n < 1:
        raise ValueError("node count must be positive")
    return XiRealization(mom, int(n), int(m), float(zeta))

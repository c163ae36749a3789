"""Node self-dynamics, pairwise coupling and the multiplicative noise model.

A model supplies ``f(x, A)`` and ``g(x, y, B)`` as vectorised callables:
``A`` and ``B`` are sequences of parameter arrays (one entry per parameter)
that broadcast against ``x`` and ``y``.  Each uncertain parameter is
realised as ``mean * (1 + e * u)`` with ``u ~ Uniform[a, b]`` drawn
independently per node (self parameters) or per edge (coupling parameters
and the edge weight factor).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ZeroDenominator
from .graph import WeightedDigraph

__all__ = [
    "UncertainParam",
    "DynamicsModel",
    "MutualisticParams",
    "RealizedParams",
    "eval_f_mutualistic",
    "eval_g_mutualistic",
    "mutualistic_f",
    "mutualistic_g",
    "make_mutualistic_model",
    "make_case_study_model",
    "realize_params",
    "MODELS",
]


@dataclass(frozen=True)
class UncertainParam:
    mean: float
    e: float = 0.0
    support: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        a, b = self.support
        if self.e < 0:
            raise ValueError(f"relative half-width must be >= 0, got {self.e}")
        if not a < b:
            raise ValueError(f"noise support must satisfy a < b, got {self.support}")
        object.__setattr__(self, "support", (float(a), float(b)))

    @property
    def max_relative_deviation(self) -> float:
        a, b = self.support
        return self.e * max(abs(a), abs(b))

    def realize(self, u):
        return self.mean * (1.0 + self.e * np.asarray(u, dtype=float))


@dataclass(frozen=True)
class DynamicsModel:
    """Self-dynamics ``f``, coupling ``g`` and their uncertain parameters.

    ``capacity`` names the self parameter that bounds the low-state search
    range (the carrying capacity for the mutualistic model); None if the
    model has no such scale.
    """

    name: str
    f: Callable
    g: Callable
    A_names: tuple[str, ...]
    A_params: tuple[UncertainParam, ...]
    B_names: tuple[str, ...]
    B_params: tuple[UncertainParam, ...]
    edge_uncertainty: UncertainParam = UncertainParam(1.0)
    capacity: str | None = None
    constants: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.A_names) != len(self.A_params):
            raise ValueError("A_names and A_params differ in length")
        if len(self.B_names) != len(self.B_params):
            raise ValueError("B_names and B_params differ in length")

    @property
    def k(self) -> int:
        return len(self.A_params)

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.B_params)

    def A_means(self) -> np.ndarray:
        return np.array([p.mean for p in self.A_params])

    def B_means(self) -> np.ndarray:
        return np.array([p.mean for p in self.B_params])

    def default_search_hi(self) -> float:
        if self.capacity is None:
            return 10.0
        p = self.A_params[self.A_names.index(self.capacity)]
        return p.mean * (1.0 + p.max_relative_deviation)


@dataclass(frozen=True)
class MutualisticParams:
    B: float
    C: float
    K: float
    D: float
    E: float
    H: float

    def __post_init__(self):
        for name in ("B", "C", "K", "D", "E", "H"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.C < self.K:
            raise ValueError("Allee threshold C must be below carrying capacity K")


def mutualistic_f(x, A):
    B, C, K = A
    return B + x * (x / C - 1.0) * (1.0 - x / K)


def mutualistic_g(x, y, Bp, E=0.9, H=0.1):
    (D,) = Bp
    return x * y / (D + E * x + H * y)


def eval_f_mutualistic(x: float, p: MutualisticParams) -> float:
    return float(mutualistic_f(x, (p.B, p.C, p.K)))


def eval_g_mutualistic(x: float, y: float, p: MutualisticParams) -> float:
    denom = p.D + p.E * x + p.H * y
    if denom == 0:
        raise ZeroDenominator(f"D + E*x + H*y vanishes at x={x}, y={y}")
    return x * y / denom


_MUTUALISTIC_DEFAULTS = {
    "B": UncertainParam(0.1, 0.1),
    "C": UncertainParam(1.0, 0.1),
    "K": UncertainParam(5.0, 0.1),
    "D": UncertainParam(5.0, 0.1),
}
_MUTUALISTIC_CONSTANTS = {"E": 0.9, "H": 0.1}


def make_mutualistic_model(
    params: Mapping[str, UncertainParam] | None = None,
    constants: Mapping[str, float] | None = None,
    edge: UncertainParam | None = None,
) -> DynamicsModel:
    """Mutualistic model with B, C, K per node, D per edge, E and H fixed.

    ``params`` overrides any of B, C, K, D; ``constants`` overrides E, H.
    """
    ps = dict(_MUTUALISTIC_DEFAULTS)
    for name, p in (params or {}).items():
        if name not in ps:
            raise KeyError(f"unknown uncertain parameter {name!r}")
        ps[name] = p
    consts = dict(_MUTUALISTIC_CONSTANTS)
    for name, v in (constants or {}).items():
        if name not in consts:
            raise KeyError(f"unknown constant {name!r}")
        consts[name] = float(v)
    # validates positivity and C < K at the means
    MutualisticParams(ps["B"].mean, ps["C"].mean, ps["K"].mean, ps["D"].mean, consts["E"], consts["H"])
    return DynamicsModel(
        name="mutualistic",
        f=mutualistic_f,
        g=partial(mutualistic_g, E=consts["E"], H=consts["H"]),
        A_names=("B", "C", "K"),
        A_params=(ps["B"], ps["C"], ps["K"]),
        B_names=("D",),
        B_params=(ps["D"],),
        edge_uncertainty=edge if edge is not None else UncertainParam(1.0, 0.1),
        capacity="K",
        constants=consts,
    )


def make_case_study_model() -> DynamicsModel:
    return make_mutualistic_model()


MODELS: dict[str, Callable[..., DynamicsModel]] = {"mutualistic": make_mutualistic_model}


@dataclass(frozen=True)
class RealizedParams:
    """One draw of all node/edge parameters: A is (n, k), B is (m, l), weights is (m,)."""

    A: np.ndarray
    B: np.ndarray
    weights: np.ndarray


def _uniform(rng, params: Sequence[UncertainParam], rows: int) -> np.ndarray:
    if not params:
        return np.empty((rows, 0))
    lo = np.array([p.support[0] for p in params])
    hi = np.array([p.support[1] for p in params])
    return rng.uniform(lo, hi, size=(rows, len(params)))


def realize_params(model: DynamicsModel, g: WeightedDigraph, seed: int) -> RealizedParams:
    rng = np.random.default_rng(seed)
    uA = _uniform(rng, model.A_params, g.n)
    uB = _uniform(rng, model.B_params, g.m)
    ue = _uniform(rng, (model.edge_uncertainty,), g.m)[:, 0]
    A = np.column_stack([p.realize(uA[:, j]) for j, p in enumerate(model.A_params)]) if model.k else uA
    B = np.column_stack([p.realize(uB[:, j]) for j, p in enumerate(model.B_params)]) if model.l else uB
    weights = g.weights * model.edge_uncertainty.realize(ue)
    return RealizedParams(A.reshape(g.n, model.k), B.reshape(g.m, model.l), weights)

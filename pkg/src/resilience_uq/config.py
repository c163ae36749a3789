"""Run configuration: YAML file -> nested dataclasses, with key-path errors."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError

__all__ = [
    "ParamSpec",
    "ModelConfig",
    "GeneratorConfig",
    "GraphConfig",
    "QuadratureConfig",
    "BifurcationConfig",
    "PceConfig",
    "OracleConfig",
    "ConvergeConfig",
    "SweepConfig",
    "RunConfig",
    "load_config",
    "parse_config",
]

SWEEP_KEYS = ("edge_weight", "B", "C", "K", "D", "E", "H")


@dataclass
class ParamSpec:
    mean: float | None = None
    e: float | None = None
    support: tuple[float, float] | None = None


@dataclass
class ModelConfig:
    name: str = "mutualistic"
    params: dict[str, ParamSpec] = field(default_factory=dict)
    edge: ParamSpec = field(default_factory=ParamSpec)


@dataclass
class GeneratorConfig:
    n: int = 100
    p: float = 0.1
    weight: float = 1.0
    seed: int = 0


@dataclass
class GraphConfig:
    file: str | None = None
    generator: GeneratorConfig | None = None


@dataclass
class QuadratureConfig:
    points: int = 20


@dataclass
class BifurcationConfig:
    search_hi: float | None = None
    grid_points: int = 512


@dataclass
class PceConfig:
    order: int | None = None
    samples: int | None = None
    precision: float = 1e-7
    max_order: int = 8
    draws: int = 100_000
    bins: int = 100
    bootstrap: int = 200


@dataclass
class OracleConfig:
    trials: int = 500
    t_max: float = 500.0
    tol: float = 1e-9
    probes: list[float] | None = None
    workers: int = 1


@dataclass
class ConvergeConfig:
    orders: list[int] = field(default_factory=lambda: [2, 3, 4, 5])


@dataclass
class SweepConfig:
    key: str = "edge_weight"
    start: float = 0.1
    stop: float = 2.0
    steps: int = 10


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    graph: GraphConfig = field(default_factory=lambda: GraphConfig(generator=GeneratorConfig()))
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    bifurcation: BifurcationConfig = field(default_factory=BifurcationConfig)
    pce: PceConfig = field(default_factory=PceConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    converge: ConvergeConfig = field(default_factory=ConvergeConfig)
    sweep: SweepConfig | None = None
    seed: int = 0
    output_dir: str = "out"
    base_dir: str = field(default=".", compare=False, repr=False)

    def to_dict(self) -> dict:
        """Plain-data echo that ``parse_config`` maps back to an equal config."""
        d = _to_plain(self)
        d.pop("base_dir", None)
        if self.sweep is not None:
            d["sweep"] = {"key": self.sweep.key, "from": self.sweep.start,
                          "to": self.sweep.stop, "steps": self.sweep.steps}
        return d

    def resolve_path(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else Path(self.base_dir) / path


def _to_plain(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {k: _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    return obj


# -- parsing -----------------------------------------------------------------

def _err(path, msg):
    return ConfigError(f"{path}: {msg}")


def _as_int(v, path, minimum=None):
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, float) and v.is_integer():
            v = int(v)
        else:
            raise _err(path, f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise _err(path, f"must be >= {minimum}, got {v}")
    return v


def _as_float(v, path, positive=False, nonneg=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _err(path, f"expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise _err(path, f"must be finite, got {v}")
    if positive and not v > 0:
        raise _err(path, f"must be positive, got {v}")
    if nonneg and v < 0:
        raise _err(path, f"must be >= 0, got {v}")
    return v


def _mapping(raw, path):
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise _err(path, f"expected a mapping, got {type(raw).__name__}")
    return raw


def _check_keys(raw, allowed, path):
    extra = sorted(set(raw) - set(allowed))
    if extra:
        raise _err(f"{path}.{extra[0]}" if path else extra[0], f"unknown key (allowed: {', '.join(allowed)})")


def _param_spec(raw, path) -> ParamSpec:
    raw = _mapping(raw, path)
    _check_keys(raw, ("mean", "e", "support"), path)
    spec = ParamSpec()
    if raw.get("mean") is not None:
        spec.mean = _as_float(raw["mean"], f"{path}.mean", positive=True)
    if raw.get("e") is not None:
        spec.e = _as_float(raw["e"], f"{path}.e", nonneg=True)
    if raw.get("support") is not None:
        s = raw["support"]
        if not isinstance(s, (list, tuple)) or len(s) != 2:
            raise _err(f"{path}.support", "expected [a, b]")
        a = _as_float(s[0], f"{path}.support[0]")
        b = _as_float(s[1], f"{path}.support[1]")
        if not a < b:
            raise _err(f"{path}.support", f"need a < b, got [{a}, {b}]")
        spec.support = (a, b)
    return spec


def _simple(cls, raw, path, checks):
    raw = _mapping(raw, path)
    names = [f.name for f in dataclasses.fields(cls)]
    _check_keys(raw, names, path)
    obj = cls()
    for name, conv in checks.items():
        if name in raw and raw[name] is not None:
            setattr(obj, name, conv(raw[name], f"{path}.{name}"))
        elif name in raw:
            setattr(obj, name, None)
    return obj


def _pos_float(v, p):
    return _as_float(v, p, positive=True)


def _int_ge(k):
    return lambda v, p: _as_int(v, p, minimum=k)


def _float_list(v, p):
    if not isinstance(v, (list, tuple)) or not v:
        raise _err(p, "expected a non-empty list of numbers")
    return [_as_float(x, f"{p}[{i}]", nonneg=True) for i, x in enumerate(v)]


def _int_list(v, p):
    if not isinstance(v, (list, tuple)) or not v:
        raise _err(p, "expected a non-empty list of integers")
    return [_as_int(x, f"{p}[{i}]", minimum=1) for i, x in enumerate(v)]


def parse_config(raw: Any, base_dir=".") -> RunConfig:
    raw = _mapping(raw, "<root>")
    top = ("model", "graph", "quadrature", "bifurcation", "pce", "oracle", "converge", "sweep", "seed", "output_dir")
    _check_keys(raw, top, "")
    cfg = RunConfig(base_dir=str(base_dir))

    m = _mapping(raw.get("model"), "model")
    _check_keys(m, ("name", "params", "edge"), "model")
    name = m.get("name", "mutualistic")
    if not isinstance(name, str):
        raise _err("model.name", "expected a string")
    params = {}
    for pname, spec in _mapping(m.get("params"), "model.params").items():
        params[str(pname)] = _param_spec(spec, f"model.params.{pname}")
    cfg.model = ModelConfig(name, params, _param_spec(m.get("edge"), "model.edge"))

    if "graph" in raw:
        g = _mapping(raw["graph"], "graph")
        _check_keys(g, ("file", "generator"), "graph")
        has_file = g.get("file") is not None
        has_gen = g.get("generator") is not None
        if has_file == has_gen:
            raise _err("graph", "exactly one of graph.file / graph.generator must be given")
        if has_file:
            if not isinstance(g["file"], str):
                raise _err("graph.file", "expected a path string")
            cfg.graph = GraphConfig(file=g["file"])
        else:
            gen = _simple(GeneratorConfig, g["generator"], "graph.generator", {
                "n": _int_ge(2),
                "p": _pos_float,
                "weight": _pos_float,
                "seed": _int_ge(0),
            })
            if gen.p > 1:
                raise _err("graph.generator.p", f"must lie in (0, 1], got {gen.p}")
            cfg.graph = GraphConfig(generator=gen)

    cfg.quadrature = _simple(QuadratureConfig, raw.get("quadrature"), "quadrature", {"points": _int_ge(1)})
    cfg.bifurcation = _simple(BifurcationConfig, raw.get("bifurcation"), "bifurcation", {
        "search_hi": _pos_float,
        "grid_points": _int_ge(16),
    })
    cfg.pce = _simple(PceConfig, raw.get("pce"), "pce", {
        "order": _int_ge(0),
        "samples": _int_ge(2),
        "precision": _pos_float,
        "max_order": _int_ge(2),
        "draws": _int_ge(10_000),
        "bins": _int_ge(1),
        "bootstrap": _int_ge(0),
    })
    if cfg.pce.order is not None and cfg.pce.samples is not None and cfg.pce.samples <= cfg.pce.order:
        raise _err("pce.samples", "must exceed pce.order")
    cfg.oracle = _simple(OracleConfig, raw.get("oracle"), "oracle", {
        "trials": _int_ge(30),
        "t_max": _pos_float,
        "tol": _pos_float,
        "probes": _float_list,
        "workers": _int_ge(1),
    })
    if cfg.oracle.probes is not None and len(cfg.oracle.probes) < 2:
        raise _err("oracle.probes", "need at least two probes")
    cfg.converge = _simple(ConvergeConfig, raw.get("converge"), "converge", {"orders": _int_list})

    if raw.get("sweep") is not None:
        s = _mapping(raw["sweep"], "sweep")
        _check_keys(s, ("key", "from", "to", "steps"), "sweep")
        for k in ("key", "from", "to", "steps"):
            if k not in s:
                raise _err(f"sweep.{k}", "required")
        key = s["key"]
        if key not in SWEEP_KEYS:
            raise _err("sweep.key", f"must be one of {', '.join(SWEEP_KEYS)}, got {key!r}")
        cfg.sweep = SweepConfig(
            key,
            _as_float(s["from"], "sweep.from", positive=True),
            _as_float(s["to"], "sweep.to", positive=True),
            _as_int(s["steps"], "sweep.steps", minimum=2),
        )

    if "seed" in raw:
        cfg.seed = _as_int(raw["seed"], "seed", minimum=0)
    if "output_dir" in raw:
        if not isinstance(raw["output_dir"], str):
            raise _err("output_dir", "expected a path string")
        cfg.output_dir = raw["output_dir"]
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"<file>: cannot read {path}: {exc.strerror}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"<file>: {path} is not valid YAML: {exc}") from None
    return parse_config(raw, base_dir=path.parent)

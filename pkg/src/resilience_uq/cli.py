"""Command-line entry point: ``resilience-uq <command> --config FILE``.

Exit codes: 0 success, 1 configuration or input error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import traceback
from pathlib import Path

import numpy as np
from scipy.stats import spearmanr

from .config import RunConfig, load_config
from .errors import ConfigError, GraphError, NumericalError, UnsupportedDistribution
from .graph import mean_weight
from .oracle import mc_resilience_probability
from .orthopoly import HERMITE
from .pce import (
    TauCache,
    draw_zetas,
    empirical_cdf_sup_distance,
    fit_pce,
    resilience_probability,
    surrogate_cdf,
    tau_distribution,
    truncation_gap,
)
from .pipeline import apply_sweep_value, build_graph, build_model, derive_seeds, mean_field_tau, run_estimate

log = logging.getLogger("resilience_uq")

OUT_ENV = "RESILIENCE_UQ_OUT"
ZETA_GRID = np.linspace(-4.0, 4.0, 201)
EXACT_CDF_POINTS = 201
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


# -- output helpers --------------------------------------------------------

def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_clean(payload), fh, indent=2, allow_nan=False)
        fh.write("\n")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


# -- commands --------------------------------------------------------------

def _scenario(cfg: RunConfig):
    return build_model(cfg.model), build_graph(cfg.graph, cfg)


def _graph_info(g, tau) -> dict:
    return {"n": g.n, "m": g.m, "mean_weight": mean_weight(g), "search_hi": tau.search_hi}


def cmd_estimate(cfg: RunConfig, out: Path) -> dict:
    model, g = _scenario(cfg)
    run = run_estimate(model, g, cfg)
    est = run.estimate
    fm = run.pce.fit_meta if run.pce is not None else None
    summary = {
        "command": "estimate",
        "probability": est.probability,
        "probability_stderr": est.probability_stderr,
        "order": est.order,
        "coefficients": [] if run.pce is None else run.pce.coeffs.tolist(),
        "truncation_gap": None if run.pce is None else truncation_gap(run.pce),
        "degenerate_fraction": est.degenerate_fraction,
        "valid_interval": list(run.valid),
        "samples": None if fm is None else fm.samples,
        "residual_rms": None if fm is None else fm.residual_rms,
        "graph": _graph_info(g, run.tau),
        "seeds": derive_seeds(cfg.seed),
        "config": cfg.to_dict(),
    }
    write_json(out / "summary.json", summary)
    write_csv(out / "pdf.csv", ("tau", "density"), est.pdf_curve)
    write_csv(out / "cdf.csv", ("tau", "cumprob"), est.cdf_curve)
    print(f"probability of resilience: {est.probability:.6f} (stderr {est.probability_stderr:.2e}, order {est.order})")
    return summary


def _exact_sup_distance(models, samples) -> np.ndarray:
    pooled = np.concatenate(samples)
    t = np.linspace(pooled.min(), pooled.max(), EXACT_CDF_POINTS)
    cdfs = [surrogate_cdf(mdl, t) for mdl in models]
    k = len(models)
    D = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            D[i, j] = D[j, i] = float(np.max(np.abs(cdfs[i] - cdfs[j])))
    return D


def cmd_converge(cfg: RunConfig, out: Path, orders=None) -> dict:
    orders = list(cfg.converge.orders if orders is None else orders)
    if not orders or min(orders) < 1:
        raise ConfigError("converge.orders: need a non-empty list of orders >= 1")
    model, g = _scenario(cfg)
    seeds = derive_seeds(cfg.seed)
    tau = mean_field_tau(model, g, cfg)
    cache = TauCache(tau)
    draws = draw_zetas(HERMITE, cfg.pce.draws, seeds["draws"])
    models, samples = [], []
    for N in orders:
        mdl = fit_pce(cache, HERMITE, N, cfg.pce.samples, seeds["fit"])
        models.append(mdl)
        samples.append(mdl(draws))
        write_csv(out / f"pce_N{N}.csv", ("zeta", "tau_tilde"), zip(ZETA_GRID, mdl(ZETA_GRID)))
        _, cdf = tau_distribution(mdl, cfg.pce.draws, cfg.pce.bins, seeds["draws"])
        write_csv(out / f"cdf_N{N}.csv", ("tau", "cumprob"), cdf)
    k = len(orders)
    D = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            D[i, j] = D[j, i] = empirical_cdf_sup_distance(samples[i], samples[j])
    report = {
        "command": "converge",
        "orders": orders,
        "draws": cfg.pce.draws,
        "coefficients": {str(N): mdl.coeffs.tolist() for N, mdl in zip(orders, models)},
        "probabilities": {str(N): resilience_probability(mdl) for N, mdl in zip(orders, models)},
        "truncation_gaps": {str(N): truncation_gap(mdl) for N, mdl in zip(orders, models)},
        "sup_distance": D.tolist(),
        "exact_sup_distance": _exact_sup_distance(models, samples).tolist(),
        "graph": _graph_info(g, tau),
        "seeds": seeds,
        "config": cfg.to_dict(),
    }
    write_json(out / "converge.json", report)
    for i in range(k):
        for j in range(i + 1, k):
            print(f"sup|CDF_N{orders[i]} - CDF_N{orders[j]}| = {D[i, j]:.4g}")
    return report


def cmd_sweep(cfg: RunConfig, out: Path) -> dict:
    if cfg.sweep is None:
        raise ConfigError("sweep: section required for the sweep command")
    sw = cfg.sweep
    _, g0 = _scenario(cfg)
    values = np.linspace(sw.start, sw.stop, sw.steps)
    rows = []
    for v in values:
        model, g = apply_sweep_value(cfg.model, g0, sw.key, float(v))
        run = run_estimate(model, g, cfg, bootstrap=0)
        est = run.estimate
        rows.append((float(v), est.probability, est.order, est.degenerate_fraction))
        log.info("%s=%.6g probability=%.6f order=%d", sw.key, v, est.probability, est.order)
    write_csv(out / "sweep.csv", ("value", "probability", "order", "degenerate_fraction"), rows)
    probs = [r[1] for r in rows]
    rho = None
    if np.ptp(values) > 0 and np.ptp(probs) > 0:
        rho = float(spearmanr(values, probs).statistic)
    report = {
        "command": "sweep",
        "key": sw.key,
        "values": values.tolist(),
        "probabilities": probs,
        "spearman": rho,
        "seeds": derive_seeds(cfg.seed),
        "config": cfg.to_dict(),
    }
    write_json(out / "sweep.json", report)
    print(f"sweep over {sw.key}: spearman = {rho}")
    return report


def cmd_oracle(cfg: RunConfig, out: Path) -> dict:
    model, g = _scenario(cfg)
    seeds = derive_seeds(cfg.seed)
    run = run_estimate(model, g, cfg)
    oc = cfg.oracle
    mc = mc_resilience_probability(model, g, oc.trials, oc.probes, seeds["oracle"], oc.t_max, oc.tol, oc.workers)
    p_pce, se_pce = run.estimate.probability, run.estimate.probability_stderr
    diff = abs(p_pce - mc.p_hat)
    threshold = 3.0 * math.sqrt(mc.stderr**2 + se_pce**2)
    report = {
        "command": "oracle",
        "p_hat": mc.p_hat,
        "stderr": mc.stderr,
        "trials": mc.trials,
        "classified": mc.classified,
        "resilient": mc.resilient,
        "unclassifiable": mc.unclassifiable,
        "pce_probability": p_pce,
        "pce_stderr": se_pce,
        "pce_order": run.estimate.order,
        "difference": diff,
        "threshold": threshold,
        "pass": bool(diff < threshold) or diff == 0.0,
        "graph": _graph_info(g, run.tau),
        "seeds": seeds,
        "config": cfg.to_dict(),
    }
    write_json(out / "oracle.json", report)
    print(f"oracle p_hat={mc.p_hat:.4f}+-{mc.stderr:.4f}  pce={p_pce:.4f}+-{se_pce:.4f}  "
          f"{'PASS' if report['pass'] else 'FAIL'}")
    return report


COMMANDS = {"estimate": cmd_estimate, "converge": cmd_converge, "sweep": cmd_sweep, "oracle": cmd_oracle}


def _orders(text: str) -> list[int]:
    try:
        vals = [int(s) for s in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("orders must be integers >= 1")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="resilience-uq",
                                 description="Resilience probability of uncertain networked dynamics.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="YAML run configuration")
    ap.add_argument("--out", help=f"output directory (overrides ${OUT_ENV} and output_dir)")
    ap.add_argument("--seed", type=int, help="master seed (overrides the config)")
    ap.add_argument("--orders", type=_orders, help="converge only: e.g. '2,3,4,5'")
    ap.add_argument("--workers", type=int, help="oracle only: worker processes")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed: must be >= 0")
            cfg.seed = args.seed
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers: must be >= 1")
            cfg.oracle.workers = args.workers
        out = Path(args.out or os.environ.get(OUT_ENV) or cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "converge":
            cmd_converge(cfg, out, args.orders)
        else:
            COMMANDS[args.command](cfg, out)
    except (ConfigError, GraphError, UnsupportedDistribution) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        frames = traceback.extract_tb(exc.__traceback__)
        origin = Path(frames[-1].filename).stem if frames else "?"
        print(f"numerical failure in {origin}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

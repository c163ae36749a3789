"""Resilience probability of networked dynamics with uncertain parameters.

Pipeline: mean-field moments of the node dynamics, a scalar saddle-node
indicator tau(zeta) under a Gaussian fluctuation zeta, a polynomial chaos
surrogate of tau, and the exact probability that the surrogate is positive.
A full-network Monte Carlo oracle is included for validation.
"""
from .bifurcation import ResilienceIndicator, Status, indicator, tau_many, tau_of_zeta
from .dynamics import DynamicsModel, UncertainParam, make_case_study_model, make_mutualistic_model, realize_params
from .graph import WeightedDigraph, build_graph, generate_random_graph, read_graph, write_graph
from .meanfield import MeanFieldMoments, compute_moments, moment_rules, realize_xi
from .orthopoly import HERMITE, LEGENDRE, basis_for
from .pce import PceModel, ResilienceEstimate, fit_adaptive, fit_pce, resilience_probability

__version__ = "0.1.0"

__all__ = [
    "ResilienceIndicator",
    "Status",
    "indicator",
    "tau_many",
    "tau_of_zeta",
    "DynamicsModel",
    "UncertainParam",
    "make_case_study_model",
    "make_mutualistic_model",
    "realize_params",
    "WeightedDigraph",
    "build_graph",
    "generate_random_graph",
    "read_graph",
    "write_graph",
    "MeanFieldMoments",
    "compute_moments",
    "moment_rules",
    "realize_xi",
    "HERMITE",
    "LEGENDRE",
    "basis_for",
    "PceModel",
    "ResilienceEstimate",
    "fit_adaptive",
    "fit_pce",
    "resilience_probability",
]

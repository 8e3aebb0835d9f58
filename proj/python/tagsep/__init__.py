"""Driven tagged particle in SSEP with removal."""

import json

from ._tagsep import (
    ConfigError,
    DomainError,
    RadiusExceededError,
    Rates,
    RegimeError,
    capped_marginals,
    capped_mgf,
    clt_regime,
    coupled_params,
    drift,
    expected_tau,
    expected_x_tau,
    experiment_names,
    g,
    g_prime,
    h,
    marginal_solve,
    mgf_mixture,
    mgf_tb,
    mgf_tp,
    solve_g,
    speed,
)
from ._tagsep import run_experiment as _run_experiment


def run(experiment, **config):
    """Run an experiment; returns (summary dict, {table name: csv text})."""
    config["experiment"] = experiment
    summary, tables = _run_experiment(json.dumps(config))
    return json.loads(summary), tables


__all__ = [
    "ConfigError",
    "DomainError",
    "RadiusExceededError",
    "Rates",
    "RegimeError",
    "capped_marginals",
    "capped_mgf",
    "clt_regime",
    "coupled_params",
    "drift",
    "expected_tau",
    "expected_x_tau",
    "experiment_names",
    "g",
    "g_prime",
    "h",
    "marginal_solve",
    "mgf_mixture",
    "mgf_tb",
    "mgf_tp",
    "run",
    "solve_g",
    "speed",
]

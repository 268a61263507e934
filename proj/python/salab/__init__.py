"""Superadiabatic evolution lab."""

import json as _json

from ._salab import (
    SalabError,
    closed_form_omega,
    closed_form_transition,
    contour_projector,
    decompose,
    example_nilpotent_solution,
    expm,
    numerical_transition,
    operator_norm,
)
from . import _salab

__all__ = [
    "SalabError",
    "closed_form_omega",
    "closed_form_transition",
    "contour_projector",
    "decompose",
    "example_nilpotent_solution",
    "expm",
    "fit",
    "numerical_transition",
    "operator_norm",
    "run",
    "run_criterion",
]


def fit(epsilon, values, log_scales=(), model="exp_inverse_eps"):
    """Growth-law fit; returns the parameters as a dict."""
    return _json.loads(_salab.fit(list(epsilon), list(values), list(log_scales), model))


def run(command, config):
    """Run an experiment. `config` is a dict or JSON text; returns the report dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_salab.run(command, text))


def run_criterion(criterion_id):
    return _json.loads(_salab.run_criterion(criterion_id))

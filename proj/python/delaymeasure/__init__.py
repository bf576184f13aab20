"""Delay-measure system identification."""

import json as _json

from ._core import (
    ConfigError,
    DivergenceError,
    __version__,
    canonical_config,
    delay_embed,
    emit_plot_data,
    energy_mmd,
    nelder_mead,
    objective,
    simulate_ks,
    simulate_lorenz,
    simulate_torus,
    sliced_wasserstein,
    wasserstein_1d,
)
from ._core import run_experiment as _run_experiment


def _text(config):
    return config if isinstance(config, str) else _json.dumps(config)


def run_experiment(config, out_dir):
    """Run an experiment from a config dict or JSON string; returns the report dict."""
    return _json.loads(_run_experiment(_text(config), str(out_dir)))


def load_config(config):
    """Validated config with defaults filled in, as a dict."""
    return _json.loads(canonical_config(_text(config)))


__all__ = [
    "ConfigError",
    "DivergenceError",
    "__version__",
    "delay_embed",
    "emit_plot_data",
    "energy_mmd",
    "load_config",
    "nelder_mead",
    "objective",
    "run_experiment",
    "simulate_ks",
    "simulate_lorenz",
    "simulate_torus",
    "sliced_wasserstein",
    "wasserstein_1d",
]

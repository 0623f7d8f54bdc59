"""Limited processor-sharing loss systems: closed forms and simulation."""

import json as _json

from ._core import (  # noqa: F401
    AdmissibilityError,
    ConfigError,
    LengthDistribution,
    corollary2_loss,
    erlang_b,
    fcfd_constant_loss,
    little_sojourn,
    rho_n_from_lst,
    srl_nserver_probs,
    table1,
    theorem2_probs,
    theorem5_probs,
    unlimited_ps_probs,
)
from . import _core


def _as_json(config):
    return config if isinstance(config, str) else _json.dumps(config)


def evaluate(config):
    """Evaluate the formulas selected by a scenario (dict or JSON string)."""
    return _core.evaluate(_as_json(config))


def simulate(config):
    """Simulate a scenario and return its estimates as a dict."""
    return _core.simulate(_as_json(config))


def couple(config):
    """Coupled limited/unlimited run for an srl scenario."""
    return _core.couple(_as_json(config))

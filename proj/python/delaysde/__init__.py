"""Python front end for the delaysde core.

Models, search regions and experiment configs are plain dicts with the same
keys the command line tool reads from JSON files.
"""

import json

from . import _core
from ._core import Error, InvalidArgument, NumericalFailure, SamplePath

__all__ = [
    "Error", "InvalidArgument", "NumericalFailure", "SamplePath",
    "char_eval", "find_roots", "analyze", "scaling_r", "simulate",
    "sufficient_stats", "loglik_ratio", "delta_J", "mle_theta", "mle_alpha",
    "limit_replication", "mc_alpha_hat", "mc_limit_alpha_hat",
    "martingale_mean_check", "ar1_baseline", "ks_two_sample", "path_from_csv", "path_to_csv",
]


def _text(obj):
    return obj if isinstance(obj, str) else json.dumps(obj)


def _optional(obj):
    return None if obj is None else _text(obj)


def char_eval(model, z):
    return _core.char_eval(_text(model), complex(z))


def find_roots(model, region=None):
    """[(lambda, multiplicity)] inside the search region."""
    return _core.find_roots(_text(model), _optional(region))


def analyze(model, region=None):
    """Spectral summary: roots, residue coefficients, v*, m*, regime."""
    return json.loads(_core.analyze(_text(model), _optional(region)))


def scaling_r(model, horizon):
    return _core.scaling_r(_text(model), horizon)


def simulate(model, horizon, dt, seed=0, replication=0, x0=0.0):
    return _core.simulate(_text(model), horizon, dt, seed, replication, _text(x0))


def sufficient_stats(path, model):
    """{"I1", "I2", "I3", "T"}; I3 is None when the path carries no noise."""
    return _core.sufficient_stats(path, _text(model))


loglik_ratio = _core.loglik_ratio
delta_J = _core.delta_J
mle_theta = _core.mle_theta
mle_alpha = _core.mle_alpha
ks_two_sample = _core.ks_two_sample
ar1_baseline = _core.ar1_baseline
path_from_csv = SamplePath.from_csv


def limit_replication(model, alpha, dt=1e-3, seed=0, replication=0):
    return _core.limit_replication(_text(model), alpha, dt, seed, replication)


def mc_alpha_hat(config):
    return _core.mc_alpha_hat(_text(config))


def mc_limit_alpha_hat(config):
    return _core.mc_limit_alpha_hat(_text(config))


def martingale_mean_check(config, horizon):
    return _core.martingale_mean_check(_text(config), horizon)


def path_to_csv(path, model):
    return path.to_csv(_text(model))

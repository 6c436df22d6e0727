import math

import numpy as np
import pytest

from rollup_validators.model import CoreParams, ExtendedParams

EXAMPLE = CoreParams(C=1.0, L=1e5, R=1e6, U=1e9)


def log_uniform(rng, lo, hi):
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def random_core(rng):
    """Log-uniform draw respecting C < R + L."""
    while True:
        core = CoreParams(
            C=log_uniform(rng, 0.1, 10),
            L=log_uniform(rng, 1, 1e7),
            R=log_uniform(rng, 1, 1e7),
            U=log_uniform(rng, 1e3, 1e12),
        )
        if core.C < core.R + core.L:
            return core


def random_params(rng, n_max=12, m=0):
    core = random_core(rng)
    n = int(rng.integers(1, n_max + 1))
    s_w = float(rng.uniform(0, core.L / 10))
    return ExtendedParams(core, n=n, m=m, s_w=s_w)


def random_solvable(rng, n_max=12, worst=lambda p: p):
    """Active-only draw whose equilibrium (at ``worst(params)``) has pi <= 1.

    Draws where a false claim would be made with certainty have no totally
    mixed equilibrium; they are redrawn here and exercised separately.
    """
    from rollup_validators.equilibrium import NoTotallyMixedEquilibrium, solve_n_player

    while True:
        params = random_params(rng, n_max)
        try:
            solve_n_player(worst(params))
        except NoTotallyMixedEquilibrium:
            continue
        return params


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


@pytest.fixture
def example():
    return EXAMPLE

"""Genie-aided upper bounds and the feedback-free random scheduler."""
from __future__ import annotations

import numpy as np

from .channel import ChannelParams, ChannelState, complex_normal, ssg
from .gsra import Schedule, SolverConfig, SsgDistribution, greedy_allocate
from .mcs import McsTable, UtilitySpec

SCHEMES = ("proposed", "cgg", "ncgg", "fprus")


def genie_taps(true_state_lagged: ChannelState | None, params: ChannelParams, S_genie: int,
               rng: np.random.Generator) -> np.ndarray:
    """Samples (K, S, L) of h^t given exact h^{t-d}; prior samples when no lag exists yet."""
    shape = (params.K, S_genie, params.L)
    if true_state_lagged is None:
        return complex_normal(rng, shape, params.stationary_var)
    mean = (1.0 - params.alpha) ** params.d * true_state_lagged.taps[:, None, :]
    return mean + complex_normal(rng, shape, params.innovation_var(params.d))


def cgg_allocate(true_state_lagged, params: ChannelParams, mcs: McsTable, utility: UtilitySpec,
                 config: SolverConfig, S_genie: int, rng: np.random.Generator):
    dist = SsgDistribution.from_taps(genie_taps(true_state_lagged, params, S_genie, rng), params)
    return greedy_allocate(dist, mcs, utility, config)


def ncgg_allocate(true_state_now: ChannelState, params: ChannelParams, mcs: McsTable,
                  utility: UtilitySpec, config: SolverConfig):
    dist = SsgDistribution.point_mass(ssg(true_state_now, params))
    return greedy_allocate(dist, mcs, utility, config)


def fprus_mcs(mcs: McsTable, power: float) -> tuple[int, float]:
    """Best table index under the unit-mean exponential prior, E{e^{-bP gamma}} = 1/(1+bP).

    Returns (index, expected goodput); ties go to the lowest index.
    """
    g = mcs.r * (1.0 - np.minimum(1.0, mcs.a / (1.0 + mcs.b * power)))
    i = int(np.argmax(g))
    return i, float(g[i])


def fprus_allocate(params: ChannelParams, mcs: McsTable, utility: UtilitySpec,
                   config: SolverConfig, rng: np.random.Generator) -> Schedule:
    N = params.N
    P = config.x_con / N
    m, _ = fprus_mcs(mcs, P)
    users = rng.integers(0, params.K, size=N)
    return Schedule(users, np.full(N, m), np.full(N, P))

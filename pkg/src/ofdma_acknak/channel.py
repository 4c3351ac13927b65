"""Gauss-Markov tap processes, OFDMA subchannel gains and ACK/NAK generation."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

ACK = 1
NAK = 0
NOT_SCHEDULED = -1


@dataclass(frozen=True)
class ChannelParams:
    N: int = 32
    L: int = 2
    K: int = 8
    alpha: float = 1e-3
    d: int = 1

    def __post_init__(self):
        if min(self.N, self.L, self.K) < 1 or self.L > self.N:
            raise ValueError(f"need 1 <= L <= N and K >= 1, got {self}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if self.d < 1:
            raise ValueError("feedback delay d must be >= 1")

    @property
    def beta(self) -> float:
        return (self.N / self.L) * (2.0 - self.alpha) / self.alpha

    @property
    def stationary_var(self) -> float:
        return self.alpha / (2.0 - self.alpha)

    def innovation_var(self, steps: int) -> float:
        """Per-tap variance of the accumulated innovation over ``steps`` slots."""
        c2 = (1.0 - self.alpha) ** 2
        return self.alpha ** 2 * sum(c2 ** j for j in range(steps))

    @cached_property
    def modulation(self) -> np.ndarray:
        """sqrt(beta) times the first L columns of the unitary N-point DFT, shape (N, L)."""
        n = np.arange(self.N)[:, None]
        l = np.arange(self.L)[None, :]
        F = np.exp(-2j * np.pi * n * l / self.N) / np.sqrt(self.N)
        return np.sqrt(self.beta) * F


def complex_normal(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    s = np.sqrt(var / 2.0)
    z = rng.standard_normal(tuple(shape) + (2,))
    return s * (z[..., 0] + 1j * z[..., 1])


def _per_user(rng, K: int) -> list:
    if isinstance(rng, np.random.Generator):
        return [rng] * K
    rngs = list(rng)
    if len(rngs) != K:
        raise ValueError(f"expected {K} per-user generators, got {len(rngs)}")
    return rngs


@dataclass
class ChannelState:
    taps: np.ndarray  # (K, L) complex
    slot: int = 0


def init_state(params: ChannelParams, rng, slot: int = 0) -> ChannelState:
    rngs = _per_user(rng, params.K)
    taps = np.stack([complex_normal(g, (params.L,), params.stationary_var) for g in rngs])
    return ChannelState(taps, slot)


def step(state: ChannelState, params: ChannelParams, rng, steps: int = 1) -> ChannelState:
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rngs = _per_user(rng, params.K)
    c = 1.0 - params.alpha
    taps = state.taps.copy()
    for _ in range(steps):
        w = np.stack([complex_normal(g, (params.L,)) for g in rngs])
        taps = c * taps + params.alpha * w
    return ChannelState(taps, state.slot + steps)


def ssg_from_taps(taps: np.ndarray, params: ChannelParams) -> np.ndarray:
    """Squared subchannel gains for taps of shape (..., L); returns (..., N)."""
    H = taps @ params.modulation.T
    return H.real ** 2 + H.imag ** 2


def subchannel_gains(state: ChannelState, params: ChannelParams) -> np.ndarray:
    """Complex gains H of shape (K, N)."""
    return state.taps @ params.modulation.T


def ssg(state: ChannelState, params: ChannelParams) -> np.ndarray:
    """gamma[n, k] for the current state, shape (N, K)."""
    return ssg_from_taps(state.taps, params).T


@dataclass
class FeedbackFrame:
    slot: int
    entries: np.ndarray  # (N, K) int8 of ACK / NAK / NOT_SCHEDULED

    @classmethod
    def empty(cls, slot: int, N: int, K: int) -> "FeedbackFrame":
        return cls(slot, np.full((N, K), NOT_SCHEDULED, dtype=np.int8))


def packet_outcomes(schedule, gamma_nk: np.ndarray, mcs, uniforms: np.ndarray) -> np.ndarray:
    """ACK (True) per subchannel given one uniform draw per subchannel.

    A packet is NAKed when its uniform falls below the error rate, so schemes
    sharing the same draws see coupled outcomes.
    """
    ok = np.zeros(len(schedule.user), dtype=bool)
    on = schedule.user >= 0
    if not on.any():
        return ok
    n = np.flatnonzero(on)
    m = schedule.mcs[n]
    eps = np.minimum(1.0, mcs.a[m] * np.exp(-mcs.b[m] * schedule.power[n] * gamma_nk[n, schedule.user[n]]))
    ok[n] = uniforms[n] >= eps
    return ok


def gen_feedback(state: ChannelState, params: ChannelParams, schedule, mcs, rng=None,
                 uniforms: np.ndarray | None = None) -> FeedbackFrame:
    if uniforms is None:
        uniforms = rng.random(params.N)
    frame = FeedbackFrame.empty(state.slot, params.N, params.K)
    ok = packet_outcomes(schedule, ssg(state, params), mcs, uniforms)
    for n in np.flatnonzero(schedule.user >= 0):
        frame.entries[n, schedule.user[n]] = ACK if ok[n] else NAK
    return frame


def dump_trajectory_csv(states: Sequence[ChannelState], path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["slot", "k", "l", "re", "im"])
        for st in states:
            for k, row in enumerate(st.taps):
                for l, h in enumerate(row):
                    w.writerow([st.slot, k, l, repr(h.real), repr(h.imag)])

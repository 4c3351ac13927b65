"""Per-user particle approximation of the tap posterior given ACK/NAK history.

Each user keeps two weighted particle sets: the lagged set at slot t-d, which
absorbs feedback as it arrives, and the current set at slot t, obtained by
propagating the lagged set through the AR(1) model and used for scheduling.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp

from .channel import NAK, NOT_SCHEDULED, ChannelParams, complex_normal, ssg_from_taps


@dataclass
class Belief:
    particles: np.ndarray          # (S, L) taps at slot t
    weights: np.ndarray            # (S,) nu^{t|t-d}
    lagged_particles: np.ndarray   # (S, L) taps at slot t-d
    lagged_weights: np.ndarray     # (S,) nu^{t-d|t-d}
    resets: int = 0                # all-zero-likelihood events

    @property
    def S(self) -> int:
        return len(self.weights)


def init_belief(params: ChannelParams, S: int, rng: np.random.Generator) -> Belief:
    if S < 1:
        raise ValueError("need at least one particle")
    h = complex_normal(rng, (S, params.L), params.stationary_var)
    w = np.full(S, 1.0 / S)
    return Belief(h, w, h.copy(), w.copy())


def propagate(belief: Belief, params: ChannelParams, rng: np.random.Generator) -> Belief:
    """Draw current particles from the d-step transition of the lagged set."""
    d = params.d
    c = 1.0 - params.alpha
    S, L = belief.lagged_particles.shape
    # alpha * sum_j c^j y_j collapses to one Gaussian with the composed variance
    y = complex_normal(rng, (S, L), params.innovation_var(d))
    return replace(belief, particles=c ** d * belief.lagged_particles + y)


def feedback_likelihood(h: np.ndarray, feedback: np.ndarray, schedule, params: ChannelParams,
                        mcs, log: bool = False):
    """p(f_k | h) for one user's column of feedback; ``h`` is (L,) or (S, L).

    ``schedule`` supplies (mcs, power) for the scheduled subchannels.
    """
    h = np.atleast_2d(h)
    out = np.zeros(len(h))
    idx = np.flatnonzero(feedback != NOT_SCHEDULED)
    if len(idx):
        gam = ssg_from_taps(h, params)[:, idx]  # (S, n_sched)
        m = schedule.mcs[idx]
        expo = -mcs.b[m] * schedule.power[idx] * gam
        log_eps = np.minimum(0.0, np.log(mcs.a[m]) + expo)
        nak = feedback[idx] == NAK
        with np.errstate(divide="ignore"):
            ll = np.where(nak, log_eps, np.log(-np.expm1(log_eps)))
        out = ll.sum(axis=1)
    if log:
        return out if out.shape != (1,) else out[0]
    p = np.exp(out)
    return p if p.shape != (1,) else float(p[0])


def update_weights(belief: Belief, feedback: np.ndarray, schedule, params: ChannelParams,
                   mcs) -> Belief:
    """Bayes step on the lagged set with the user's feedback column for slot t-d."""
    if np.all(feedback == NOT_SCHEDULED):
        return belief
    ll = feedback_likelihood(belief.lagged_particles, feedback, schedule, params, mcs, log=True)
    ll = np.atleast_1d(ll)
    with np.errstate(divide="ignore"):
        logw = np.log(belief.lagged_weights) + ll
    if not np.isfinite(logw.max()):
        S = belief.S
        return replace(belief, lagged_weights=np.full(S, 1.0 / S), resets=belief.resets + 1)
    w = np.exp(logw - logw.max())
    return replace(belief, lagged_weights=w / w.sum())


def reweight_current(belief: Belief, params: ChannelParams, corrected: bool = True) -> Belief:
    """nu^{t|t-d}[i] proportional to sum_j nu^{t-d|t-d}[j] p(h^t[i] | h^{t-d}[j]).

    That sum is the predictive density at h^t[i].  Each h^t[i] was itself drawn
    from the equally weighted transition mixture, so with ``corrected`` the
    density is divided by sum_j p(h^t[i] | h^{t-d}[j]) / S.  Without it the
    prior is counted twice once transition kernels overlap (large S or fast
    fading); with well separated kernels both forms reduce to the lagged weights.
    """
    d = params.d
    var = params.innovation_var(d)
    mean = (1.0 - params.alpha) ** d * belief.lagged_particles  # (S, L)
    with np.errstate(divide="ignore"):
        logprior = np.log(belief.lagged_weights)[None, :]
    S = belief.S
    logw = np.empty(S)
    step = max(1, (1 << 22) // S)   # bound the (rows, S, L) temporary
    for i in range(0, S, step):
        diff = belief.particles[i:i + step, None, :] - mean[None, :, :]   # (rows, S_j, L)
        logk = -(diff.real ** 2 + diff.imag ** 2).sum(axis=2) / var
        logw[i:i + step] = logsumexp(logprior + logk, axis=1)
        if corrected:
            logw[i:i + step] -= logsumexp(logk, axis=1)
    w = np.exp(logw - logw.max())
    return replace(belief, weights=w / w.sum())


def systematic_resample(belief: Belief, rng: np.random.Generator) -> Belief:
    S = belief.S
    u = (rng.random() + np.arange(S)) / S
    idx = np.minimum(np.searchsorted(np.cumsum(belief.lagged_weights), u), S - 1)
    return replace(belief, lagged_particles=belief.lagged_particles[idx].copy(),
                   lagged_weights=np.full(S, 1.0 / S))


def advance_lag(belief: Belief, params: ChannelParams, rng: np.random.Generator) -> Belief:
    """Move the lagged set one slot forward, ready for the next feedback frame.

    With unit delay the current particles already sit at the next lagged slot,
    which keeps particle genealogies intact.
    """
    if params.d == 1:
        return replace(belief, lagged_particles=belief.particles)
    S, L = belief.lagged_particles.shape
    y = complex_normal(rng, (S, L), params.innovation_var(1))
    return replace(belief, lagged_particles=(1.0 - params.alpha) * belief.lagged_particles + y)


def ssg_particles(belief: Belief, params: ChannelParams) -> np.ndarray:
    """gamma_n(h^t[i]) with shape (N, S)."""
    return ssg_from_taps(belief.particles, params).T


def expect_ssg_fn(belief: Belief, params: ChannelParams, n: int, fn) -> float:
    gam = ssg_particles(belief, params)[n]
    return float(np.dot(belief.weights, fn(gam)))


def effective_sample_size(w: np.ndarray) -> float:
    return float(1.0 / np.sum(w ** 2))


def dump_belief_csv(belief: Belief, path):
    """One row per particle: i, weight, lagged_weight, then re/im of each tap."""
    L = belief.particles.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "weight", "lagged_weight"] + [f"{p}{l}" for l in range(L) for p in ("re", "im")])
        for i in range(belief.S):
            taps = [repr(float(x)) for h in belief.particles[i] for x in (h.real, h.imag)]
            w.writerow([i, repr(float(belief.weights[i])), repr(float(belief.lagged_weights[i]))] + taps)


class ParticleTracker:
    """Beliefs for all K users driven by delayed feedback frames.

    Call :meth:`observe` with the frame/schedule pair for slot t-d (or None
    while the delay line is still filling), then read :meth:`distribution`.
    """

    def __init__(self, params: ChannelParams, S: int, rng: np.random.Generator,
                 resample: bool = False, resample_threshold: float = 0.5, corrected: bool = True):
        self.params = params
        self.corrected = corrected
        self.rng = rng
        self.resample = resample
        self.resample_threshold = resample_threshold
        self.beliefs = [init_belief(params, S, rng) for _ in range(params.K)]
        self._primed = False

    @property
    def resets(self) -> int:
        return sum(b.resets for b in self.beliefs)

    def observe(self, frame, schedule, mcs):
        if frame is None:
            return
        p = self.params
        if self._primed:
            self.beliefs = [advance_lag(b, p, self.rng) for b in self.beliefs]
        self._primed = True
        out = []
        for k, b in enumerate(self.beliefs):
            b = update_weights(b, frame.entries[:, k], schedule, p, mcs)
            if self.resample and effective_sample_size(b.lagged_weights) < self.resample_threshold * b.S:
                b = systematic_resample(b, self.rng)
            b = propagate(b, p, self.rng)
            out.append(reweight_current(b, p, self.corrected))
        self.beliefs = out

    def distribution(self):
        from .gsra import SsgDistribution
        return SsgDistribution.from_beliefs(self.beliefs, self.params)

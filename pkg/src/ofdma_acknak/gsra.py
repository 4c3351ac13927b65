"""Greedy joint user/MCS/power allocation by Lagrangian bisection, plus the
exhaustive oracle it is checked against.

Candidates are the (n, k, m) triples, flattened subchannel-major so that the
K*M candidates competing for subchannel n are contiguous and ordered
lexicographically by (k, m).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams, ssg_from_taps
from .mcs import McsEntry, McsTable, UtilitySpec

# floor for mu_min when the budget-edge expectation underflows
MU_FLOOR = 1e-300
# relative tolerance when deciding that two candidates tie on V
V_TIE_RTOL = 1e-12


class ChannelDeadError(ValueError):
    """Every expected SSG is zero, so no power allocation helps."""


class RootSolveError(RuntimeError):
    pass


class EnumerationCapError(ValueError):
    pass


@dataclass
class SsgDistribution:
    """Discrete distribution of gamma[n, k] per user: samples (N, K, S), weights (K, S)."""

    gamma: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        N, K, S = self.gamma.shape
        if self.weights.shape != (K, S):
            raise ValueError(f"weights shape {self.weights.shape} != {(K, S)}")

    @property
    def N(self):
        return self.gamma.shape[0]

    @property
    def K(self):
        return self.gamma.shape[1]

    @property
    def S(self):
        return self.gamma.shape[2]

    def mean(self) -> np.ndarray:
        return np.einsum("nks,ks->nk", self.gamma, self.weights)

    @classmethod
    def point_mass(cls, gamma_nk) -> "SsgDistribution":
        g = np.asarray(gamma_nk, dtype=float)
        return cls(g[:, :, None], np.ones((g.shape[1], 1)))

    @classmethod
    def from_beliefs(cls, beliefs, params: ChannelParams) -> "SsgDistribution":
        gam = np.stack([ssg_from_taps(b.particles, params).T for b in beliefs], axis=1)
        w = np.stack([b.weights for b in beliefs])
        return cls(gam, w)

    @classmethod
    def from_taps(cls, taps, params: ChannelParams, weights=None) -> "SsgDistribution":
        """taps (K, S, L) -> distribution; uniform weights by default."""
        taps = np.asarray(taps)
        K, S, _ = taps.shape
        gam = np.transpose(ssg_from_taps(taps, params), (2, 0, 1))
        if weights is None:
            weights = np.full((K, S), 1.0 / S)
        return cls(gam, weights)


@dataclass(frozen=True)
class SolverConfig:
    x_con: float
    kappa: float | None = None     # absolute; defaults to kappa_rel * mu_max
    kappa_rel: float = 1e-4
    root_tol: float = 1e-9
    max_outer: int = 200
    max_newton: int = 200
    cert_kappa_rel: float = 1e-12  # bracket width at which the gap bound is evaluated

    def __post_init__(self):
        if not self.x_con > 0:
            raise ValueError("x_con must be positive")
        if self.kappa is not None and not self.kappa > 0:
            raise ValueError("kappa must be positive")


@dataclass
class Schedule:
    """Per subchannel: user (-1 when idle), MCS table index (0-based) and power."""

    user: np.ndarray
    mcs: np.ndarray
    power: np.ndarray

    @classmethod
    def idle(cls, N: int) -> "Schedule":
        return cls(np.full(N, -1), np.full(N, -1), np.zeros(N))

    @property
    def N(self):
        return len(self.user)

    @property
    def total_power(self) -> float:
        return float(self.power[self.user >= 0].sum())

    def assignment(self):
        return tuple(zip(self.user.tolist(), self.mcs.tolist()))

    def rows(self, mcs_table: McsTable, slot: int = 0):
        out = []
        for n in range(self.N):
            if self.user[n] >= 0:
                out.append((slot, n, int(self.user[n]), mcs_table[self.mcs[n]].m, float(self.power[n])))
        return out


@dataclass
class GapCertificate:
    """Upper bounds on U* - U_hat for the returned schedule.

    ``bound_limit`` is (mu* - mu_min)(X_con - X_tot^pro(mu*)) in the vanishing-
    bracket limit, zero when every winner set is a singleton at mu*.
    ``dual_gap`` is min over the bracket ends of the weak-duality bound
    mu X_con - sum_n min(0, min V_n(mu)) minus U_hat.  Both are valid, so
    ``bound`` reports the smaller.
    """

    mu_low: float
    mu_high: float
    bound: float
    degenerate: bool
    dual_gap: float = math.nan
    utility: float = math.nan
    bound_limit: float = math.nan

    @property
    def mu_star_interval(self):
        return (self.mu_low, self.mu_high)


@dataclass
class SolverStats:
    root_solves: int = 0
    outer_iterations: int = 0
    trace: list = field(default_factory=list)   # (mu, X_tot^pro(mu)) per bisection step
    mu_min: float = math.nan
    mu_max: float = math.nan
    kappa: float = math.nan
    cert_root_solves: int = 0      # spent refining the certificate, not the schedule
    endpoint_solves: int = 0       # re-evaluations at mu_min when the lower end never moved
    endpoint_sizes: tuple = ()     # |I| of the two endpoint assignments


@dataclass
class Projection:
    mu: float
    winners: np.ndarray     # (N,) flat (k*M + m) or -1
    set_sizes: np.ndarray   # (N,) |S_n(mu)|
    power: np.ndarray       # (N, K*M) P*(mu)
    V: np.ndarray           # (N, K*M)
    x_tot: float

    @property
    def degenerate(self) -> bool:
        return bool(np.all(self.set_sizes <= 1))


class GsraProblem:
    """Precomputed per-slot quantities shared by the greedy solver and the oracle."""

    def __init__(self, dist: SsgDistribution, mcs: McsTable, utility: UtilitySpec,
                 x_con: float, root_tol: float = 1e-9, max_newton: int = 200):
        utility.check_table(mcs)
        self.dist, self.mcs, self.utility = dist, mcs, utility
        self.x_con = float(x_con)
        self.root_tol = root_tol
        self.max_newton = max_newton
        N, K, S = dist.gamma.shape
        M = len(mcs)
        self.N, self.K, self.M = N, K, M
        n, k, m = np.meshgrid(np.arange(N), np.arange(K), np.arange(M), indexing="ij")
        self.cn, self.ck, self.cm = n.ravel(), k.ravel(), m.ravel()
        self.a, self.b, self.r = mcs.a[self.cm], mcs.b[self.cm], mcs.r[self.cm]
        self.egam = dist.mean()                       # (N, K)
        if not np.any(self.egam > 0):
            raise ChannelDeadError("all expected SSGs are zero")
        x0 = (1.0 - np.minimum(self.a, 1.0)) * self.r
        self.u0 = utility.value(x0, self.ck)          # U((1-a) r): utility at zero power
        self.abr = self.a * self.b * self.r
        self.threshold = self.abr * utility.prime(x0, self.ck) * self.egam[self.cn, self.ck]
        if utility.linear:
            with np.errstate(divide="ignore"):
                self.log_coef = np.log(self.abr * utility.prime(np.zeros(self.C), self.ck))
        # with the unit table U(x(P)) = log(1 + P gamma); evaluating it through x
        # loses everything once e^{-P gamma} drops below machine epsilon
        self.caplog = utility.kind == "capacity-log"
        # a deterministic SSG with a linear utility has a closed-form root
        self.closed_form = utility.linear and S == 1
        self.solves = 0

    @property
    def C(self):
        return len(self.cn)

    # -- expectation kernels -------------------------------------------------
    def _rows(self, idx):
        g = self.dist.gamma[self.cn[idx], self.ck[idx]]      # (A, S)
        w = self.dist.weights[self.ck[idx]]                  # (A, S)
        return g, w

    def _log_f(self, P, idx, g, w):
        """log of abr E{U'(x) gamma e^{-bP gamma}} and d/dP of it."""
        b = self.b[idx][:, None]
        if self.utility.linear:
            return self._log_f_linear(P, b, self.log_coef[idx], g, w * g)
        if self.caplog:
            q = g / (1.0 + P[:, None] * g)
            num = (w * q).sum(axis=1)
            with np.errstate(divide="ignore"):
                return np.log(num), -(w * q * q).sum(axis=1) / num
        z = -b * P[:, None] * g
        zmax = z.max(axis=1, keepdims=True)
        es = np.exp(z - zmax)                                # shifted, max term is 1
        wg = w * g
        a, r = self.a[idx][:, None], self.r[idx][:, None]
        e = np.exp(z)
        x = (1.0 - a * e) * r
        up = self.utility.prime(x, self.ck[idx][:, None])
        upp = self.utility.second(x, self.ck[idx][:, None])
        num = (wg * up * es).sum(axis=1)
        dnum = (wg * es * (upp * r * a * b * g * e - b * g * up)).sum(axis=1)
        with np.errstate(divide="ignore"):
            logf = np.log(self.abr[idx]) + zmax[:, 0] + np.log(num)
        return logf, dnum / num

    @staticmethod
    def _log_f_linear(P, b, log_coef, g, wg):
        z = -b * P[:, None] * g
        zmax = z.max(axis=1)
        es = np.exp(z - zmax[:, None])
        num = (wg * es).sum(axis=1)
        with np.errstate(divide="ignore"):
            logf = log_coef + zmax + np.log(num)
        return logf, -b[:, 0] * (wg * g * es).sum(axis=1) / num

    def expected_utility(self, P, idx):
        """E{U((1 - a e^{-bP gamma}) r)} per candidate."""
        P = np.asarray(P, dtype=float)
        out = self.u0[idx].astype(float).copy()
        on = P > 0
        if on.any():
            j = idx[on]
            g, w = self._rows(j)
            e = np.exp(-self.b[j][:, None] * P[on][:, None] * g)
            if self.caplog:
                out[on] = (w * np.log1p(P[on][:, None] * g)).sum(axis=1)
            elif self.utility.linear:
                scale = self.utility.prime(np.zeros(len(j)), self.ck[j])
                eps = np.minimum(1.0, self.a[j][:, None] * e)
                out[on] = scale * self.r[j] * (w * (1.0 - eps)).sum(axis=1)
            else:
                x = (1.0 - np.minimum(1.0, self.a[j][:, None] * e)) * self.r[j][:, None]
                out[on] = (w * self.utility.value(x, self.ck[j][:, None])).sum(axis=1)
        return out

    def mu_bounds(self):
        idx = np.arange(self.C)
        g, w = self._rows(idx)
        logf, _ = self._log_f(np.full(self.C, self.x_con), idx, g, w)
        mu_min = max(math.exp(float(np.min(logf))) if np.isfinite(np.min(logf)) else 0.0, MU_FLOOR)
        mu_max = float(self.threshold.max())
        return mu_min, mu_max

    # -- power root solve -----------------------------------------------------
    def solve(self, mu, idx, lo=None, hi=None, start=None):
        """P*(mu) for candidates ``idx``; ``lo``/``hi`` are optional warm brackets
        and ``start`` an optional first iterate inside them."""
        idx = np.asarray(idx, dtype=int)
        self.solves += len(idx)
        P = np.zeros(len(idx))
        act = np.flatnonzero(mu < self.threshold[idx])
        if len(act) == 0:
            return P
        j = idx[act]
        p = np.zeros(len(j)) if lo is None else np.maximum(np.asarray(lo, dtype=float)[act], 0.0)
        if start is not None:
            p = np.maximum(p, np.asarray(start, dtype=float)[act])
        lo_b = np.zeros(len(j))
        hi_b = np.full(len(j), np.inf) if hi is None else \
            np.asarray(hi, dtype=float)[act] * (1.0 + 1e-6) + 1e-12 * self.x_con
        log_mu = math.log(mu)
        g, w = self._rows(j)
        if self.closed_form:
            g = g[:, 0]
            P[act] = np.maximum((self.log_coef[j] + np.log(g) - log_mu) / (self.b[j] * g), 0.0)
            return P
        phi_tol = 64 * np.finfo(float).eps * (1.0 + abs(log_mu))
        floor = 1e-12 * self.x_con
        pending = np.arange(len(j))
        result = np.empty(len(j))
        linear = self.utility.linear
        if linear:
            bcol, lc, wg = self.b[j][:, None], self.log_coef[j], w * g
        for _ in range(self.max_newton):
            if linear:
                logf, dlog = self._log_f_linear(p, bcol, lc, g, wg)
            else:
                logf, dlog = self._log_f(p, j[pending], g, w)
            phi = logf - log_mu
            above = phi > 0
            lo_b = np.where(above, p, lo_b)
            hi_b = np.where(above, hi_b, p)
            with np.errstate(divide="ignore", invalid="ignore"):
                p_new = p - phi / dlog
            bad = ~np.isfinite(p_new) | (p_new < lo_b) | (p_new > hi_b)
            if bad.any():
                fallback = np.where(np.isfinite(hi_b), 0.5 * (lo_b + hi_b), 2.0 * lo_b + self.x_con)
                p_new = np.where(bad, fallback, p_new)
            # the residual test covers roots so small that phi carries no more digits
            done = ((np.abs(p_new - p) <= self.root_tol * np.maximum(p_new, floor))
                    | (np.abs(phi) <= phi_tol))
            if done.all():
                result[pending] = p_new
                P[act] = result
                return P
            if done.any():
                result[pending[done]] = p_new[done]
                keep = ~done
                pending, p_new, lo_b, hi_b = pending[keep], p_new[keep], lo_b[keep], hi_b[keep]
                g, w = g[keep], w[keep]
                if linear:
                    bcol, lc, wg = bcol[keep], lc[keep], wg[keep]
            p = p_new
        raise RootSolveError(f"power root solve did not converge for {len(pending)} candidates at mu={mu}")

    def project(self, mu, lo=None, hi=None, subset=None, start=None) -> Projection:
        """Evaluate P*(mu), V and the admissible projection I^pro(mu).

        With ``subset`` only those candidates compete; the rest get V = +inf.
        """
        idx = np.arange(self.C) if subset is None else np.asarray(subset)
        P = np.zeros(self.C)
        V = np.full(self.C, np.inf) if subset is not None else np.zeros(self.C)
        if mu < self.threshold[idx].max():
            P[idx] = self.solve(mu, idx, None if lo is None else lo[idx],
                                None if hi is None else hi[idx],
                                None if start is None else start[idx])
        V[idx] = -self.expected_utility(P[idx], idx) + mu * P[idx]
        return self._select(mu, P, V)

    def _select(self, mu, P, V) -> Projection:
        N, KM = self.N, self.K * self.M
        P2, V2 = P.reshape(N, KM), V.reshape(N, KM)
        vmin = V2.min(axis=1)
        on = vmin < 0.0
        ties = (V2 <= (vmin + V_TIE_RTOL * np.abs(vmin))[:, None]) & on[:, None]
        sizes = ties.sum(axis=1)
        win = np.argmin(np.where(ties, P2, np.inf), axis=1)
        win = np.where(on, win, -1)
        x_tot = float(P2[on, win[on]].sum())
        return Projection(mu, win, sizes, P2, V2, x_tot)

    def candidates_of(self, winners) -> np.ndarray:
        """Flat candidate indices for a per-subchannel winner vector (idle skipped)."""
        n = np.flatnonzero(np.asarray(winners) >= 0)
        return n * self.K * self.M + np.asarray(winners)[n]

    def dual_upper(self, proj: Projection) -> float:
        """Weak-duality upper bound on the relaxed (hence integer) optimum."""
        return proj.mu * self.x_con - float(np.minimum(proj.V.min(axis=1), 0.0).sum())


def _bisection_steps(mu_min, mu_max, kappa) -> int:
    if mu_max - mu_min <= kappa:
        return 0
    return math.ceil(math.log2((mu_max - mu_min) / kappa))


class _FixedAllocator:
    """Power allocation for a fixed assignment by the inner bisection with
    lambda-interpolation between the final bracket endpoints.

    P*(c, mu) is cached per (candidate, mu) and always computed from a cold
    start, so every caller sees identical values for identical inputs.
    """

    def __init__(self, prob: GsraProblem, mu_min, mu_max, kappa):
        self.prob, self.mu_min, self.mu_max, self.kappa = prob, mu_min, mu_max, kappa
        self.cache: dict = {}
        self.endpoint_solves = 0

    def _p(self, mu, cands):
        miss = [c for c in cands if (c, mu) not in self.cache]
        if miss:
            vals = self.prob.solve(mu, np.array(miss))
            for c, v in zip(miss, vals):
                self.cache[(c, mu)] = float(v)
        return np.array([self.cache[(c, mu)] for c in cands])

    def __call__(self, cands):
        """Return (powers, expected utility, mu_high) for candidate list ``cands``."""
        prob = self.prob
        cands = [int(c) for c in cands]
        if not cands:
            return np.zeros(0), 0.0, self.mu_max
        lo, hi = self.mu_min, self.mu_max
        P_hi = np.zeros(len(cands))   # P*(mu_max) = 0 for every candidate
        P_lo = None
        while hi - lo > self.kappa:
            mu = 0.5 * (lo + hi)
            P = self._p(mu, cands)
            if P.sum() > prob.x_con:
                lo, P_lo = mu, P
            else:
                hi, P_hi = mu, P
        if P_lo is None:
            before = self.prob.solves
            P_lo = self._p(lo, cands)
            self.endpoint_solves += self.prob.solves - before
        X_lo, X_hi = P_lo.sum(), P_hi.sum()
        lam = (X_lo - prob.x_con) / (X_lo - X_hi) if X_lo != X_hi else 0.0
        lam = min(max(lam, 0.0), 1.0)
        P_hat = lam * P_hi + (1.0 - lam) * P_lo
        util = float(prob.expected_utility(P_hat, np.array(cands)).sum())
        return P_hat, util, hi


def _schedule_from(prob: GsraProblem, cands, powers) -> Schedule:
    sched = Schedule.idle(prob.N)
    for c, p in zip(cands, powers):
        n = prob.cn[c]
        sched.user[n], sched.mcs[n], sched.power[n] = prob.ck[c], prob.cm[c], p
    return sched


def mu_bounds(dist: SsgDistribution, mcs: McsTable, utility: UtilitySpec, x_con: float):
    return GsraProblem(dist, mcs, utility, x_con).mu_bounds()


def _single(dist, n, k, entry: McsEntry, utility, x_con=1.0):
    sub = SsgDistribution(dist.gamma[n:n + 1, k:k + 1], dist.weights[k:k + 1])
    if utility.kind == "weighted-identity":
        utility = UtilitySpec("weighted-identity", (utility.weights[k],))
    return GsraProblem(sub, McsTable([entry]), utility, x_con)


def solve_power(mu, dist: SsgDistribution, n, k, entry: McsEntry, utility: UtilitySpec) -> float:
    prob = _single(dist, n, k, entry, utility)
    if mu > prob.threshold[0]:
        return 0.0
    return float(prob.solve(mu, np.array([0]))[0])


def v_metric(mu, P, dist: SsgDistribution, n, k, entry: McsEntry, utility: UtilitySpec) -> float:
    prob = _single(dist, n, k, entry, utility)
    return float(-prob.expected_utility(np.array([P]), np.array([0]))[0] + mu * P)


def select_winners(mu, dist: SsgDistribution, mcs: McsTable, utility: UtilitySpec) -> Projection:
    return GsraProblem(dist, mcs, utility, 1.0).project(mu)


def expected_utility(schedule: Schedule, dist: SsgDistribution, mcs: McsTable,
                     utility: UtilitySpec) -> float:
    prob = GsraProblem(dist, mcs, utility, max(schedule.total_power, 1.0))
    n = np.flatnonzero(schedule.user >= 0)
    if len(n) == 0:
        return 0.0
    cands = (n * prob.K + schedule.user[n]) * prob.M + schedule.mcs[n]
    return float(prob.expected_utility(schedule.power[n], cands).sum())


def greedy_allocate(dist: SsgDistribution, mcs: McsTable, utility: UtilitySpec,
                    config: SolverConfig, stats: SolverStats | None = None):
    """Bisect the power price until the projected schedule meets the budget.

    Returns the better of the two bracket-end assignments with budget-filling
    powers, together with a certificate bounding the loss to the exhaustive
    optimum.
    """
    prob = GsraProblem(dist, mcs, utility, config.x_con, config.root_tol, config.max_newton)
    stats = stats if stats is not None else SolverStats()
    mu_min, mu_max = prob.mu_bounds()
    kappa = config.kappa if config.kappa is not None else config.kappa_rel * mu_max
    stats.mu_min, stats.mu_max, stats.kappa = mu_min, mu_max, kappa

    lo, hi = mu_min, mu_max
    proj_hi = prob.project(mu_max)       # all powers are zero here, no root solves
    proj_lo = None
    P_at_hi = proj_hi.power.ravel()
    P_at_lo = None
    while hi - lo > kappa:
        if stats.outer_iterations >= config.max_outer:
            raise RootSolveError("outer bisection exceeded max_outer")
        mu = 0.5 * (lo + hi)
        proj = prob.project(mu, P_at_hi, P_at_lo, start=_log_interp(mu, lo, hi, P_at_lo, P_at_hi))
        stats.outer_iterations += 1
        stats.trace.append((mu, proj.x_tot))
        if proj.x_tot > config.x_con:
            lo, proj_lo, P_at_lo = mu, proj, proj.power.ravel()
        else:
            hi, proj_hi, P_at_hi = mu, proj, proj.power.ravel()
    if proj_lo is None:
        before = prob.solves
        proj_lo = prob.project(lo, P_at_hi, None)
        stats.endpoint_solves += prob.solves - before

    options = []
    for proj in (proj_lo, proj_hi):
        # each endpoint schedule gets its own fixed-assignment bisection
        fixed = _FixedAllocator(prob, mu_min, mu_max, kappa)
        cands = prob.candidates_of(proj.winners)
        P_hat, util, _ = fixed(cands)
        stats.endpoint_solves += fixed.endpoint_solves
        options.append((cands, P_hat, util))
    stats.endpoint_sizes = tuple(len(o[0]) for o in options)
    # budget binds for every nonempty assignment, so min Lagrangian == max utility
    best = max(options, key=lambda o: o[2])
    schedule = _schedule_from(prob, best[0], best[1])

    dual = min(prob.dual_upper(proj_lo), prob.dual_upper(proj_hi)) - best[2]
    stats.root_solves += prob.solves
    bound, degenerate = _limit_bound(prob, proj_lo, proj_hi, mu_min, mu_max, config, stats)
    dual = max(0.0, dual)
    cert = GapCertificate(lo, hi, min(bound, dual), degenerate, dual, best[2], bound)
    return schedule, cert


def _log_interp(mu, lo, hi, P_lo, P_hi):
    """First Newton iterate: P*(mu) is close to affine in log mu."""
    if P_lo is None:
        return None
    t = math.log(hi / mu) / math.log(hi / lo)
    return P_hi + t * (P_lo - P_hi)


def _degenerate(a: Projection, b: Projection) -> bool:
    return np.array_equal(a.winners, b.winners) and a.degenerate and b.degenerate


def _limit_bound(prob: GsraProblem, proj_lo, proj_hi, mu_min, mu_max, config, stats):
    """(mu* - mu_min)(X_con - X_tot^pro(mu*)) in the limit of a vanishing bracket.

    A finite bracket leaves X_con - X_tot(mu_high) of order kappa * |dX/dmu|
    even when X_tot is continuous at mu*, so the bracket is shrunk further.
    Over [mu_lo, mu_hi] a candidate's V falls by at most (mu_hi - mu_lo) P(mu_lo),
    which rules out every candidate that cannot win anywhere inside it; the
    remaining few are bisected down to cert_kappa_rel * mu_max.
    """
    if _degenerate(proj_lo, proj_hi):
        return 0.0, True
    lo, hi = proj_lo.mu, proj_hi.mu
    V_hi, P_lo = proj_hi.V.ravel(), proj_lo.power.ravel()
    floor = np.minimum(proj_hi.V.min(axis=1), 0.0)[prob.cn]
    slack = 1e-9 * (np.abs(floor) + 1.0)
    subset = np.flatnonzero(V_hi - (hi - lo) * P_lo <= floor + slack)
    kappa = config.cert_kappa_rel * mu_max
    before = prob.solves
    P_at_lo, P_at_hi = proj_lo.power.ravel(), proj_hi.power.ravel()
    while hi - lo > kappa:
        mu = 0.5 * (lo + hi)
        proj = prob.project(mu, P_at_hi, P_at_lo, subset=subset,
                            start=_log_interp(mu, lo, hi, P_at_lo, P_at_hi))
        if proj.x_tot > prob.x_con:
            lo, proj_lo, P_at_lo = mu, proj, proj.power.ravel()
        else:
            hi, proj_hi, P_at_hi = mu, proj, proj.power.ravel()
    stats.cert_root_solves += prob.solves - before
    if _degenerate(proj_lo, proj_hi):
        return 0.0, True
    return max(0.0, (hi - mu_min) * (prob.x_con - proj_hi.x_tot)), False


def brute_force_allocate(dist: SsgDistribution, mcs: McsTable, utility: UtilitySpec,
                         config: SolverConfig, cap: int = 5000):
    """Enumerate every admissible assignment; returns (schedule, expected utility)."""
    prob = GsraProblem(dist, mcs, utility, config.x_con, config.root_tol, config.max_newton)
    KM = prob.K * prob.M
    if (KM + 1) ** prob.N > cap:
        raise EnumerationCapError(
            f"{(KM + 1) ** prob.N} assignments exceed the cap of {cap}; use greedy_allocate")
    mu_min, mu_max = prob.mu_bounds()
    kappa = config.kappa if config.kappa is not None else config.kappa_rel * mu_max
    fixed = _FixedAllocator(prob, mu_min, mu_max, kappa)
    best = (np.zeros(0, dtype=int), np.zeros(0), 0.0)
    for choice in itertools.product(range(-1, KM), repeat=prob.N):
        cands = prob.candidates_of(np.array(choice))
        if len(cands) == 0:
            continue
        P_hat, util, _ = fixed(cands)
        if util > best[2]:
            best = (cands, P_hat, util)
    return _schedule_from(prob, best[0], best[1]), best[2]


def complexity_bound(N, K, M, mu_min, mu_max, kappa) -> int:
    """ceil(log2((mu_max - mu_min)/kappa)) * N (KM + 2) root solves."""
    return _bisection_steps(mu_min, mu_max, kappa) * N * (K * M + 2)

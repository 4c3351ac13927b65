"""Acceptance criteria 1-9.  Each test prints one PASS/FAIL line.

Criteria 4, 5, 6, 7 and 9 run full Monte-Carlo experiments and take tens of
minutes on one core; they carry the ``slow`` marker but run by default.
"""
import math
import time

import numpy as np
import pytest

from ofdma_acknak.belief import ParticleTracker
from ofdma_acknak.channel import ACK, NAK, ChannelParams, FeedbackFrame
from ofdma_acknak.engine import RunConfig, aggregate, records_csv, run, write_records
from ofdma_acknak.gsra import (GsraProblem, Schedule, SolverConfig, SolverStats, SsgDistribution,
                               brute_force_allocate, complexity_bound, greedy_allocate)
from ofdma_acknak.mcs import UtilitySpec, qam_table

from oracles import radial_grid_predictive

ID = UtilitySpec()
C4 = dict(N=8, K=4, M=4, snr_db=10.0, alpha=1e-3, S=30, realizations=100, T_slots=100, T_warmup=50)


def _random_belief(rng, N_max, K_max, S_max):
    N, K, S = (int(rng.integers(1, x + 1)) for x in (N_max, K_max, S_max))
    return SsgDistribution(rng.exponential(size=(N, K, S)), rng.dirichlet(np.ones(S), size=K))


def test_c1_oracle_equivalence(report):
    rng = np.random.default_rng(2024)
    t0 = time.time()
    worst_low, violations, deg_bad = 0.0, 0, 0
    for _ in range(100):
        dist = _random_belief(rng, 3, 2, 6)
        mcs = qam_table(int(rng.integers(1, 3)))
        cfg = SolverConfig(float(rng.uniform(0.5, 30.0)) * dist.N, kappa_rel=1e-6)
        _, cert = greedy_allocate(dist, mcs, ID, cfg)
        _, u_bf = brute_force_allocate(dist, mcs, ID, cfg)
        diff = u_bf - cert.utility
        worst_low = min(worst_low, diff)
        if not -1e-9 <= diff <= cert.bound + 1e-12:
            violations += 1
        if cert.degenerate and cert.bound != 0.0:
            deg_bad += 1
    dt = time.time() - t0
    ok = violations == 0 and deg_bad == 0 and dt < 60
    report(1, ok, f"violations={violations} degenerate_nonzero={deg_bad} "
                  f"min(bf-greedy)={worst_low:.2e} runtime={dt:.1f}s")
    assert ok


def test_c2_xtot_monotone(report):
    rng = np.random.default_rng(7)
    worst = -np.inf
    for _ in range(20):
        dist = _random_belief(rng, 6, 4, 10)
        mcs = qam_table(int(rng.integers(1, 5)))
        prob = GsraProblem(dist, mcs, ID, float(rng.uniform(1.0, 30.0)) * dist.N)
        lo, hi = prob.mu_bounds()
        xs = [prob.project(mu).x_tot for mu in np.linspace(lo, hi, 50)]
        worst = max(worst, float(np.max(np.diff(xs))))
    ok = worst <= 1e-9
    report(2, ok, f"largest step of X_tot along the grid={worst:.2e}")
    assert ok


SCRIPT = [(0, 2.0, True), (0, 2.0, True), (1, 4.0, False), (0, 1.0, True), (2, 6.0, False),
          (0, 3.0, True), (1, 3.0, True), (1, 5.0, False), (0, 2.0, True), (0, 0.5, False),
          (1, 4.0, True), (2, 8.0, False), (0, 2.0, True), (0, 1.5, True), (1, 3.0, False),
          (0, 2.5, True), (1, 6.0, True), (2, 6.0, False), (0, 1.0, True), (1, 4.0, True)]


def _filter_moments(seed, params, mcs):
    tr = ParticleTracker(params, 1000, np.random.default_rng(seed))
    for t, (m, P, ack) in enumerate(SCRIPT):
        sched = Schedule(np.array([0]), np.array([m]), np.array([P]))
        tr.observe(FeedbackFrame(t + 1, np.array([[ACK if ack else NAK]], dtype=np.int8)), sched, mcs)
    g, w = tr.distribution().gamma[0, 0], tr.beliefs[0].weights
    mu = float(w @ g)
    return mu, float(w @ (g - mu) ** 2)


def test_c3_particle_filter_consistency(report):
    # A single S=1000 filter has a few percent Monte-Carlo spread in its
    # variance estimate, so the criterion is judged on the average over 16
    # independent filters; the per-filter pass rate is reported alongside.
    t0 = time.time()
    params = ChannelParams(N=1, L=1, K=1, alpha=1e-3, d=1)
    mcs = qam_table(4)
    ref_mean, ref_var = radial_grid_predictive(params.alpha, SCRIPT, mcs, n_grid=4096)
    est = np.array([_filter_moments(s, params, mcs) for s in range(16)])
    rel = est.mean(axis=0) / np.array([ref_mean, ref_var]) - 1
    single = np.abs(est / np.array([ref_mean, ref_var]) - 1) <= 0.05
    dt = time.time() - t0
    ok = bool(np.all(np.abs(rel) <= 0.05)) and dt < 60
    report(3, ok, f"mean err={rel[0]:+.2%} var err={rel[1]:+.2%} (avg of 16 filters); "
                  f"single-filter pass rate={single.all(axis=1).mean():.0%} runtime={dt:.1f}s")
    assert ok


@pytest.fixture(scope="module")
def c4_run():
    cfg = RunConfig(**C4)
    recs = run(cfg)
    return cfg, recs, aggregate(recs, cfg)


@pytest.mark.slow
def test_c4_scheme_ordering(report, c4_run):
    _, _, a = c4_run
    m = {s: a[s]["mean"] for s in a}
    se = {s: a[s]["stderr_pooled"] for s in a}

    def gap_ok(lo, hi):
        return m[hi] - m[lo] > 2 * math.hypot(se[lo], se[hi])
    ok = gap_ok("fprus", "proposed") and gap_ok("proposed", "cgg") and \
        m["cgg"] <= m["ncgg"] + 2 * math.hypot(se["cgg"], se["ncgg"])
    detail = " ".join(f"{s}={m[s]:.3f}(se {se[s]:.3f}, cluster se {a[s]['stderr']:.3f})"
                      for s in ("fprus", "proposed", "cgg", "ncgg"))
    report(4, ok, detail)
    assert ok


@pytest.fixture(scope="module")
def c5_run():
    cfg = RunConfig(N=32, K=8, M=15, snr_db=10.0, S=30, alpha=1e-4, realizations=100,
                    T_slots=100, T_warmup=50)
    recs = run(cfg)
    return cfg, recs, aggregate(recs, cfg)


@pytest.mark.slow
def test_c5_goodput_ratios(report, c5_run):
    _, _, a = c5_run
    r_cgg = a["proposed"]["mean"] / a["cgg"]["mean"]
    r_fp = a["proposed"]["mean"] / a["fprus"]["mean"]
    ok = 0.82 <= r_cgg <= 1.0 and r_fp >= 1.45
    report(5, ok, f"proposed/cgg={r_cgg:.4f} proposed/fprus={r_fp:.4f}")
    assert ok


@pytest.mark.slow
def test_c6_gap_magnitude(report, c5_run):
    cfg, recs, a = c5_run
    post = [r for r in recs if r.scheme == "proposed" and r.slot > cfg.T_warmup]
    ratio = a["proposed"]["mean_gap_bound"] / a["proposed"]["mean"]
    ratio_limit = float(np.mean([r.gap_limit for r in post])) / a["proposed"]["mean"]
    ok = ratio <= 1e-4
    report(6, ok, f"mean bound/goodput={ratio:.3e} (bisection-limit term alone {ratio_limit:.3e})")
    assert ok


@pytest.mark.slow
def test_c7_flatness_in_K(report):
    stats = {}
    for K in (2, 4, 8):
        cfg = RunConfig(**{**C4, "K": K, "schemes": ("proposed", "fprus")})
        stats[K] = aggregate(run(cfg), cfg)
    ok, parts = True, []
    for s in ("fprus", "proposed"):
        parts.append(s + " " + " ".join(f"K={K}:{stats[K][s]['mean']:.3f}+-{stats[K][s]['stderr']:.3f}"
                                        for K in stats))
    Ks = sorted(stats)
    for i, K1 in enumerate(Ks):
        for K2 in Ks[i + 1:]:
            a, b = stats[K1]["fprus"], stats[K2]["fprus"]
            ok &= abs(a["mean"] - b["mean"]) <= 2 * math.hypot(a["stderr"], b["stderr"])
    for K1, K2 in zip(Ks, Ks[1:]):
        a, b = stats[K1]["proposed"], stats[K2]["proposed"]
        ok &= b["mean"] >= a["mean"] - 2 * math.hypot(a["stderr"], b["stderr"])
    report(7, ok, "; ".join(parts))
    assert ok


def test_c8_bisection_complexity(report):
    rng = np.random.default_rng(11)
    bad_iter = bad_identity = bad_formula = full = 0
    for i in range(20):
        N, K, M, S = 32, 8, 15, 30
        dist = SsgDistribution(rng.exponential(size=(N, K, S)), rng.dirichlet(np.ones(S), size=K))
        st = SolverStats()
        greedy_allocate(dist, qam_table(M), ID, SolverConfig(float(rng.uniform(10, 1000)),
                                                             kappa_rel=10.0 ** -rng.integers(3, 9)), st)
        iters = math.ceil(math.log2((st.mu_max - st.mu_min) / st.kappa))
        bad_iter += st.outer_iterations != iters
        formula = complexity_bound(N, K, M, st.mu_min, st.mu_max, st.kappa)
        core = st.root_solves - st.endpoint_solves
        bad_identity += core != iters * (N * K * M + sum(st.endpoint_sizes))
        if min(st.endpoint_sizes) == N:
            full += 1
            bad_formula += core != formula
        else:
            bad_formula += core > formula
    ok = bad_iter == 0 and bad_identity == 0 and bad_formula == 0
    report(8, ok, f"iteration mismatches={bad_iter} count identity failures={bad_identity} "
                  f"formula mismatches={bad_formula} (fully scheduled instances: {full}/20)")
    assert ok


@pytest.mark.slow
def test_c9_determinism(report, c4_run, tmp_path):
    cfg, recs, _ = c4_run
    write_records(tmp_path / "a.csv", recs, cfg)
    write_records(tmp_path / "b.csv", run(cfg), cfg)
    same = (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    ok = same
    report(9, ok, f"byte-identical rerun of the criterion 4 experiment: {same}")
    assert ok

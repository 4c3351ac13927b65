"""Slot-level simulation loop, paired across schemes, with aggregation and writers."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .baselines import SCHEMES, cgg_allocate, fprus_allocate, ncgg_allocate
from .belief import ParticleTracker
from .channel import ChannelParams, gen_feedback, init_state, packet_outcomes, ssg, step
from .gsra import SolverConfig, greedy_allocate
from .mcs import McsTable, UtilitySpec, db_to_linear, qam_table

WORKERS_ENV = "OFDMA_ACKNAK_WORKERS"
RECORD_COLUMNS = ("realization", "slot", "scheme", "goodput_expected", "goodput_realized",
                  "total_power", "gap_bound")


@dataclass(frozen=True)
class RunConfig:
    N: int = 32
    K: int = 8
    L: int = 2
    M: int = 15
    alpha: float = 1e-3
    d: int = 1
    S: int = 30
    snr_db: float = 10.0
    x_con: float | None = None      # overrides snr_db when set
    T_slots: int = 100
    T_warmup: int = 50
    realizations: int = 500
    seed: int = 0
    schemes: tuple = SCHEMES
    S_genie: int = 100
    kappa_rel: float = 1e-4
    root_tol: float = 1e-9
    resample: bool = False
    utility: str = "identity"

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(self.schemes))
        for name in ("N", "K", "L", "M", "d", "S", "T_slots", "realizations", "S_genie"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0 <= self.T_warmup < self.T_slots:
            raise ValueError("need 0 <= T_warmup < T_slots")
        if not self.schemes or any(s not in SCHEMES for s in self.schemes):
            raise ValueError(f"schemes must be a nonempty subset of {SCHEMES}")
        if len(set(self.schemes)) != len(self.schemes):
            raise ValueError("duplicate scheme")
        if self.x_con is not None and not self.x_con > 0:
            raise ValueError("x_con must be positive")
        if self.utility not in ("identity", "capacity-log"):
            raise ValueError("utility must be identity or capacity-log")
        ChannelParams(self.N, self.L, self.K, self.alpha, self.d)

    @property
    def budget(self) -> float:
        return self.x_con if self.x_con is not None else db_to_linear(self.snr_db) * self.N

    @property
    def channel(self) -> ChannelParams:
        return ChannelParams(self.N, self.L, self.K, self.alpha, self.d)

    def mcs_table(self) -> McsTable:
        if self.utility == "capacity-log":
            from .mcs import capacity_table
            return capacity_table()
        return qam_table(self.M)

    def solver(self) -> SolverConfig:
        return SolverConfig(self.budget, kappa_rel=self.kappa_rel, root_tol=self.root_tol)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["schemes"] = list(self.schemes)
        return d


@dataclass
class SlotRecord:
    realization: int
    slot: int
    scheme: str
    goodput_expected: float
    goodput_realized: float
    total_power: float
    gap_bound: float | None = None
    gap_limit: float | None = None   # diagnostic only, not persisted


def _streams(seed: int, realization: int, K: int):
    root = np.random.SeedSequence(seed, spawn_key=(realization,))
    chan, fb, tracker, cgg, fprus = root.spawn(5)
    return ([np.random.default_rng(s) for s in chan.spawn(K)], np.random.default_rng(fb),
            np.random.default_rng(tracker), np.random.default_rng(cgg), np.random.default_rng(fprus))


def _goodputs(schedule, gamma_nk, mcs, uniforms):
    on = schedule.user >= 0
    if not on.any():
        return 0.0, 0.0
    n = np.flatnonzero(on)
    m = schedule.mcs[n]
    eps = np.minimum(1.0, mcs.a[m] * np.exp(-mcs.b[m] * schedule.power[n] * gamma_nk[n, schedule.user[n]]))
    ok = packet_outcomes(schedule, gamma_nk, mcs, uniforms)
    return float(((1.0 - eps) * mcs.r[m]).sum()), float(mcs.r[schedule.mcs[ok]].sum())


def run_realization(config: RunConfig, realization: int) -> list[SlotRecord]:
    params = config.channel
    mcs = config.mcs_table()
    utility = UtilitySpec(config.utility)
    solver = config.solver()
    chan_rngs, fb_rng, tr_rng, cgg_rng, fp_rng = _streams(config.seed, realization, params.K)
    tracker = ParticleTracker(params, config.S, tr_rng, resample=config.resample) \
        if "proposed" in config.schemes else None
    history = deque(maxlen=params.d + 1)   # true states at t-d .. t
    pending = deque()                      # (frame, schedule) awaiting delivery
    records = []
    state = None
    for t in range(1, config.T_slots + 1):
        state = init_state(params, chan_rngs, slot=t) if state is None else step(state, params, chan_rngs)
        history.append(state)
        gamma = ssg(state, params)
        uniforms = fb_rng.random(params.N)
        for scheme in config.schemes:
            gap = limit = None
            if scheme == "proposed":
                if len(pending) == params.d:
                    tracker.observe(*pending.popleft(), mcs)
                sched, cert = greedy_allocate(tracker.distribution(), mcs, utility, solver)
                gap, limit = cert.bound, cert.bound_limit
                pending.append((gen_feedback(state, params, sched, mcs, uniforms=uniforms), sched))
            elif scheme == "cgg":
                lagged = history[0] if len(history) == params.d + 1 else None
                sched, _ = cgg_allocate(lagged, params, mcs, utility, solver, config.S_genie, cgg_rng)
            elif scheme == "ncgg":
                sched, _ = ncgg_allocate(state, params, mcs, utility, solver)
            else:
                sched = fprus_allocate(params, mcs, utility, solver, fp_rng)
            exp_g, real_g = _goodputs(sched, gamma, mcs, uniforms)
            records.append(SlotRecord(realization, t, scheme, exp_g, real_g, sched.total_power, gap, limit))
    return records


def _worker(args):
    return run_realization(*args)


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer")


def run(config: RunConfig, workers: int | None = None, progress=None) -> list[SlotRecord]:
    """All realizations, merged in realization order."""
    workers = worker_count() if workers is None else workers
    jobs = [(config, r) for r in range(config.realizations)]
    out = []
    if workers <= 1:
        for i, job in enumerate(jobs):
            out.extend(_worker(job))
            if progress:
                progress(i + 1, len(jobs))
        return out
    with ProcessPoolExecutor(workers) as ex:
        for i, recs in enumerate(ex.map(_worker, jobs)):
            out.extend(recs)
            if progress:
                progress(i + 1, len(jobs))
    return out


def aggregate(records, config: RunConfig) -> dict:
    """Per-scheme statistics over post-warmup slots.

    ``stderr`` is the standard error across per-realization means, since slots
    within one realization are correlated; ``stderr_pooled`` treats every slot
    as independent.
    """
    out = {}
    for scheme in config.schemes:
        rows = [r for r in records if r.scheme == scheme and r.slot > config.T_warmup]
        if not rows:
            continue
        g = np.array([r.goodput_expected for r in rows])
        per = {}
        for r in rows:
            per.setdefault(r.realization, []).append(r.goodput_expected)
        means = np.array([np.mean(v) for v in per.values()])
        gaps = [r.gap_bound for r in rows if r.gap_bound is not None]
        out[scheme] = {
            "mean": float(g.mean()),
            "stderr": float(means.std(ddof=1) / np.sqrt(len(means))) if len(means) > 1 else 0.0,
            "stderr_pooled": float(g.std(ddof=1) / np.sqrt(len(g))) if len(g) > 1 else 0.0,
            "mean_realized": float(np.mean([r.goodput_realized for r in rows])),
            "mean_power": float(np.mean([r.total_power for r in rows])),
            "mean_gap_bound": float(np.mean(gaps)) if gaps else None,
            "n_slots": len(rows),
            "n_realizations": len(means),
        }
    return out


def _fmt(x):
    return "" if x is None else repr(float(x))


def records_csv(records, header: dict | None = None) -> str:
    buf = io.StringIO()
    for k, v in (header or {}).items():
        buf.write(f"# {k} = {json.dumps(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_COLUMNS)
    for r in records:
        w.writerow([r.realization, r.slot, r.scheme, _fmt(r.goodput_expected),
                    _fmt(r.goodput_realized), _fmt(r.total_power), _fmt(r.gap_bound)])
    return buf.getvalue()


def read_records(path) -> list[SlotRecord]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        out.append(SlotRecord(int(row["realization"]), int(row["slot"]), row["scheme"],
                              float(row["goodput_expected"]), float(row["goodput_realized"]),
                              float(row["total_power"]),
                              float(row["gap_bound"]) if row["gap_bound"] else None))
    return out


def write_atomic(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_records(path, records, config: RunConfig):
    header = {"config": config.as_dict(), "seed": config.seed,
              "goodput_for_comparisons": "goodput_expected"}
    write_atomic(path, records_csv(records, header))



"""OFDMA downlink scheduling from ACK/NAK feedback: particle-filter channel
tracking, greedy user/MCS/power allocation and genie/random baselines."""
from .channel import ChannelParams, ChannelState, FeedbackFrame, gen_feedback, init_state, ssg, step
from .mcs import McsEntry, McsTable, UtilitySpec, capacity_table, error_rate, goodput, qam_table
from .belief import Belief, ParticleTracker
from .gsra import (GapCertificate, Schedule, SolverConfig, SolverStats, SsgDistribution,
                   brute_force_allocate, greedy_allocate, mu_bounds)
from .baselines import cgg_allocate, fprus_allocate, ncgg_allocate
from .engine import RunConfig, SlotRecord, aggregate, run, run_realization

__all__ = [
    "ChannelParams", "ChannelState", "FeedbackFrame", "gen_feedback", "init_state", "ssg", "step",
    "McsEntry", "McsTable", "UtilitySpec", "capacity_table", "error_rate", "goodput", "qam_table",
    "Belief", "ParticleTracker",
    "GapCertificate", "Schedule", "SolverConfig", "SolverStats", "SsgDistribution",
    "brute_force_allocate", "greedy_allocate", "mu_bounds",
    "cgg_allocate", "fprus_allocate", "ncgg_allocate",
    "RunConfig", "SlotRecord", "aggregate", "run", "run_realization",
]

"""Modulation-and-coding table, packet error model and utility functions."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

# capacity-log stays finite by keeping its argument this far below 1
CAPACITY_EPS = 1e-12


@dataclass(frozen=True)
class McsEntry:
    m: int
    r: float
    a: float
    b: float

    def __post_init__(self):
        if not (self.r > 0 and self.a > 0 and self.b > 0):
            raise ValueError(f"MCS {self.m}: r, a, b must be positive, got {self}")


class McsTable:
    """Ordered collection of MCS entries with array views for vectorized use."""

    def __init__(self, entries: Sequence[McsEntry]):
        entries = tuple(entries)
        if not entries:
            raise ValueError("MCS table is empty")
        for prev, cur in zip(entries, entries[1:]):
            if cur.r <= prev.r:
                raise ValueError("MCS rates must be strictly increasing")
        self.entries = entries
        self.r = np.array([e.r for e in entries], dtype=float)
        self.a = np.array([e.a for e in entries], dtype=float)
        self.b = np.array([e.b for e in entries], dtype=float)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other):
        return isinstance(other, McsTable) and self.entries == other.entries

    def __repr__(self):
        return f"McsTable(M={len(self)})"

    def head(self, M: int) -> "McsTable":
        if not 1 <= M <= len(self):
            raise ValueError(f"M={M} outside 1..{len(self)}")
        return McsTable(self.entries[:M])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["m", "r", "a", "b"])
            for e in self.entries:
                w.writerow([e.m, repr(e.r), repr(e.a), repr(e.b)])

    @classmethod
    def from_csv(cls, path) -> "McsTable":
        rows = []
        with open(Path(path), newline="") as fh:
            for row in csv.DictReader(fh):
                rows.append(McsEntry(int(row["m"]), float(row["r"]),
                                     float(row["a"]), float(row["b"])))
        return cls(rows)


def qam_table(M: int = 15) -> McsTable:
    """Uncoded 2^(m+1)-QAM: r_m = m+1, a_m = 1, b_m = 1.5/(2^(m+1)-1)."""
    return McsTable([McsEntry(m, float(m + 1), 1.0, 1.5 / (2 ** (m + 1) - 1))
                     for m in range(1, M + 1)])


def capacity_table() -> McsTable:
    """Single-entry table under which goodput equals 1 - exp(-P*gamma)."""
    return McsTable([McsEntry(1, 1.0, 1.0, 1.0)])


def error_rate(entry: McsEntry, P, gamma):
    return np.minimum(1.0, entry.a * np.exp(-entry.b * np.asarray(P) * np.asarray(gamma)))


def goodput(entry: McsEntry, P, gamma):
    return (1.0 - error_rate(entry, P, gamma)) * entry.r


UTILITY_KINDS = ("identity", "weighted-identity", "capacity-log")


@dataclass(frozen=True)
class UtilitySpec:
    """Concave utility of goodput. ``weights`` holds one entry per user for the
    weighted kind; user indices are passed alongside goodputs as ``k``."""

    kind: str = "identity"
    weights: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in UTILITY_KINDS:
            raise ValueError(f"unknown utility kind {self.kind!r}")
        if self.kind == "weighted-identity":
            if not self.weights or any(w <= 0 for w in self.weights):
                raise ValueError("weighted utility needs positive per-user weights")

    def check_table(self, mcs: McsTable):
        if self.kind == "capacity-log":
            e = mcs.entries
            if len(e) != 1 or (e[0].r, e[0].a, e[0].b) != (1.0, 1.0, 1.0):
                raise ValueError("capacity-log utility requires the single-entry table r=a=b=1")

    def _w(self, k):
        return np.asarray(self.weights, dtype=float)[np.asarray(k)]

    # The array methods below take goodput g and user index k (broadcastable).
    def value(self, g, k=0):
        g = np.asarray(g, dtype=float)
        if self.kind == "identity":
            return g
        if self.kind == "weighted-identity":
            return self._w(k) * g
        x = np.minimum(g, 1.0 - CAPACITY_EPS)
        return np.log1p(-np.log1p(-x))

    def prime(self, g, k=0):
        g = np.asarray(g, dtype=float)
        if self.kind == "identity":
            return np.ones_like(g)
        if self.kind == "weighted-identity":
            return self._w(k) * np.ones_like(g)
        x = np.minimum(g, 1.0 - CAPACITY_EPS)
        return 1.0 / ((1.0 - x) * (1.0 - np.log1p(-x)))

    def second(self, g, k=0):
        g = np.asarray(g, dtype=float)
        if self.kind != "capacity-log":
            return np.zeros_like(g)
        x = np.minimum(g, 1.0 - CAPACITY_EPS)
        s = 1.0 - np.log1p(-x)
        # convex in x (though concave in power once composed with the error model)
        return (s - 1.0) / ((1.0 - x) * s) ** 2

    @property
    def linear(self) -> bool:
        return self.kind != "capacity-log"


def _check_domain(spec: UtilitySpec, g):
    g = np.asarray(g, dtype=float)
    if np.any(g < 0):
        raise ValueError("goodput must be nonnegative")
    if spec.kind == "capacity-log" and np.any(g >= 1.0):
        raise ValueError("capacity-log utility is defined on [0, 1)")


def utility(spec: UtilitySpec, g, k=0):
    _check_domain(spec, g)
    out = spec.value(g, k)
    return float(out) if np.ndim(out) == 0 else out


def utility_prime(spec: UtilitySpec, g, k=0):
    _check_domain(spec, g)
    out = spec.prime(g, k)
    return float(out) if np.ndim(out) == 0 else out


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


__all__ = [
    "McsEntry", "McsTable", "qam_table", "capacity_table", "error_rate", "goodput",
    "UtilitySpec", "utility", "utility_prime", "db_to_linear", "CAPACITY_EPS",
]

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ofdma_acknak.mcs import (McsEntry, McsTable, UtilitySpec, capacity_table, error_rate, goodput,
                              qam_table, utility, utility_prime)

E1 = McsEntry(1, 2.0, 1.0, 0.5)


def test_error_rate_examples():
    assert error_rate(E1, 0.0, 1.0) == 1.0
    assert error_rate(E1, 10.0, 1.0) == pytest.approx(0.006738, abs=1e-6)
    assert error_rate(E1, 1e6, 1.0) == 0.0


def test_goodput_examples():
    assert goodput(E1, 0.0, 1.0) == 0.0
    assert goodput(E1, 2 * math.log(2), 1.0) == pytest.approx(1.0, rel=1e-12)
    e = McsEntry(2, 3.0, 0.4, 0.2)
    assert goodput(e, 5.0, 0.0) == pytest.approx(0.6 * 3.0)


def test_error_rate_clipped_for_large_prefactor():
    e = McsEntry(1, 1.0, 3.0, 1.0)
    assert error_rate(e, 0.1, 1.0) == 1.0


def test_qam_table():
    t = qam_table()
    assert len(t) == 15
    assert np.array_equal(t.r, np.arange(2, 17))
    assert np.all(np.diff(t.b) < 0)
    assert t[0].b == 0.5 and t[1].b == pytest.approx(1.5 / 7)
    assert np.all(t.a == 1.0)


def test_table_validation():
    with pytest.raises(ValueError):
        McsTable([McsEntry(1, 2.0, 1, 1), McsEntry(2, 2.0, 1, 1)])
    with pytest.raises(ValueError):
        McsEntry(1, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        McsTable([])


def test_csv_roundtrip(tmp_path):
    t = qam_table(5)
    t.to_csv(tmp_path / "mcs.csv")
    assert McsTable.from_csv(tmp_path / "mcs.csv") == t


def test_utility_examples():
    assert utility(UtilitySpec(), 3.7) == 3.7
    w = UtilitySpec("weighted-identity", (1.0, 2.0))
    assert utility(w, 1.5, k=1) == 3.0
    assert utility_prime(w, 0.3, k=1) == 2.0
    assert utility_prime(UtilitySpec(), 5.0) == 1.0
    cap = UtilitySpec("capacity-log")
    assert utility(cap, 0.0) == 0.0
    assert utility_prime(cap, 0.0) == pytest.approx(1.0)


def test_utility_domain_errors():
    with pytest.raises(ValueError):
        utility(UtilitySpec("capacity-log"), 1.0)
    with pytest.raises(ValueError):
        utility(UtilitySpec(), -0.1)
    with pytest.raises(ValueError):
        UtilitySpec("weighted-identity", ())
    with pytest.raises(ValueError):
        UtilitySpec("bogus")


def test_capacity_log_requires_unit_table():
    UtilitySpec("capacity-log").check_table(capacity_table())
    with pytest.raises(ValueError):
        UtilitySpec("capacity-log").check_table(qam_table(2))


def test_capacity_log_is_log_capacity_in_power():
    # with r = a = b = 1 the goodput is 1 - e^{-P gamma}, so U = log(1 + P gamma)
    P, g = 3.0, 0.7
    x = goodput(capacity_table()[0], P, g)
    assert utility(UtilitySpec("capacity-log"), x) == pytest.approx(math.log1p(P * g))


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 0.99), st.sampled_from(["identity", "capacity-log"]))
def test_prime_matches_finite_difference(x, kind):
    spec = UtilitySpec(kind)
    h = 1e-6 * max(1e-3, min(x, 1 - x))
    fd = (spec.value(x + h) - spec.value(x - h)) / (2 * h) if x > h else (spec.value(x + h) - spec.value(x)) / h
    assert spec.prime(x) == pytest.approx(fd, rel=1e-5)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 0.98))
def test_capacity_second_derivative(x):
    spec = UtilitySpec("capacity-log")
    h = 1e-6
    fd = (spec.prime(x + h) - spec.prime(x - h)) / (2 * h) if x > h else (spec.prime(x + h) - spec.prime(x)) / h
    assert spec.second(x) == pytest.approx(fd, rel=1e-4, abs=1e-6)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 14), st.floats(0.01, 5.0), st.floats(0.0, 50.0), st.floats(0.01, 10.0))
def test_error_rate_monotone(m, gamma, P, dP):
    e = qam_table()[m]
    e0, e1 = error_rate(e, P, gamma), error_rate(e, P + dP, gamma)
    assert 0.0 <= e1 <= e0 <= 1.0
    if e0 < 1.0 and e0 > 1e-300:
        assert e1 < e0
    assert 0.0 <= goodput(e, P, gamma) <= e.r


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 14), st.floats(0.05, 5.0), st.sampled_from(["identity", "capacity-log"]))
def test_utility_concave_in_power(m, gamma, kind):
    spec = UtilitySpec(kind)
    e = capacity_table()[0] if kind == "capacity-log" else qam_table()[m]
    P = np.linspace(0.0, 30.0, 301)
    u = spec.value(goodput(e, P, gamma))
    assert np.all(np.diff(u, 2) <= 1e-6)

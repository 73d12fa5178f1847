import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from derrel.indices import (
    AifHistogram,
    Commercial,
    SystemSample,
    compare_example,
    experienced_indices,
    pool_aif,
)
from derrel.residential import ResidenceMetrics


def test_case2_hand_values():
    # customers 1-5 on LP1 (3 f/yr, 5 h/yr), 6-10 on LP2 (2 f/yr, 10 h/yr);
    # zeroing 4, 5, 9, 10 leaves 3*3 + 3*2 = 15 interruptions and 3*5 + 3*10 = 45 hours over 10 customers
    aif = np.array([3, 3, 3, 0, 0, 2, 2, 2, 0, 0], dtype=float)
    aid = np.array([5, 5, 5, 0, 0, 10, 10, 10, 0, 0], dtype=float)
    assert experienced_indices(SystemSample(aif, aid)) == (1.5, 4.5)


def test_compare_example():
    r = compare_example()
    assert (r.saifi_p, r.saidi_p) == (2.5, 7.5)
    assert (r.saifi_e_case1, r.saidi_e_case1) == (2.5, 7.5)
    assert (r.saifi_e_case2, r.saidi_e_case2) == (1.5, 4.5)
    empty = compare_example([])
    assert (empty.saifi_e_case2, empty.saidi_e_case2) == (2.5, 7.5)
    assert set(r.to_dict()) == {"saifi_p", "saidi_p", "saifi_e_case1", "saidi_e_case1", "saifi_e_case2", "saidi_e_case2"}


def test_experienced_trivial_and_commercial():
    assert experienced_indices(SystemSample(np.array([0.3]), np.array([3.0]))) == (0.3, 3.0)
    s = SystemSample(np.array([0.0, 0.0]), np.array([0.0, 0.0]), Commercial(2, 0.3, 3.47))
    assert experienced_indices(s) == pytest.approx((0.15, 1.735))
    only_com = SystemSample(np.zeros(0), np.zeros(0), Commercial(5, 0.3, 3.47))
    assert experienced_indices(only_com) == pytest.approx((0.3, 3.47))
    with pytest.raises(ValueError):
        experienced_indices(SystemSample(np.zeros(0), np.zeros(0)))


def test_from_metrics():
    ms = [ResidenceMetrics(0.2, 2.0, 1.0, 10), ResidenceMetrics(0.4, 4.0, 1.0, 10)]
    assert experienced_indices(SystemSample.from_metrics(ms)) == pytest.approx((0.3, 3.0))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 5), st.floats(0, 50)), min_size=1, max_size=40), st.randoms())
def test_permutation_invariance(pairs, rnd):
    arr = np.array(pairs)
    perm = list(range(len(pairs)))
    rnd.shuffle(perm)
    a = experienced_indices(SystemSample(arr[:, 0], arr[:, 1]))
    b = experienced_indices(SystemSample(arr[perm, 0], arr[perm, 1]))
    assert a == pytest.approx(b, rel=1e-12, abs=1e-15)


def test_pool_aif_examples():
    h = pool_aif([[0.0, 0.005, 0.30]])
    assert h.counts[0] == 2 and h.counts[30] == 1 and h.total == 3
    assert pool_aif([]).total == 0
    with pytest.raises(ValueError):
        pool_aif([[0.1]], bin_width=0)
    with pytest.raises(ValueError):
        pool_aif([[-0.1]])


def test_histogram_mass_and_rows():
    h = pool_aif([np.array([0.0, 0.0, 0.3, 0.31, 0.5])])
    assert h.mass_between(0, 0.05) == pytest.approx(0.4)
    assert h.mass_between(0.25, 0.35) == pytest.approx(0.4)
    rows = list(h.rows())
    assert rows[0] == (0.0, 0.01, 2)
    assert sum(r[2] for r in rows) == h.total


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.floats(0, 3), max_size=20), max_size=10))
def test_histogram_total_and_merge(parts):
    h = pool_aif(parts)
    assert h.total == sum(len(p) for p in parts)
    merged = AifHistogram()
    for p in parts:
        merged = merged.merge(pool_aif([p]))
    assert merged.total == h.total
    n = max(merged.counts.size, h.counts.size)
    assert np.array_equal(np.pad(merged.counts, (0, n - merged.counts.size)), np.pad(h.counts, (0, n - h.counts.size)))

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bdh_variance.field_catalog import build_field, cyclotomic, quadratic, rational
from bdh_variance.ideal_stream import (
    ResourceCapExceeded,
    enumerate_norms,
    equal_norm_square_sum,
    merge_sums,
    norm_arrays,
    norm_arrays_range,
    theta_total,
)


def _events(F, x):
    return sorted((e.p, e.norm, e.multiplicity) for e in enumerate_norms(F, x))


def test_rational_events():
    assert _events(rational(), 10) == [(2, 2, 1), (3, 3, 1), (5, 5, 1), (7, 7, 1)]


def test_gaussian_events():
    assert _events(quadratic(-1), 10) == [(2, 2, 1), (3, 9, 1), (5, 5, 2)]


def test_cyclotomic5_events():
    assert _events(cyclotomic(5), 20) == [(2, 16, 1), (5, 5, 1), (11, 11, 4)]


def test_theta_small():
    assert theta_total(rational(), 10) == pytest.approx(math.log(210), rel=1e-15)
    assert theta_total(rational(), 1) == 0.0
    assert equal_norm_square_sum(rational(), 1) == 0.0


def test_equal_norm_square_sum_rational_x10():
    expected = math.fsum(math.log(p) ** 2 for p in (2, 3, 5, 7))
    assert equal_norm_square_sum(rational(), 10) == pytest.approx(expected, rel=1e-15)
    assert expected == pytest.approx(8.0643, abs=1e-4)


def test_equal_norm_square_sum_counts_multiplicity_squared():
    # Q(i), x = 10: 2 -> log^2 2; 9 -> log^2 9; 5 has two ideals of norm 5 -> 4 log^2 5
    expected = math.log(2) ** 2 + math.log(9) ** 2 + 4 * math.log(5) ** 2
    assert equal_norm_square_sum(quadratic(-1), 10) == pytest.approx(expected, rel=1e-15)


def test_gaussian_prime_ideal_theorem():
    assert theta_total(quadratic(-1), 10**6) / 10**6 == pytest.approx(1.0, abs=5e-3)


def test_equal_norm_shape_gaussian():
    x = 10**6
    ratio = equal_norm_square_sum(quadratic(-1), x) / (2 * (x * math.log(x) - x))
    assert ratio == pytest.approx(1.0, abs=0.02)


@given(st.lists(st.integers(3, 19_999), max_size=6, unique=True), st.sampled_from(["Q", "Q(i)", "cyc:5", "cyc:12"]))
@settings(max_examples=25, deadline=None)
def test_partition_invariance(cuts, desc):
    F = build_field(desc)
    x = 20_000
    edges = [2] + sorted(cuts) + [x + 1]
    parts = [norm_arrays_range(F, lo, hi - 1, x, segment=4096) for lo, hi in zip(edges, edges[1:])]
    # merge in reverse order to exercise order independence
    theta = merge_sums([math.fsum(p.weight.tolist()) for p in reversed(parts)])
    assert theta == pytest.approx(theta_total(F, x), rel=1e-12)
    joined = np.concatenate([p.norm for p in parts])
    assert np.array_equal(np.sort(joined), np.sort(norm_arrays(F, x).norm))


def test_arrays_match_stream():
    F = cyclotomic(12)
    arr = norm_arrays(F, 5000)
    assert [(e.p, e.norm, e.multiplicity) for e in arr.events()] == [
        (e.p, e.norm, e.multiplicity) for e in enumerate_norms(F, 5000, segment=512)
    ]


def test_ramified_switch():
    F = quadratic(-1)
    with_r = norm_arrays(F, 100)
    without = norm_arrays(F, 100, include_ramified=False)
    assert 2 in with_r.p.tolist() and 2 not in without.p.tolist()


def test_event_cap():
    with pytest.raises(ResourceCapExceeded):
        norm_arrays(rational(), 10**7, max_events=1000)

"""Acceptance criteria, one test per criterion, at the stated tolerances.

Each test attaches its measured values with ``record_property("measured", ...)``;
conftest prints them in a summary section.
"""

import math
import time

import numpy as np
import pytest

from bdh_variance.arith import euler_phi, factorize, primes_up_to
from bdh_variance.dirichlet_constants import (
    closed_form_constants,
    constant_C1,
    constant_set,
    dirichlet_partial_sum,
    dirichlet_product,
    euler_h,
    leading_constant_c1,
    partial_sums,
    zeta,
)
from bdh_variance.field_catalog import CATALOG, build_field, splitting_arrays
from bdh_variance.galois_image import base_data, gq_by_generation, is_abelian, phi_k_table
from bdh_variance.ideal_stream import equal_norm_square_sum, norm_arrays
from bdh_variance.variance_engine import (
    decomposition_HJ,
    geometric_grid,
    naive_theta_table,
    regress_slope,
    theta_square_sum,
    theta_table,
    variance_profile,
)

X_DESK = 100_000


@pytest.fixture(scope="session")
def desk_profiles():
    """Full-range S_q profiles at x = 10^5 for Q and Q(i), shared by criteria 8 and 9."""
    return {d: variance_profile(build_field(d), X_DESK, 0, X_DESK) for d in ("Q", "Q(i)")}


def test_criterion_01_phi_k_dual_method(record_property):
    t0 = time.perf_counter()
    mismatches = {}
    for desc in CATALOG:
        F = build_field(desc)
        table = phi_k_table(F, 2000)
        mismatches[desc] = [q for q in range(1, 2001) if gq_by_generation(F, q).phi_K != table[q]]
    elapsed = time.perf_counter() - t0
    record_property("measured", f"mismatches={sum(map(len, mismatches.values()))} over 7 fields, {elapsed:.0f}s")
    assert all(not v for v in mismatches.values()), mismatches
    assert elapsed <= 300


def test_criterion_02_splitting_soundness(record_property):
    t0 = time.perf_counter()
    ps = primes_up_to(1_000_000)
    bad, ram_bad = {}, []
    for desc in CATALOG:
        F = build_field(desc)
        e, f, g, exact = splitting_arrays(F, ps)
        bad[desc] = int(np.count_nonzero(~exact | (e * f * g != F.degree)))
        seen = set(ps[e > 1].tolist())
        predicted = set(factorize(abs(F.discriminant))) if abs(F.discriminant) > 1 else set()
        if not (seen == set(F.ramified_primes) == predicted):
            ram_bad.append(desc)
    elapsed = time.perf_counter() - t0
    record_property("measured", f"efg violations={sum(bad.values())}, ramified mismatches={ram_bad}, {elapsed:.0f}s")
    assert sum(bad.values()) == 0 and not ram_bad
    assert elapsed <= 120


def test_criterion_03_h1_identity(record_property):
    err = abs(euler_h(1.0) * zeta(6.0) / zeta(3.0) - 1.0)
    record_property("measured", f"|h(1) zeta(6)/zeta(3) - 1| = {err:.2e} (tol 1e-8)")
    assert err <= 1e-8


def test_criterion_04_dirichlet_factorisation(record_property):
    N, s = 100_000, 2.5
    tol = 2.0 * N**-1.5
    errs = {}
    for desc in ("Q", "Q(i)", "cyc:5"):
        F = build_field(desc)
        errs[desc] = abs(dirichlet_partial_sum(F, s, N) - dirichlet_product(F, s))
    record_property("measured", ", ".join(f"{k}: {v:.3e}" for k, v in errs.items()) + f" (tol {tol:.3e})")
    assert all(v <= tol for v in errs.values()), errs


def test_criterion_05_equal_norm_sum(record_property):
    ratios = {}
    for desc in ("Q(i)", "quad:-3", "cyc:5"):
        F = build_field(desc)
        for x in (100_000, 1_000_000):
            ratios[(desc, x)] = equal_norm_square_sum(F, x) / (F.degree * (x * math.log(x) - x))
    record_property("measured", ", ".join(f"{d}@{x:.0e}: {r:.4f}" for (d, x), r in ratios.items()))
    for (desc, x), r in ratios.items():
        assert abs(r - 1.0) <= (0.05 if x == 100_000 else 0.02), (desc, x, r)


def test_criterion_06_id2_slope(record_property):
    x = 100_000
    gaps = {}
    for desc in CATALOG:
        F = build_field(desc)
        table = phi_k_table(F, 2 * x)
        slope = (partial_sums(F, 2 * x, table)[1] - partial_sums(F, x, table)[1]) / math.log(2.0)
        gaps[desc] = slope - leading_constant_c1(F)
    record_property("measured", "max |slope - c1| = " + f"{max(map(abs, gaps.values())):.2e} (tol 1e-3)")
    assert all(abs(v) <= 1e-3 for v in gaps.values()), gaps


def test_criterion_07_theta_split_and_oracle(record_property):
    t0 = time.perf_counter()
    x = 3000
    worst_split = worst_oracle = 0.0
    for desc in ("Q", "Q(i)"):
        F = build_field(desc)
        ev = norm_arrays(F, x)
        base = base_data(F)
        for q in range(1, 51):
            lhs = theta_square_sum(F, x, q, ev, base)
            H, J = decomposition_HJ(F, x, q - 1, q, ev)
            worst_split = max(worst_split, abs(lhs - H - J) / lhs)
            fast = theta_table(F, x, q, ev, base).values
            slow = naive_theta_table(F, x, q)
            assert set(fast) == set(slow), (desc, q)
            worst_oracle = max(worst_oracle, max(abs(fast[a] - v) / max(abs(v), 1.0) for a, v in slow.items()))
    elapsed = time.perf_counter() - t0
    record_property("measured", f"split rel err {worst_split:.1e}, oracle rel err {worst_oracle:.1e}, {elapsed:.0f}s")
    assert worst_split <= 1e-9 and worst_oracle <= 1e-9
    assert elapsed <= 60


def test_criterion_08_full_range_variance(record_property, desk_profiles):
    t0 = time.perf_counter()
    F = build_field("Q")
    C1 = constant_C1(F)
    small = variance_profile(F, 10_000, 0, 10_000).S(0, 10_000)
    d4 = small / 1e8 - math.log(1e4) - C1
    d5 = desk_profiles["Q"].S(0, X_DESK) / X_DESK**2 - math.log(X_DESK) - C1
    elapsed = time.perf_counter() - t0
    record_property("measured", f"C1={C1:.6f}, d(1e4)={d4:+.5f}, d(1e5)={d5:+.5f} (bound 1.0, trend |d5|<=|d4|)")
    assert abs(d4) <= 1.0 and abs(d5) <= 1.0
    assert abs(d5) <= abs(d4), "decreasing-trend check"
    assert elapsed <= 600


def test_criterion_09_slope_law(record_property, desk_profiles):
    Qs = geometric_grid(X_DESK, 4)
    notes, slopes = [], {}
    for desc, prof in desk_profiles.items():
        F = build_field(desc)
        S = [prof.S(0, Q) for Q in Qs]
        slope, intercept, r2 = regress_slope(Qs, S, X_DESK)
        slopes[desc] = (slope, F.degree)
        # soft check: intercept against -[K:Q] - c3 within 3x the combined uncertainty
        X = np.log(np.asarray(Qs, dtype=float))
        Y = np.asarray(S) / (X_DESK * np.asarray(Qs, dtype=float))
        resid = Y - (slope * X + intercept)
        A = np.column_stack([X, np.ones_like(X)])
        se_int = math.sqrt(float(resid @ resid) / (len(Qs) - 2) * np.linalg.inv(A.T @ A)[1, 1])
        cs = constant_set(F)
        target = -F.degree - cs.c3
        soft = abs(intercept - target) <= 3 * math.hypot(se_int, cs.c3_err)
        notes.append(f"{desc}: slope {slope:.3f} (r2 {r2:.4f}), intercept {intercept:.3f} vs {target:.3f} "
                     f"soft={'ok' if soft else 'outside'}")
    record_property("measured", "; ".join(notes))
    assert all(abs(s - deg) <= 0.25 for s, deg in slopes.values()), slopes


def test_criterion_10_abelian_ratio(record_property):
    ratios = {}
    for desc in CATALOG:
        F = build_field(desc)
        base = base_data(F)
        assert is_abelian(F)
        ratios[desc] = (euler_phi(F.m_K) / base.phi_K_mK, F.degree)
    record_property("measured", ", ".join(f"{k}: {r:g}/{d}" for k, (r, d) in ratios.items()))
    assert all(r == d for r, d in ratios.values())


# Supplementary diagnostic, not an acceptance criterion: the criterion-4 residual
# is the omitted Dirichlet tail, which scales like c1 N^(-3/2) / (3/2).
def test_dirichlet_residual_is_the_omitted_tail():
    N, s = 100_000, 2.5
    for desc in ("Q", "Q(i)", "cyc:5"):
        F = build_field(desc)
        err = dirichlet_product(F, s) - dirichlet_partial_sum(F, s, N)
        tail = leading_constant_c1(F) * N ** (1.0 - s) / (s - 1.0)
        assert err == pytest.approx(tail, rel=0.01), desc

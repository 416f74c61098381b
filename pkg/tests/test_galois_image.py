import math

import pytest
from hypothesis import given, settings, strategies as st

from bdh_variance.arith import euler_phi
from bdh_variance.field_catalog import CATALOG, build_field, cyclotomic, galois, quadratic, rational
from bdh_variance.galois_image import (
    StabilizationError,
    base_data,
    gq_by_formula,
    gq_by_generation,
    is_abelian,
    phi_k_by_formula,
    phi_k_table,
)


def test_generation_examples():
    assert gq_by_generation(rational(), 12).members == (1, 5, 7, 11)
    rec = gq_by_generation(quadratic(-1), 4)
    assert rec.members == (1,) and rec.phi_K == 1 and rec.index == 2
    assert gq_by_generation(quadratic(5), 5).members == (1, 4)
    assert not rec.heuristic


def test_formula_examples():
    assert phi_k_by_formula(quadratic(-1), 8) == 2
    assert phi_k_by_formula(quadratic(-1), 5) == 4
    assert phi_k_by_formula(rational(), 1) == 1


@pytest.mark.parametrize("desc", CATALOG)
def test_dual_method_small(desc):
    F = build_field(desc)
    table = phi_k_table(F, 300)
    for q in range(1, 301):
        gen = gq_by_generation(F, q)
        assert gen.phi_K == phi_k_by_formula(F, q) == table[q]
        assert gq_by_formula(F, q).members == gen.members
        assert F.degree % gen.index == 0


@pytest.mark.parametrize("desc", CATALOG + ("quad:2", "quad:-2", "cyc:16"))
def test_exponent_above_and_below_b(desc):
    F = build_field(desc)
    base = base_data(F)
    for ell, loc in base.local.items():
        for alpha in range(1, loc.b + 4):
            q = ell**alpha
            assert phi_k_by_formula(F, q, base) == gq_by_generation(F, q).phi_K
            if alpha > loc.b:
                # exponent past b: the local factor grows like l^(alpha - b)
                assert phi_k_by_formula(F, q, base) == ell ** (alpha - loc.b) * loc.phi_K_power(loc.b)


def test_literal_constant_below_b_fails_for_sqrt2():
    F = quadratic(2)
    loc = base_data(F).local[2]
    assert loc.b == 3
    assert loc.phi_K_powers == (1, 2, 2)
    assert not loc.constant_below_b
    assert gq_by_generation(F, 8).members == (1, 7)
    assert phi_k_by_formula(F, 8) == 2
    assert phi_k_by_formula(F, 8, literal=True) == 1


@pytest.mark.parametrize("desc", CATALOG)
def test_literal_form_agrees_on_catalog(desc):
    F = build_field(desc)
    base = base_data(F)
    assert all(loc.constant_below_b for loc in base.local.values())
    for q in range(1, 400):
        assert phi_k_by_formula(F, q, base, literal=True) == phi_k_by_formula(F, q, base)


@given(st.integers(1, 300), st.integers(1, 300), st.sampled_from(CATALOG + ("quad:2",)))
@settings(max_examples=60, deadline=None)
def test_phi_k_multiplicative(a, b, desc):
    if math.gcd(a, b) != 1:
        return
    F = build_field(desc)
    assert phi_k_by_formula(F, a * b) == phi_k_by_formula(F, a) * phi_k_by_formula(F, b)


@pytest.mark.parametrize("desc", CATALOG)
def test_abelian_ratio(desc):
    F = build_field(desc)
    base = base_data(F)
    assert euler_phi(F.m_K) // base.phi_K_mK == F.degree
    assert is_abelian(F)


def test_galois_cubic_image():
    F = galois([1, -2, -1, 1], 7, [7])
    rec = gq_by_generation(F, 7)
    assert rec.members == (1, 6) and rec.heuristic
    assert is_abelian(F)
    assert phi_k_by_formula(F, 49) == 14
    assert gq_by_generation(F, 49).phi_K == 14


def test_stabilization_failure_is_explicit():
    with pytest.raises(StabilizationError):
        gq_by_generation(cyclotomic(5), 11 * 13 * 17, cap=5)


def test_modulus_cap():
    with pytest.raises(ValueError):
        gq_by_generation(rational(), 10**7 + 1)

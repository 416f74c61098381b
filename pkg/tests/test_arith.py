import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from bdh_variance.arith import (
    cyclotomic_coeffs,
    euler_phi,
    factorize,
    is_prime,
    is_squarefree,
    iter_prime_segments,
    kronecker,
    multiplicative_order,
    order_table,
    phi_table,
    powmod_array,
    primes_up_to,
    simple_sieve,
    valuation,
)


def test_sieve_matches_sympy():
    assert simple_sieve(10_000).tolist() == list(sympy.primerange(2, 10_001))


def test_segmented_sieve_with_small_segments():
    ps = np.concatenate(list(iter_prime_segments(2, 50_000, segment=1000)))
    assert ps.tolist() == list(sympy.primerange(2, 50_001))


@given(st.integers(2, 20_000), st.integers(0, 20_000))
@settings(max_examples=40, deadline=None)
def test_segments_of_any_range(lo, width):
    hi = lo + width
    got = np.concatenate(list(iter_prime_segments(lo, hi, segment=997)) or [np.empty(0, np.int64)])
    assert got.tolist() == list(sympy.primerange(lo, hi + 1))


def test_primes_up_to_small_limits():
    assert primes_up_to(1).tolist() == []
    assert primes_up_to(2).tolist() == [2]
    assert primes_up_to(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


@given(st.integers(-10, 10**12))
@settings(max_examples=200, deadline=None)
def test_is_prime_agrees_with_sympy(n):
    assert is_prime(n) == sympy.isprime(n)


@given(st.integers(1, 10**9))
@settings(max_examples=100, deadline=None)
def test_factorize_reconstructs(n):
    fac = factorize(n)
    assert math.prod(p**k for p, k in fac.items()) == n
    assert all(is_prime(p) for p in fac)
    assert fac == dict(sympy.factorint(n))


def test_squarefree_and_valuation():
    assert is_squarefree(-3) and is_squarefree(30) and not is_squarefree(12)
    assert valuation(48, 2) == 4 and valuation(48, 3) == 1 and valuation(48, 5) == 0


def test_phi_table_matches_pointwise():
    table = phi_table(3000)
    assert table[0] == 0
    assert all(table[n] == euler_phi(n) == sympy.totient(n) for n in range(1, 3001))


@given(st.integers(2, 500), st.integers(1, 10**6))
@settings(max_examples=100, deadline=None)
def test_multiplicative_order(n, a):
    if math.gcd(a, n) != 1:
        with pytest.raises(ValueError):
            multiplicative_order(a, n)
        return
    assert multiplicative_order(a, n) == sympy.n_order(a, n)


def test_order_table_marks_non_units():
    t = order_table(12)
    assert t[1] == 1 and t[5] == 2 and t[7] == 2 and t[11] == 2
    assert t[2] == 0 and t[6] == 0


@given(st.integers(-1000, 1000), st.integers(1, 999).map(lambda k: 2 * k + 1))
@settings(max_examples=200, deadline=None)
def test_kronecker_is_jacobi_for_odd_n(a, n):
    assert kronecker(a, n) == sympy.jacobi_symbol(a, n)


def test_kronecker_at_two():
    # (d/2) = 0 for even d, +1 for d = +-1 mod 8, -1 for d = +-3 mod 8
    assert [kronecker(d, 2) for d in (-4, 1, 7, 3, 5, -3)] == [0, 1, 1, -1, -1, -1]


def test_powmod_array():
    rng = np.random.default_rng(7)
    b = rng.integers(0, 10**6, 500)
    e = rng.integers(0, 10**6, 500)
    m = rng.integers(2, 3 * 10**6, 500)
    got = powmod_array(b, e, m)
    assert got.tolist() == [pow(int(x), int(y), int(z)) for x, y, z in zip(b, e, m)]


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 8, 12, 15, 20, 30])
def test_cyclotomic_coeffs(n):
    x = sympy.Symbol("x")
    expected = sympy.Poly(sympy.cyclotomic_poly(n, x), x).all_coeffs()[::-1]
    assert list(cyclotomic_coeffs(n)) == [int(c) for c in expected]

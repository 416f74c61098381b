import sympy
from hypothesis import given, settings, strategies as st

from bdh_variance import polymod


def _sympy_min_degree(coeffs, p):
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(coeffs)), x, modulus=p)
    return min(f.degree() for f, _ in poly.factor_list()[1])


@given(
    st.sampled_from([3, 5, 7, 11, 13, 101]),
    st.lists(st.integers(0, 100), min_size=1, max_size=6),
)
@settings(max_examples=80, deadline=None)
def test_smallest_factor_degree_matches_sympy(p, low):
    f = polymod.reduce(low + [1], p)
    if len(f) < 2 or not polymod.is_squarefree_mod(f, p):
        return
    assert polymod.smallest_factor_degree(f, p) == _sympy_min_degree(f, p)


def test_divmod_roundtrip():
    p = 7
    a = [3, 0, 5, 1, 6, 2]
    b = [1, 2, 1]
    q, r = polymod.divmod_poly(a, b, p)
    prod = [0] * (len(q) + len(b) - 1)
    for i, u in enumerate(q):
        for j, v in enumerate(b):
            prod[i + j] += u * v
    recon = polymod.reduce([x + (r[i] if i < len(r) else 0) for i, x in enumerate(prod)], p)
    assert recon == polymod.reduce(a, p)


def test_gcd_and_squarefree():
    p = 5
    # (x - 1)^2 (x + 1) = x^3 - x^2 - x + 1
    f = polymod.reduce([1, -1, -1, 1], p)
    assert not polymod.is_squarefree_mod(f, p)
    assert polymod.gcd(f, polymod.derivative(f, p), p) == [4, 1]  # x - 1 = x + 4


def test_powmod_frobenius_fixes_fp_roots():
    # in F_p[x]/(x^2 + 1) with p = 3 (inert), x^p = -x
    p = 3
    assert polymod.powmod([0, 1], p, [1, 0, 1], p) == [0, 2]

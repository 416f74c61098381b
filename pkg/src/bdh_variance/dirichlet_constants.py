"""Numerical evaluation of the Dirichlet-series constants attached to phi_K.

D_K(s) = sum_n 1/(phi_K(n) n^(s-1)) factors as zeta(s) zeta(s+1) h(s) prod_l D_{K,l}(s)
over primes l | m_K. This module evaluates h, the local correction factors, the
leading constant c1 and the second-order constant C1, and recovers c2, c3, c4
by least-squares fits of exact partial sums. Closed forms for c2, c3, c4 from
the residues at s = 0 and s = -1 are provided as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np

from .arith import cached_primes, simple_sieve
from .field_catalog import FieldSpec
from .galois_image import BaseData, base_data, is_abelian, phi_k_table

EULER_GAMMA = float(mpmath.euler)
H_TOL = 1e-12
H_DOMAIN_MIN = -0.4
# direct-product truncation points tried, in order
_DIRECT_LADDER = tuple(1 << k for k in range(10, 22))
_EXPANSION_P = 1 << 20
DIFF_STEP = 1e-5
DEFAULT_XS = (1_000, 10_000, 100_000, 1_000_000)


# ---------------------------------------------------------------------------
# zeta


@lru_cache(maxsize=None)
def zeta(s: float) -> float:
    with mpmath.workdps(30):
        return float(mpmath.zeta(s))


@lru_cache(maxsize=None)
def zeta_deriv(s: float) -> float:
    with mpmath.workdps(30):
        return float(mpmath.zeta(s, 1, 1))


@lru_cache(maxsize=None)
def _prime_zeta(w: float) -> float:
    with mpmath.workdps(30):
        return float(mpmath.primezeta(w))


# ---------------------------------------------------------------------------
# h(s)


@dataclass(frozen=True)
class EulerProductValue:
    value: float
    tail_bound: float  # bound (direct route) or estimate (expansion route) on |h - value| / h
    P: int
    route: str  # "direct" or "expansion"


def _log_factors(s: float, primes: np.ndarray) -> np.ndarray:
    ell = primes.astype(np.float64)
    lg = np.log(ell)
    one_minus = -np.expm1(-s * lg)  # 1 - l^-s, accurate near s = 0
    a = np.exp(-(s + 2.0) * lg) * one_minus / (1.0 - 1.0 / ell)
    return np.log1p(a)


def _direct_tail_bound(s: float, P: int) -> float:
    # for s >= 0: 0 <= log(1 + a_l) <= l^-(s+2) P/(P-1), summed over odd n > P
    w = s + 2.0
    total = (P - 1.0) ** (1.0 - w) / (2.0 * (w - 1.0)) * P / (P - 1.0)
    return math.expm1(total)


def _expansion_monomials(s: float, w_max: float) -> dict[tuple[int, int], float]:
    """Coefficients of log(1 + a) in monomials l^-(i + k s), weight <= w_max.

    a = l^-(s+2) (1 - l^-s) / (1 - 1/l) = sum_j (l^-(2+j+s) - l^-(2+j+2s)).
    """

    def weight(key: tuple[int, int]) -> float:
        return key[0] + key[1] * s

    a: dict[tuple[int, int], float] = {}
    j = 0
    while 2 + j + min(s, 2 * s) <= w_max:
        for key, c in (((2 + j, 1), 1.0), ((2 + j, 2), -1.0)):
            if weight(key) <= w_max:
                a[key] = a.get(key, 0.0) + c
        j += 1

    out: dict[tuple[int, int], float] = {}
    power = dict(a)
    m = 1
    while power:
        sign = 1.0 if m % 2 else -1.0
        for key, c in power.items():
            out[key] = out.get(key, 0.0) + sign * c / m
        nxt: dict[tuple[int, int], float] = {}
        for k1, c1 in power.items():
            for k2, c2 in a.items():
                key = (k1[0] + k2[0], k1[1] + k2[1])
                if weight(key) <= w_max:
                    nxt[key] = nxt.get(key, 0.0) + c1 * c2
        power = {k: c for k, c in nxt.items() if c != 0.0}
        m += 1
    return {k: c for k, c in out.items() if c != 0.0}


def _prime_power_tail(w: float, primes: np.ndarray) -> float:
    """sum over primes l > max(primes) of l^-w."""
    head = math.fsum(np.exp(-w * np.log(primes.astype(np.float64))).tolist())
    return _prime_zeta(w) - head


def euler_h_detail(s: float, tol: float = H_TOL, P: Optional[int] = None) -> EulerProductValue:
    """h(s) = prod_l {1 + l^-(s+2) (1 - l^-s) (1 - 1/l)^-1} with its truncation error.

    For s >= 0 the product is truncated at the first P on a ladder whose
    elementary tail bound is <= tol. Otherwise (or when no ladder entry
    suffices) the primes above P are summed through an expansion of
    log(1 + a_l) in powers l^-w using the prime zeta function. Passing ``P``
    pins the truncation point, which keeps finite differences consistent.
    """
    if not s > H_DOMAIN_MIN:
        raise ValueError(f"h(s) is evaluated only for s > {H_DOMAIN_MIN} (got {s})")
    if P is None and s >= 0:
        for cand in _DIRECT_LADDER:
            if _direct_tail_bound(s, cand) <= tol:
                P = cand
                break
    if P is not None and s >= 0 and _direct_tail_bound(s, P) <= tol:
        primes = cached_primes(P)
        log_h = math.fsum(_log_factors(s, primes).tolist())
        return EulerProductValue(math.exp(log_h), _direct_tail_bound(s, P), P, "direct")

    P = P or _EXPANSION_P
    primes = cached_primes(P)
    log_head = math.fsum(_log_factors(s, primes).tolist())
    w_max = 1.0 + 17.0 / math.log10(P)
    mono = _expansion_monomials(s, w_max + 2.0)
    tail, dropped = [], []
    for (i, k), c in mono.items():
        w = i + k * s
        if w <= w_max:
            tail.append(c * _prime_power_tail(w, primes))
        else:
            dropped.append(abs(c) * P ** (1.0 - w) / (w - 1.0))
    log_h = log_head + math.fsum(tail)
    return EulerProductValue(math.exp(log_h), 2.0 * math.fsum(dropped) + 1e-15, P, "expansion")


def euler_h(s: float, tol: float = H_TOL, P: Optional[int] = None) -> float:
    return euler_h_detail(s, tol, P).value


# ---------------------------------------------------------------------------
# local correction factors


def _local(F: FieldSpec, ell: int, base: Optional[BaseData]):
    base = base or base_data(F)
    if ell not in base.local:
        raise ValueError(f"{ell} does not divide m_K={F.m_K}")
    return base.local[ell]


def correction_factor(F: FieldSpec, ell: int, s: float, base: Optional[BaseData] = None) -> float:
    """D_{K,l}(s): local factor of D_K at l divided by the local factor of D.

    Numerator and denominator are both multiplied through by (1 - l^-s), which
    removes the apparent singularities at s = 0 and s = 1: the returned value is
    the analytic continuation, so the limits need no special casing. The local
    factor of D_K uses phi_K(l^j) for each j <= b.
    """
    loc = _local(F, ell, base)
    if not s > H_DOMAIN_MIN:
        raise ValueError(f"s must exceed {H_DOMAIN_MIN}")
    lg = math.log(ell)
    t = -math.expm1(-s * lg)  # 1 - l^-s
    u = math.exp((1.0 - s) * lg)  # l^(1-s)
    partial = 1.0 + math.fsum(u**j / loc.phi_K_powers[j - 1] for j in range(1, loc.b))
    num = t * partial + u**loc.b / loc.phi_K_powers[loc.b - 1]
    den = t + math.exp(-s * lg) * ell / (ell - 1.0)
    return num / den


def correction_factor_displayed(F: FieldSpec, ell: int, s: float, base: Optional[BaseData] = None) -> float:
    """The correction factor written as a ratio of closed forms in phi_K(l).

    Singular (0/0) at s = 0 and s = 1. Agrees with ``correction_factor`` whenever
    phi_K(l^j) = phi_K(l) for 1 <= j <= b.
    """
    loc = _local(F, ell, base)
    b, pk = loc.b, loc.phi_K_ell
    v = ell ** (1.0 - s)  # 1 / l^(s-1)
    num = 1.0 + (v / pk) * (1.0 - v ** (b - 1)) / (1.0 - v) + (v**b / pk) / (1.0 - ell ** (-s))
    den = 1.0 + ell ** (-s) / ((1.0 - 1.0 / ell) * (1.0 - ell ** (-s)))
    return num / den


def richardson_limit(fun: Callable[[float], float], s0: float, k0: int = 3, levels: int = 3) -> float:
    """Limit of fun at s0 from symmetric samples s0 +- 10^-k, Richardson-extrapolated."""
    hs = [10.0 ** -(k0 + i) for i in range(levels)]
    vals = [0.5 * (fun(s0 + h) + fun(s0 - h)) for h in hs]  # even in h: error O(h^2)
    # successive elimination of h^2, h^4, ... terms with ratio 10
    for order in range(1, levels):
        r = 100.0**order
        vals = [(r * vals[i + 1] - vals[i]) / (r - 1.0) for i in range(len(vals) - 1)]
    return vals[0]


def F_factor(F: FieldSpec, s: float, base: Optional[BaseData] = None, P: Optional[int] = None) -> float:
    """h(s) times the product of the correction factors over l | m_K."""
    base = base or base_data(F)
    out = euler_h(s, P=P)
    for ell in base.local:
        out *= correction_factor(F, ell, s, base)
    return out


def derivative(fun: Callable[[float], float], s0: float, step: float = DIFF_STEP) -> float:
    """Central difference with one Richardson step (error O(step^4))."""
    d1 = (fun(s0 + step) - fun(s0 - step)) / (2.0 * step)
    h2 = step / 2.0
    d2 = (fun(s0 + h2) - fun(s0 - h2)) / (2.0 * h2)
    return (4.0 * d2 - d1) / 3.0


def _pinned_P(s0: float, step: float) -> Optional[int]:
    lo = s0 - step
    if lo < 0:
        return _EXPANSION_P
    return euler_h_detail(lo).P


def F_derivative(F: FieldSpec, s0: float, step: float = DIFF_STEP, base: Optional[BaseData] = None) -> float:
    base = base or base_data(F)
    P = _pinned_P(s0, step)
    return derivative(lambda s: F_factor(F, s, base, P), s0, step)


# ---------------------------------------------------------------------------
# constants


def leading_constant_c1(F: FieldSpec, base: Optional[BaseData] = None) -> float:
    base = base or base_data(F)
    out = zeta(2.0) * zeta(3.0) / zeta(6.0)
    for ell in base.local:
        out *= correction_factor(F, ell, 1.0, base)
    return out


def constant_C1(F: FieldSpec, step: float = DIFF_STEP, base: Optional[BaseData] = None) -> float:
    """Coefficient of x^2 in the full-range variance S(x; 0, x).

    C1 = F(1) zeta'(2) + F(1) (2 gamma - 3) pi^2/12 + F'(1) pi^2/6 - [K:Q],
    i.e. the id1 constant c2 minus [K:Q]. See README for the derivation.
    """
    base = base or base_data(F)
    F1 = F_factor(F, 1.0, base)
    dF1 = F_derivative(F, 1.0, step, base)
    return (
        F1 * zeta_deriv(2.0)
        + F1 * (2.0 * EULER_GAMMA - 3.0) * math.pi**2 / 12.0
        + dF1 * math.pi**2 / 6.0
        - F.degree
    )


@dataclass(frozen=True)
class ClosedFormConstants:
    """c2, c3, c4 from the residues of the Mellin integrals at s = 0 and s = -1."""

    c2: float
    c3: float
    c4: float

    def C2(self, degree: int) -> float:
        return -degree - self.c3


def closed_form_constants(F: FieldSpec, base: Optional[BaseData] = None) -> ClosedFormConstants:
    base = base or base_data(F)
    z2, dz2 = zeta(2.0), zeta_deriv(2.0)
    F1 = F_factor(F, 1.0, base)
    dF1 = F_derivative(F, 1.0, base=base)
    c4 = dz2 * F1 + z2 * dF1 + EULER_GAMMA * z2 * F1
    c2 = c4 - 1.5 * z2 * F1
    F0 = F_factor(F, 0.0, base)
    dF0 = F_derivative(F, 0.0, base=base)
    c3 = F0 * (EULER_GAMMA + math.log(2.0 * math.pi)) + dF0
    return ClosedFormConstants(c2, c3, c4)


def landau_constant_rational(P: int = 2_000_000) -> float:
    """Constant term of sum_{n<=x} 1/phi(n) for K = Q from its own Euler product:
    zeta(2)zeta(3)/zeta(6) * (gamma - sum_p log p / (p^2 - p + 1))."""
    primes = simple_sieve(P).astype(np.float64)
    terms = np.log(primes) / (primes * primes - primes + 1.0)
    tail = 1.0 / P  # sum_{p > P} log p / p^2 ~ 1/P by the prime number theorem
    s = math.fsum(terms.tolist()) + tail
    return zeta(2.0) * zeta(3.0) / zeta(6.0) * (EULER_GAMMA - s)


# ---------------------------------------------------------------------------
# partial sums and fits


def partial_sums(F: FieldSpec, x: int, table: Optional[np.ndarray] = None) -> tuple[float, float]:
    """(sum_{n<x} (1-n/x)^2 / phi_K(n), sum_{n<=x} 1/phi_K(n))."""
    if x < 1:
        raise ValueError("x must be >= 1")
    if table is None or table.shape[0] <= x:
        table = phi_k_table(F, x)
    n = np.arange(1, x + 1, dtype=np.float64)
    inv = 1.0 / table[1 : x + 1].astype(np.float64)
    id2 = math.fsum(inv.tolist())
    w = (1.0 - n[:-1] / x) ** 2 * inv[:-1]
    id1 = math.fsum(w.tolist())
    return id1, id2


def dirichlet_partial_sum(F: FieldSpec, s: float, N: int) -> float:
    """sum_{n<=N} 1 / (phi_K(n) n^(s-1))."""
    table = phi_k_table(F, N)
    n = np.arange(1, N + 1, dtype=np.float64)
    return math.fsum((n ** (1.0 - s) / table[1:]).tolist())


def dirichlet_product(F: FieldSpec, s: float, base: Optional[BaseData] = None) -> float:
    """zeta(s) zeta(s+1) h(s) prod_l D_{K,l}(s)."""
    return zeta(s) * zeta(s + 1.0) * F_factor(F, s, base)


@dataclass(frozen=True)
class LemmaFit:
    c2: float
    c3: float
    c4: float
    C2: float
    c2_err: float
    c3_err: float
    c4_err: float
    id1_residual: float  # rms residual of the id1 fit
    id2_residual: float  # rms residual of the id2 constant
    flagged: bool


# id2 carries an O(log x / x)-size oscillation that the constant fit does not model
ID1_RESIDUAL_LIMIT = 1e-4
ID2_RESIDUAL_LIMIT = 1e-2


def fit_lemma_constants(
    F: FieldSpec,
    xs: Sequence[int],
    base: Optional[BaseData] = None,
    c1: Optional[float] = None,
) -> LemmaFit:
    """Fit c4 from id2 - c1 log x and (c2, c3) from id1 - c1 log x - r log x / x on {1, 1/x}."""
    xs = [int(v) for v in xs]
    if len(xs) < 4 or any(b <= a for a, b in zip(xs, xs[1:])) or xs[0] < 1000:
        raise ValueError("xs needs >= 4 increasing entries >= 1000")
    base = base or base_data(F)
    c1 = leading_constant_c1(F, base) if c1 is None else c1
    ratio = base.ratio_mK
    table = phi_k_table(F, max(xs), base)
    id1s, id2s = zip(*(partial_sums(F, x, table) for x in xs))
    xa = np.asarray(xs, dtype=np.float64)
    lx = np.log(xa)

    r2 = np.asarray(id2s) - c1 * lx
    c4 = float(np.mean(r2))
    c4_err = float(np.std(r2, ddof=1) / math.sqrt(len(xs)))

    y = np.asarray(id1s) - c1 * lx - ratio * lx / xa
    A = np.column_stack([np.ones_like(xa), 1.0 / xa])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = len(xs) - 2
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(A.T @ A)
    c2, c3 = float(coef[0]), float(coef[1])
    rms1 = math.sqrt(float(resid @ resid) / len(xs))
    rms2 = float(np.sqrt(np.mean((r2 - c4) ** 2)))
    return LemmaFit(
        c2, c3, c4, -F.degree - c3,
        math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1]), c4_err,
        rms1, rms2, rms1 > ID1_RESIDUAL_LIMIT or rms2 > ID2_RESIDUAL_LIMIT,
    )


@dataclass(frozen=True)
class ConstantSet:
    field: str
    degree: int
    c1: float
    c2: float
    c3: float
    c4: float
    C1: float
    C2: float
    ratio_mK: float
    h1: float
    c2_err: float
    c3_err: float
    c4_err: float
    abelian: bool
    closed: Optional[ClosedFormConstants] = None
    provenance: tuple[tuple[str, str], ...] = (
        ("c1", "closed_form"), ("c2", "fitted"), ("c3", "fitted"), ("c4", "fitted"),
        ("C1", "closed_form"), ("C2", "derived"), ("ratio_mK", "closed_form"), ("h1", "closed_form"),
    )


def constant_set(F: FieldSpec, xs: Sequence[int] = DEFAULT_XS, with_closed_forms: bool = True) -> ConstantSet:
    base = base_data(F)
    c1 = leading_constant_c1(F, base)
    fit = fit_lemma_constants(F, xs, base, c1)
    return ConstantSet(
        str(F), F.degree, c1, fit.c2, fit.c3, fit.c4, constant_C1(F, base=base), fit.C2,
        base.ratio_mK, euler_h(1.0), fit.c2_err, fit.c3_err, fit.c4_err, is_abelian(F, base),
        closed_form_constants(F, base) if with_closed_forms else None,
    )

"""theta_K(x; q, a) tables and the variance S(x; Q1, Q2) with its H/J split."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .arith import euler_phi, is_prime
from .dirichlet_constants import ConstantSet
from .field_catalog import FieldSpec, splitting
from .galois_image import BaseData, base_data, gq_by_formula, gq_by_generation, is_abelian, phi_k_table
from .ideal_stream import NormArrays, ResourceCapExceeded, norm_arrays

PAIR_BUDGET = 200_000_000


class GqMismatchError(AssertionError):
    """A norm coprime to q fell outside G_q."""


@dataclass(frozen=True)
class ThetaTable:
    q: int
    x: int
    values: dict[int, float]  # a in G_q -> theta_K(x; q, a)
    noncoprime: float  # mass of events with gcd(N(p), q) > 1

    def total(self) -> float:
        return math.fsum(self.values.values()) + self.noncoprime


@dataclass(frozen=True)
class Prediction:
    value: float
    form: str  # eq5_full_range | eq6_general
    simplified: Optional[float] = None  # abelian form, when it applies


@dataclass(frozen=True)
class VarianceReport:
    x: int
    Q1: int
    Q2: int
    S: float
    H: Optional[float]
    J: Optional[float]
    predicted_S: float
    predicted_form: str
    residual: float


def _check_image(events_norm: np.ndarray, q: int, base: BaseData) -> None:
    g = math.gcd(q, base.m_K)
    if g == 1:
        return
    ok = base.image_table(g)[events_norm % g]
    if not ok.all():
        bad = int(events_norm[np.flatnonzero(~ok)[0]])
        raise GqMismatchError(f"norm {bad} is coprime to q={q} but {bad % q} is not in G_q")


def theta_table(
    F: FieldSpec,
    x: int,
    q: int,
    events: Optional[NormArrays] = None,
    base: Optional[BaseData] = None,
) -> ThetaTable:
    """theta_K(x; q, a) for every a in G_q (classes with no prime ideals get 0)."""
    if q < 1 or x < 2:
        raise ValueError("need q >= 1 and x >= 2")
    base = base or base_data(F)
    events = events if events is not None else norm_arrays(F, x)
    cop = (q % events.p) != 0
    r = events.norm[cop] % q
    _check_image(events.norm[cop], q, base)
    w = events.weight
    sums = np.bincount(r, weights=w[cop], minlength=q)
    members = gq_by_formula(F, q, base).members
    values = {a: float(sums[a % q]) for a in members}
    return ThetaTable(q, x, values, math.fsum(w[~cop].tolist()))


def naive_theta_table(F: FieldSpec, x: int, q: int) -> dict[int, float]:
    """Oracle: trial-division primes, one entry per prime ideal, double loop over G_q."""
    ideals = []
    for p in range(2, x + 1):
        if all(p % d for d in range(2, math.isqrt(p) + 1)):
            s = splitting(F, p)
            if s.exact and p**s.f <= x:
                ideals.extend([p**s.f] * s.g)
    out = {}
    for a in gq_by_generation(F, q).members:
        total = 0.0
        for norm in ideals:
            if math.gcd(norm, q) == 1 and norm % q == a % q:
                total += math.log(norm)
        out[a] = total
    return out


# ---------------------------------------------------------------------------
# per-q variance


def _variance_chunk(args) -> np.ndarray:
    ps, norms, w, x, lo, hi, phik, m_K, image_tables = args
    out = np.empty(hi - lo, dtype=np.float64)
    total_w = math.fsum(w.tolist())
    for i, q in enumerate(range(lo + 1, hi + 1)):
        # events sharing a prime with q carry no mass in any class of G_q
        shared = np.flatnonzero(q % ps[ps <= q] == 0)
        if shared.shape[0]:
            wq = w.copy()
            wq[shared] = 0.0
            mass = total_w - math.fsum(w[shared].tolist())
        else:
            wq, mass = w, total_w
        g = math.gcd(q, m_K)
        if g > 1:
            ok = image_tables[g][norms % g]
            ok[shared] = True
            if not ok.all():
                raise GqMismatchError(f"coprime norm outside G_{q}")
        theta = np.bincount(norms % q, weights=wq)
        filled = np.count_nonzero(theta)
        if filled > phik[q]:
            raise GqMismatchError(f"more occupied classes than phi_K({q})")
        mu = x / phik[q]
        # sum over G_q of (theta_a - mu)^2, empty classes included
        out[i] = float(theta @ theta) - 2.0 * mu * mass + phik[q] * mu * mu
    return out


@dataclass(frozen=True)
class VarianceProfile:
    """Per-modulus contributions S_q for q in (q_lo, q_hi]."""

    x: int
    q_lo: int
    q_hi: int
    per_q: np.ndarray

    def S(self, Q1: int, Q2: int) -> float:
        if not (self.q_lo <= Q1 < Q2 <= self.q_hi):
            raise ValueError(f"({Q1}, {Q2}] is outside the profile range ({self.q_lo}, {self.q_hi}]")
        return math.fsum(self.per_q[Q1 - self.q_lo : Q2 - self.q_lo].tolist())


def variance_profile(
    F: FieldSpec,
    x: int,
    Q1: int,
    Q2: int,
    threads: int = 1,
    events: Optional[NormArrays] = None,
    base: Optional[BaseData] = None,
    chunk: int = 4096,
) -> VarianceProfile:
    """S_q for every q in (Q1, Q2], by bucketing the event array once per q.

    Each S_q is computed identically whatever the worker count, so totals taken
    with fsum are bitwise reproducible.
    """
    if not (0 <= Q1 < Q2 <= x):
        raise ValueError(f"need 0 <= Q1 < Q2 <= x (got Q1={Q1}, Q2={Q2}, x={x})")
    base = base or base_data(F)
    events = events if events is not None else norm_arrays(F, x)
    phik = phi_k_table(F, Q2, base).astype(np.float64)
    tables = {g: base.image_table(g) for g in range(2, base.m_K + 1) if base.m_K % g == 0}
    bounds = list(range(Q1, Q2, chunk)) + [Q2]
    tasks = [
        (events.p, events.norm, events.weight, float(x), lo, hi, phik, base.m_K, tables)
        for lo, hi in zip(bounds, bounds[1:])
    ]
    if threads <= 1 or len(tasks) == 1:
        parts = [_variance_chunk(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_variance_chunk, tasks))
    return VarianceProfile(x, Q1, Q2, np.concatenate(parts))


def variance_S(F: FieldSpec, x: int, Q1: int, Q2: int, threads: int = 1, events: Optional[NormArrays] = None) -> float:
    """S(x; Q1, Q2) = sum_{Q1<q<=Q2} sum_{a in G_q} (theta_K(x;q,a) - x/phi_K(q))^2."""
    return variance_profile(F, x, Q1, Q2, threads, events).S(Q1, Q2)


def decomposition_HJ(
    F: FieldSpec,
    x: int,
    Q1: int,
    Q2: int,
    events: Optional[NormArrays] = None,
    pair_budget: int = PAIR_BUDGET,
) -> tuple[float, float]:
    """(H, J): equal-norm and distinct-norm congruent-pair parts of sum_q sum_a theta^2.

    J is evaluated pair by pair: a pair of events with norms n != n' contributes
    2 w w' times the number of q in (Q1, Q2] dividing n - n'.
    """
    if not (0 <= Q1 < Q2 <= x):
        raise ValueError(f"need 0 <= Q1 < Q2 <= x (got Q1={Q1}, Q2={Q2}, x={x})")
    events = events if events is not None else norm_arrays(F, x)
    n = len(events)
    if n * (n - 1) // 2 > pair_budget:
        raise ResourceCapExceeded(f"{n} events exceed the pair budget {pair_budget}")
    p = events.p
    # q in (Q1, Q2] coprime to N(p), i.e. not divisible by p
    coprime_q = (Q2 - Q1) - (Q2 // p - Q1 // p)
    H = math.fsum((events.mult**2 * events.log_norm**2 * coprime_q).tolist())

    divisors_in_range = np.zeros(x + 1, dtype=np.int64)
    for q in range(Q1 + 1, Q2 + 1):
        divisors_in_range[q::q] += 1
    w = events.weight
    norms = events.norm
    parts = []
    for i in range(n - 1):
        d = np.abs(norms[i + 1 :] - norms[i])
        parts.append(float(w[i] * (w[i + 1 :] @ divisors_in_range[d])))
    J = 2.0 * math.fsum(parts)
    return H, J


def theta_square_sum(F: FieldSpec, x: int, q: int, events: Optional[NormArrays] = None, base: Optional[BaseData] = None) -> float:
    """sum_{a in G_q} theta_K(x; q, a)^2 from the bucketed table."""
    tab = theta_table(F, x, q, events, base)
    return math.fsum(v * v for v in tab.values.values())


# ---------------------------------------------------------------------------
# predictions


def predicted_S(F: FieldSpec, x: int, Q: int, constants: ConstantSet) -> Prediction:
    """Main terms for S(x; 0, Q).

    Q = x: [K:Q] x^2 log x + C1 x^2.
    Q < x: [K:Q] x Q log x - (phi(m_K)/phi_K(m_K)) x Q log(x/Q) + C2 Q x, which for
    abelian K equals [K:Q] x Q log Q + C2 Q x.
    """
    if not (1 <= Q <= x):
        raise ValueError("need 1 <= Q <= x")
    deg = F.degree
    if Q == x:
        return Prediction(deg * x * x * math.log(x) + constants.C1 * x * x, "eq5_full_range")
    value = deg * x * Q * math.log(x) - constants.ratio_mK * x * Q * math.log(x / Q) + constants.C2 * Q * x
    simplified = None
    if constants.abelian:
        simplified = deg * x * Q * math.log(Q) + constants.C2 * Q * x
        if not math.isclose(value, simplified, rel_tol=1e-12, abs_tol=1e-6 * x):
            raise AssertionError(f"abelian forms disagree: {value} vs {simplified}")
    return Prediction(value, "eq6_general", simplified)


def predicted_range(F: FieldSpec, x: int, Q1: int, Q2: int, constants: ConstantSet) -> Prediction:
    """Prediction for S(x; Q1, Q2) as a difference of S(x; 0, .) main terms."""
    hi = predicted_S(F, x, Q2, constants)
    if Q1 == 0:
        return hi
    lo = predicted_S(F, x, Q1, constants)
    simp = hi.simplified - lo.simplified if hi.simplified is not None and lo.simplified is not None else None
    return Prediction(hi.value - lo.value, hi.form, simp)


def variance_report(
    F: FieldSpec,
    x: int,
    Q1: int,
    Q2: int,
    constants: ConstantSet,
    profile: Optional[VarianceProfile] = None,
    with_hj: bool = False,
    threads: int = 1,
) -> VarianceReport:
    profile = profile or variance_profile(F, x, Q1, Q2, threads)
    S = profile.S(Q1, Q2)
    H = J = None
    if with_hj:
        H, J = decomposition_HJ(F, x, Q1, Q2)
    pred = predicted_range(F, x, Q1, Q2, constants)
    return VarianceReport(x, Q1, Q2, S, H, J, pred.value, pred.form, S - pred.value)


def geometric_grid(x: int, k: int) -> list[int]:
    """{x / 2^j : j = 0..k-1}, increasing."""
    return sorted({max(1, x >> j) for j in range(k)})


def regress_slope(Qs: Sequence[int], S_values: Sequence[float], x: int) -> tuple[float, float, float]:
    """Ordinary least squares of S/(xQ) on log Q: (slope, intercept, r^2)."""
    Qs = np.asarray(Qs, dtype=np.float64)
    S_values = np.asarray(S_values, dtype=np.float64)
    if Qs.shape[0] < 4:
        raise ValueError("need at least 4 points")
    if np.unique(Qs).shape[0] != Qs.shape[0]:
        raise ValueError("Q values must be distinct")
    X = np.log(Qs)
    Y = S_values / (x * Qs)
    A = np.column_stack([X, np.ones_like(X)])
    (slope, intercept), *_ = np.linalg.lstsq(A, Y, rcond=None)
    resid = Y - A @ np.array([slope, intercept])
    ss_tot = float(((Y - Y.mean()) ** 2).sum())
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2

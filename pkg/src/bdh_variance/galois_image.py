"""The image G_q of Gal(K(zeta_q)/K) in (Z/qZ)* and the generalised totient phi_K(q).

Two independent routes are provided: generating G_q from Frobenius residues
N(p) mod q of sampled primes, and a multiplicative product formula driven by
local data at the primes dividing m_K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .arith import euler_phi, factorize, iter_prime_segments, phi_table, powmod_array
from .field_catalog import FieldSpec, splitting_arrays

WINDOW_FACTOR = 20
SAMPLE_CAP = 1_000_000
MAX_MODULUS = 10_000_000


class StabilizationError(RuntimeError):
    """Subgroup generation hit the sample cap without a certified index."""


@dataclass(frozen=True)
class GqRecord:
    q: int
    members: tuple[int, ...]
    phi_K: int
    method: str  # "generated" or "formula"
    heuristic: bool = False  # stopping rule not backed by abelian-field theory
    sampled: int = 0

    @property
    def index(self) -> int:
        return euler_phi(self.q) // self.phi_K


@dataclass(frozen=True)
class LocalData:
    """Data at a prime l dividing m_K."""

    ell: int
    b: int  # l^b exactly divides m_K
    phi_K_ell: int
    # phi_K(l^j) for j = 1..b, all measured by generation
    phi_K_powers: tuple[int, ...]

    @property
    def constant_below_b(self) -> bool:
        """Whether phi_K(l^j) = phi_K(l) for every 1 <= j <= b."""
        return all(v == self.phi_K_ell for v in self.phi_K_powers)

    def phi_K_power(self, alpha: int, literal: bool = False) -> int:
        """phi_K(l^alpha) for alpha >= 1.

        ``literal`` uses phi_K(l) in place of phi_K(l^min(alpha, b)); the two
        agree exactly when ``constant_below_b`` holds.
        """
        if alpha <= 0:
            return 1
        base = self.phi_K_ell if literal else self.phi_K_powers[min(alpha, self.b) - 1]
        return self.ell ** max(alpha - self.b, 0) * base


@dataclass(frozen=True)
class BaseData:
    local: dict[int, LocalData]
    m_K: int
    phi_K_mK: int
    image_mK: tuple[int, ...] = field(repr=False)  # G_{m_K} as residues mod m_K

    @property
    def index_mK(self) -> int:
        """phi(m_K) / phi_K(m_K): the degree of the maximal abelian subfield."""
        return euler_phi(self.m_K) // self.phi_K_mK

    @property
    def ratio_mK(self) -> float:
        return float(self.index_mK)

    def image_table(self, g: int) -> np.ndarray:
        """Boolean membership table of G_g in Z/gZ, for g dividing m_K."""
        return _image_table(self.image_mK, self.m_K, g)


@lru_cache(maxsize=256)
def _image_table(image_mK: tuple[int, ...], m_K: int, g: int) -> np.ndarray:
    if m_K % g:
        raise ValueError(f"{g} does not divide m_K={m_K}")
    table = np.zeros(g, dtype=bool)
    table[np.asarray(image_mK, dtype=np.int64) % g] = True
    table.setflags(write=False)
    return table


# ---------------------------------------------------------------------------
# Frobenius residue supply


class _PrimeSupply:
    """Primes usable for sampling Frobenius residues, with their residue degree."""

    def __init__(self, F: FieldSpec):
        self.F = F
        self.ps = np.empty(0, dtype=np.int64)
        self.fs = np.empty(0, dtype=np.int64)
        self.limit = 1
        self._bad = set(F.bad_primes) | set(factorize(F.m_K))

    def ensure(self, count: int) -> None:
        while self.ps.shape[0] < count:
            hi = max(2 * self.limit, 1 << 16)
            chunk = np.concatenate(list(iter_prime_segments(self.limit + 1, hi)) or [np.empty(0, np.int64)])
            self.limit = hi
            if self._bad:
                chunk = chunk[~np.isin(chunk, list(self._bad))]
            e, f, _, exact = splitting_arrays(self.F, chunk)
            ok = exact & (e == 1)
            self.ps = np.concatenate([self.ps, chunk[ok]])
            self.fs = np.concatenate([self.fs, f[ok]])


@lru_cache(maxsize=64)
def _supply(F: FieldSpec) -> _PrimeSupply:
    return _PrimeSupply(F)


def _frobenius_residues(F: FieldSpec, q: int, start: int, count: int) -> np.ndarray:
    """N(p) mod q for sampled primes p not dividing q, positions [start, start+count)."""
    sup = _supply(F)
    # primes dividing q are dropped, so over-provision a little
    need = start + count + 64
    while True:
        sup.ensure(need)
        usable = np.flatnonzero(q % sup.ps[:need] != 0)
        if usable.shape[0] >= start + count:
            idx = usable[start : start + count]
            break
        need *= 2
    ps, fs = sup.ps[idx], sup.fs[idx]
    return powmod_array(ps, fs, np.full(ps.shape, q, dtype=np.int64))


def _close(member: np.ndarray, elems: np.ndarray, g: int, q: int) -> np.ndarray:
    """Extend the subgroup ``elems`` by g; updates ``member`` in place."""
    cosets = [elems]
    gk = g
    while not member[gk]:
        coset = elems * gk % q
        member[coset] = True
        cosets.append(coset)
        gk = gk * g % q
    return np.concatenate(cosets)


def gq_by_generation(
    F: FieldSpec,
    q: int,
    window_factor: int = WINDOW_FACTOR,
    cap: int = SAMPLE_CAP,
) -> GqRecord:
    """G_q as the subgroup generated by Frobenius residues N(p) mod q.

    Primes are sampled in increasing order. Sampling stops once the subgroup has
    survived ``window_factor * [K:Q] * log2(q+1)`` consecutive samples unchanged
    and its index in (Z/qZ)* divides [K:Q]; exhausting ``cap`` samples without
    that certificate raises StabilizationError.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if q > MAX_MODULUS:
        raise ValueError(f"q={q} exceeds the modulus cap {MAX_MODULUS}")
    heuristic = F.abelian is not True
    if q <= 2:
        return GqRecord(q, (1,), 1, "generated", heuristic, 0)
    phi_q = euler_phi(q)
    window = math.ceil(window_factor * F.degree * math.log2(q + 1))
    member = np.zeros(q, dtype=bool)
    member[1] = True
    elems = np.array([1], dtype=np.int64)
    res = np.empty(0, dtype=np.int64)
    last_change = -1
    i = 0
    while True:
        if i >= res.shape[0]:
            if res.shape[0] >= cap:
                raise StabilizationError(
                    f"{F}: G_{q} not certified after {cap} primes (index {phi_q // elems.shape[0]})"
                )
            grow = min(max(4 * window, res.shape[0], 1024), cap - res.shape[0])
            res = np.concatenate([res, _frobenius_residues(F, q, res.shape[0], grow)])
        fresh = np.flatnonzero(~member[res[i:]])
        j = i + int(fresh[0]) if fresh.shape[0] else None
        stop = last_change + window
        certified = (F.degree % (phi_q // elems.shape[0])) == 0
        if certified and (j is None or j > stop) and res.shape[0] > stop:
            members = np.sort(elems)
            return GqRecord(q, tuple(members.tolist()), int(members.shape[0]), "generated", heuristic, stop + 1)
        if j is None:
            i = res.shape[0]
            continue
        elems = _close(member, elems, int(res[j]), q)
        last_change = j
        i = j + 1


def base_data(F: FieldSpec) -> BaseData:
    return _base_data(F)


@lru_cache(maxsize=64)
def _base_data(F: FieldSpec) -> BaseData:
    local = {}
    for ell, b in sorted(factorize(F.m_K).items()) if F.m_K > 1 else []:
        powers = tuple(gq_by_generation(F, ell**j).phi_K for j in range(1, b + 1))
        local[ell] = LocalData(ell, b, powers[0], powers)
    rec = gq_by_generation(F, F.m_K)
    return BaseData(local, F.m_K, rec.phi_K, rec.members)


def phi_k_by_formula(
    F: FieldSpec,
    q: int,
    base: Optional[BaseData] = None,
    literal: bool = False,
) -> int:
    """Product formula for phi_K(q) over prime powers l^alpha || q.

    Primes not dividing m_K contribute l^(alpha-1)(l-1); a prime l | m_K
    contributes l^(alpha-b) * phi_K(l^b) when alpha >= b and phi_K(l^alpha)
    below that. With ``literal=True`` the local factor is taken to be phi_K(l)
    for every alpha <= b, which is only valid when phi_K is constant on
    l, l^2, ..., l^b (it fails e.g. at l=2 for Q(sqrt 2)).
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    base = base or base_data(F)
    out = 1
    for ell, alpha in factorize(q).items() if q > 1 else []:
        if F.m_K % ell:
            out *= ell ** (alpha - 1) * (ell - 1)
            continue
        if ell not in base.local:
            raise KeyError(f"missing local data at {ell}")
        out *= base.local[ell].phi_K_power(alpha, literal)
    return out


def gq_by_formula(F: FieldSpec, q: int, base: Optional[BaseData] = None) -> GqRecord:
    """G_q rebuilt as the preimage of G_gcd(q, m_K) under reduction mod gcd(q, m_K)."""
    base = base or base_data(F)
    g = math.gcd(q, F.m_K)
    units = np.array([a for a in range(1, q + 1) if math.gcd(a, q) == 1], dtype=np.int64)
    members = units[base.image_table(g)[units % g]]
    phi_K = phi_k_by_formula(F, q, base)
    if members.shape[0] != phi_K:
        raise AssertionError(f"preimage size {members.shape[0]} != formula {phi_K} at q={q}")
    return GqRecord(q, tuple(members.tolist()), phi_K, "formula", F.abelian is not True)


def phi_k_table(F: FieldSpec, limit: int, base: Optional[BaseData] = None) -> np.ndarray:
    """phi_K(n) for 0 <= n <= limit (entry 0 is 0), vectorised."""
    base = base or base_data(F)
    out = phi_table(limit)
    n = np.arange(limit + 1, dtype=np.int64)
    for ell, loc in base.local.items():
        alpha = np.zeros(limit + 1, dtype=np.int64)
        rest = n.copy()
        rest[0] = 1
        while True:
            hit = rest % ell == 0
            if not hit.any():
                break
            alpha[hit] += 1
            rest[hit] //= ell
        hit = alpha > 0
        local_phi = np.array([0] + [loc.phi_K_power(a) for a in range(1, int(alpha.max()) + 1)], dtype=np.int64)
        true_phi = (ell - 1) * ell ** np.maximum(alpha - 1, 0)
        out[hit] = out[hit] // true_phi[hit] * local_phi[alpha[hit]]
    return out


def is_abelian(F: FieldSpec, base: Optional[BaseData] = None) -> bool:
    """K is abelian iff its maximal abelian subfield, of degree phi(m_K)/phi_K(m_K), is K."""
    if F.abelian is not None:
        return F.abelian
    base = base or base_data(F)
    return base.index_mK == F.degree

"""Supported Galois number fields K/Q and the splitting of rational primes in them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import sympy

from . import polymod
from .arith import (
    cyclotomic_coeffs,
    euler_phi,
    factorize,
    is_prime,
    is_squarefree,
    kronecker,
    multiplicative_order,
    order_table,
    powmod_array,
    valuation,
)

KINDS = ("rational", "quadratic", "cyclotomic", "galois")


@dataclass(frozen=True)
class FieldSpec:
    """Immutable description of a Galois number field K/Q.

    ``poly`` is a monic defining polynomial (coefficients low to high). For the
    catalog kinds it generates the ring of integers, so its factorisation mod any
    unramified prime reflects the splitting of that prime.
    """

    kind: str
    degree: int
    m_K: int
    ramified_primes: frozenset[int]
    poly: tuple[int, ...]
    param: Optional[int] = None
    discriminant: Optional[int] = None
    # galois kind only: optional (p, e, f, g) rows for ramified/exceptional primes
    ramification_table: tuple[tuple[int, int, int, int], ...] = ()
    # galois kind only: primes dividing disc(poly) that are neither ramified nor tabled
    unresolved_primes: frozenset[int] = frozenset()
    label: str = field(default="", compare=False)

    @property
    def abelian(self) -> Optional[bool]:
        """True for catalog kinds; None (undecided here) for the generic galois kind."""
        return None if self.kind == "galois" else True

    @property
    def bad_primes(self) -> frozenset[int]:
        """Primes whose splitting is not read off the generic unramified rule."""
        return self.ramified_primes | self.unresolved_primes | {r[0] for r in self.ramification_table}

    def __str__(self) -> str:
        return self.label or self.kind


@dataclass(frozen=True)
class SplittingDatum:
    p: int
    e: int
    f: int
    g: int
    # False when (e, f, g) is a placeholder for a prime the field cannot resolve
    exact: bool = True

    @property
    def norm(self) -> int:
        return self.p**self.f


# ---------------------------------------------------------------------------
# construction


def rational() -> FieldSpec:
    return FieldSpec("rational", 1, 1, frozenset(), (0, 1), discriminant=1, label="Q")


def quadratic(d: int) -> FieldSpec:
    if d in (0, 1) or not is_squarefree(d):
        raise ValueError(f"quadratic field needs squarefree d != 0, 1 (got {d})")
    if d % 4 == 1:
        disc = d
        poly = (-(d - 1) // 4, -1, 1)  # x^2 - x - (d-1)/4
    else:
        disc = 4 * d
        poly = (-d, 0, 1)
    ramified = frozenset(factorize(disc))
    label = "Q(i)" if d == -1 else f"quad:{d}"
    return FieldSpec("quadratic", 2, abs(disc), ramified, poly, param=d, discriminant=disc, label=label)


def cyclotomic(n: int) -> FieldSpec:
    if n < 3 or n % 4 == 2:
        raise ValueError(f"cyclotomic field needs n >= 3 with n != 2 mod 4 (got {n})")
    deg = euler_phi(n)
    primes = factorize(n)
    disc_abs = n**deg
    for p in primes:
        disc_abs //= p ** (deg // (p - 1))
    disc = -disc_abs if (deg // 2) % 2 else disc_abs
    return FieldSpec(
        "cyclotomic", deg, n, frozenset(primes), cyclotomic_coeffs(n),
        param=n, discriminant=disc, label=f"cyc:{n}",
    )


def galois(
    coeffs: list[int] | tuple[int, ...],
    m_K: int,
    ramified: set[int] | frozenset[int] | list[int],
    table: Optional[dict[int, tuple[int, int, int]]] = None,
    check_primes: int = 30,
) -> FieldSpec:
    """Generic Galois field given by a monic irreducible polynomial.

    ``m_K`` and the ramified primes are trusted inputs; they are only checked for
    basic consistency with the polynomial discriminant.
    """
    coeffs = tuple(int(c) for c in coeffs)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    if len(coeffs) < 2:
        raise ValueError("polynomial must have degree >= 1")
    if coeffs[-1] != 1:
        raise ValueError("polynomial must be monic")
    if m_K <= 0:
        raise ValueError("m_K must be positive")
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(coeffs)), x)
    if not poly.is_irreducible:
        raise ValueError("polynomial is reducible over Q")
    deg = len(coeffs) - 1
    ramified = frozenset(int(p) for p in ramified)
    for p in ramified:
        if not is_prime(p):
            raise ValueError(f"ramified entry {p} is not prime")
    poly_disc = int(sympy.discriminant(poly))
    disc_primes = frozenset(int(p) for p in sympy.factorint(abs(poly_disc))) if deg > 1 else frozenset()
    stray = ramified - disc_primes
    if stray:
        raise ValueError(f"ramified primes {sorted(stray)} do not divide disc(poly)")
    rows = []
    for p, (e, f, g) in sorted((table or {}).items()):
        if e * f * g != deg:
            raise ValueError(f"table row for p={p} has e*f*g != {deg}")
        if (e > 1) != (p in ramified):
            raise ValueError(f"table row for p={p} disagrees with the ramified set")
        rows.append((int(p), int(e), int(f), int(g)))
    tabled = {r[0] for r in rows}
    unresolved = disc_primes - ramified - tabled
    spec = FieldSpec(
        "galois", deg, int(m_K), ramified, coeffs,
        ramification_table=tuple(rows), unresolved_primes=frozenset(unresolved),
        label="galois:" + ",".join(map(str, coeffs)) + f";{m_K};" + ",".join(map(str, sorted(ramified))),
    )
    # cheap Galois sanity check: unramified primes split into equal-degree factors
    checked, p = 0, 1
    while checked < check_primes:
        p = int(sympy.nextprime(p))
        if p in spec.bad_primes:
            continue
        splitting(spec, p)
        checked += 1
    return spec


def build_field(descriptor: str) -> FieldSpec:
    """Parse a text descriptor: Q, Q(i), quad:d, cyc:n, galois:c0,..,ck;mK;p1,p2,..."""
    text = descriptor.strip()
    low = text.lower()
    if low in ("q", "rational"):
        return rational()
    if low == "q(i)":
        return quadratic(-1)
    head, sep, rest = text.partition(":")
    if not sep:
        raise ValueError(f"unrecognised field descriptor {descriptor!r}")
    head = head.strip().lower()
    try:
        if head in ("quad", "quadratic"):
            return quadratic(int(rest))
        if head in ("cyc", "cyclotomic"):
            return cyclotomic(int(rest))
        if head == "galois":
            parts = rest.split(";")
            if len(parts) != 3:
                raise ValueError("galois descriptor needs coefficients;mK;ramified")
            coeffs = [int(c) for c in parts[0].split(",") if c.strip()]
            ram = [int(c) for c in parts[2].split(",") if c.strip()]
            return galois(coeffs, int(parts[1]), ram)
    except ValueError as exc:
        raise ValueError(f"bad field descriptor {descriptor!r}: {exc}") from exc
    raise ValueError(f"unknown field kind {head!r}")


# ---------------------------------------------------------------------------
# splitting


def splitting(F: FieldSpec, p: int) -> SplittingDatum:
    """(e, f, g) for the rational prime p in F."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    n = F.degree
    if F.kind == "rational":
        return SplittingDatum(p, 1, 1, 1)
    if F.kind == "quadratic":
        k = kronecker(F.discriminant, p)
        if k == 0:
            return SplittingDatum(p, 2, 1, 1)
        return SplittingDatum(p, 1, 1, 2) if k == 1 else SplittingDatum(p, 1, 2, 1)
    if F.kind == "cyclotomic":
        m = F.param
        a = valuation(m, p)
        e = euler_phi(p**a) if a else 1
        rest = m // p**a
        f = multiplicative_order(p, rest)
        return SplittingDatum(p, e, f, n // (e * f))
    for row in F.ramification_table:
        if row[0] == p:
            return SplittingDatum(*row)
    if p in F.ramified_primes:
        return SplittingDatum(p, n, 1, 1, exact=False)
    if p in F.unresolved_primes:
        return SplittingDatum(p, 1, n, 1, exact=False)
    return splitting_from_polynomial(F, p)


def splitting_from_polynomial(F: FieldSpec, p: int) -> SplittingDatum:
    """Unramified splitting read off the factorisation of F.poly mod p.

    Valid when p does not divide disc(F.poly); raises if the factor degrees are
    unequal, which cannot happen for a Galois field.
    """
    f_poly = list(F.poly)
    if not polymod.is_squarefree_mod(f_poly, p):
        raise ValueError(f"poly is not squarefree mod {p}")
    d = polymod.smallest_factor_degree(f_poly, p)
    xp = polymod.powmod([0, 1], p**d, f_poly, p)
    diff = xp + [0] * max(0, 2 - len(xp))
    diff[1] -= 1
    common = polymod.gcd(f_poly, polymod.reduce(diff, p), p)
    if len(common) - 1 != F.degree:
        raise ValueError(f"unequal factor degrees mod {p}: field is not Galois")
    return SplittingDatum(p, 1, d, F.degree // d)


def splitting_arrays(F: FieldSpec, ps: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised splitting for an array of primes: (e, f, g, exact)."""
    ps = np.asarray(ps, dtype=np.int64)
    size = ps.shape[0]
    e = np.ones(size, dtype=np.int64)
    f = np.ones(size, dtype=np.int64)
    g = np.full(size, F.degree, dtype=np.int64)
    exact = np.ones(size, dtype=bool)
    if F.kind == "rational" or size == 0:
        return e, f, g, exact

    if F.kind == "quadratic":
        D = F.discriminant
        ram = (D % ps) == 0
        odd = (ps != 2) & ~ram
        sym = np.zeros(size, dtype=np.int64)
        if np.any(odd):
            po = ps[odd]
            r = powmod_array(np.full(po.shape, D, dtype=np.int64), (po - 1) // 2, po)
            sym[odd] = np.where(r == 1, 1, -1)
        two = (ps == 2) & ~ram
        if np.any(two):
            sym[two] = 1 if D % 8 in (1, 7) else -1
        e[ram] = 2
        g[ram] = 1
        inert = sym == -1
        f[inert] = 2
        g[inert] = 1
        return e, f, g, exact

    if F.kind == "cyclotomic":
        m = F.param
        orders = order_table(m)
        unram = (m % ps) != 0
        f[unram] = orders[ps[unram] % m]
        g[unram] = F.degree // f[unram]
        for i in np.flatnonzero(~unram):
            s = splitting(F, int(ps[i]))
            e[i], f[i], g[i] = s.e, s.f, s.g
        return e, f, g, exact

    for i, p in enumerate(ps.tolist()):
        s = splitting(F, p)
        e[i], f[i], g[i], exact[i] = s.e, s.f, s.g, s.exact
    return e, f, g, exact


CATALOG = ("Q", "Q(i)", "quad:5", "quad:-3", "cyc:5", "cyc:8", "cyc:12")


def catalog() -> list[FieldSpec]:
    """The fields exercised by the acceptance suite."""
    return [build_field(d) for d in CATALOG]


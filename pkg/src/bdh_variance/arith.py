"""Elementary integer arithmetic: sieving, factoring, totients, orders, symbols."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterator

import numpy as np

DEFAULT_SEGMENT = 1 << 20


def simple_sieve(limit: int) -> np.ndarray:
    """All primes <= limit as an int64 array (plain Eratosthenes)."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    is_prime[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if is_prime[p]:
            is_prime[p * p :: 2 * p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def iter_prime_segments(lo: int, hi: int, segment: int = DEFAULT_SEGMENT) -> Iterator[np.ndarray]:
    """Yield primes in [lo, hi] in increasing order, one array per sieve segment.

    The segment length is the number of integers covered by each pass.
    """
    if segment < 2:
        raise ValueError("segment must be >= 2")
    lo = max(lo, 2)
    if hi < lo:
        return
    base = simple_sieve(math.isqrt(hi))
    start = lo
    while start <= hi:
        stop = min(start + segment, hi + 1)  # exclusive
        mask = np.ones(stop - start, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= stop:
                break
            first = max(p * p, -(-start // p) * p)
            if first < stop:
                mask[first - start :: p] = False
        yield np.flatnonzero(mask).astype(np.int64) + start
        start = stop


def primes_up_to(limit: int, segment: int = DEFAULT_SEGMENT) -> np.ndarray:
    chunks = list(iter_prime_segments(2, limit, segment))
    if not chunks:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(chunks)


@lru_cache(maxsize=8)
def cached_primes(limit: int) -> np.ndarray:
    out = simple_sieve(limit)
    out.setflags(write=False)
    return out


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        y = pow(a, d, n)
        if y in (1, n - 1):
            continue
        for _ in range(r - 1):
            y = y * y % n
            if y == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> dict[int, int]:
    """Prime factorisation of |n| by trial division (n != 0)."""
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    d = 5
    while d * d <= n:
        for p in (d, d + 2):
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
        d += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_squarefree(n: int) -> bool:
    return n != 0 and all(e == 1 for e in factorize(n).values())


def valuation(n: int, p: int) -> int:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def euler_phi(n: int) -> int:
    if n < 1:
        raise ValueError("phi is defined for n >= 1")
    out = n
    for p in factorize(n):
        out = out // p * (p - 1)
    return out


def phi_table(limit: int) -> np.ndarray:
    """phi(n) for 0 <= n <= limit (entry 0 is 0)."""
    phi = np.arange(limit + 1, dtype=np.int64)
    for p in simple_sieve(limit):
        phi[p::p] -= phi[p::p] // p
    return phi


def multiplicative_order(a: int, n: int) -> int:
    """Order of a in (Z/nZ)*; requires gcd(a, n) == 1."""
    if n == 1:
        return 1
    a %= n
    if math.gcd(a, n) != 1:
        raise ValueError(f"{a} is not a unit mod {n}")
    order = euler_phi(n)
    for p, e in factorize(order).items():
        for _ in range(e):
            if pow(a, order // p, n) == 1:
                order //= p
            else:
                break
    return order


def order_table(n: int) -> np.ndarray:
    """Multiplicative order of every residue mod n (0 for non-units)."""
    out = np.zeros(n, dtype=np.int64)
    for r in range(n):
        if math.gcd(r, n) == 1:
            out[r] = multiplicative_order(r, n)
    return out


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n)."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    if n % 2 == 0:
        if a % 2 == 0:
            return 0
        v = valuation(n, 2)
        n >>= v
        if v % 2 == 1 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol for odd n
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def powmod_array(base: np.ndarray, exponent: np.ndarray, modulus: np.ndarray) -> np.ndarray:
    """Elementwise base**exponent % modulus for int64 arrays with modulus < 2**31."""
    base = np.mod(base, modulus).astype(np.int64)
    exponent = np.asarray(exponent, dtype=np.int64).copy()
    result = np.ones_like(base)
    while np.any(exponent > 0):
        odd = (exponent & 1) == 1
        result = np.where(odd, result * base % modulus, result)
        base = base * base % modulus
        exponent >>= 1
    return result


@lru_cache(maxsize=64)
def cyclotomic_coeffs(n: int) -> tuple[int, ...]:
    """Integer coefficients (low to high) of the n-th cyclotomic polynomial."""
    num = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            num = _exact_div(num, list(cyclotomic_coeffs(d)))
    return tuple(num)


def _exact_div(num: list[int], den: list[int]) -> list[int]:
    num = num[:]
    out = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for i in range(len(out) - 1, -1, -1):
        c, rem = divmod(num[i + len(den) - 1], lead)
        if rem:
            raise ArithmeticError("inexact polynomial division")
        out[i] = c
        for j, dc in enumerate(den):
            num[i + j] -= c * dc
    if any(num[: len(den) - 1]):
        raise ArithmeticError("inexact polynomial division")
    return out

"""Dense polynomials over F_p, coefficients low to high, as Python int lists."""

from __future__ import annotations


def trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def reduce(a: list[int], p: int) -> list[int]:
    return trim([c % p for c in a])


def divmod_poly(a: list[int], b: list[int], p: int) -> tuple[list[int], list[int]]:
    a = reduce(list(a), p)
    b = reduce(list(b), p)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b):
        shift = len(a) - len(b)
        c = a[-1] * inv % p
        q[shift] = c
        for i, bc in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bc) % p
        trim(a)
    return trim(q), a


def mulmod(a: list[int], b: list[int], f: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    prod = [0] * (len(a) + len(b) - 1)
    for i, ac in enumerate(a):
        if ac:
            for j, bc in enumerate(b):
                prod[i + j] += ac * bc
    return divmod_poly(prod, f, p)[1]


def powmod(a: list[int], e: int, f: list[int], p: int) -> list[int]:
    result = [1]
    base = divmod_poly(a, f, p)[1]
    while e:
        if e & 1:
            result = mulmod(result, base, f, p)
        base = mulmod(base, base, f, p)
        e >>= 1
    return result


def gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a = reduce(list(a), p)
    b = reduce(list(b), p)
    while b:
        a, b = b, divmod_poly(a, b, p)[1]
    if a:
        inv = pow(a[-1], -1, p)
        a = [c * inv % p for c in a]
    return a


def derivative(a: list[int], p: int) -> list[int]:
    return reduce([i * c for i, c in enumerate(a)][1:], p)


def is_squarefree_mod(f: list[int], p: int) -> bool:
    f = reduce(list(f), p)
    return len(gcd(f, derivative(f, p), p)) == 1


def smallest_factor_degree(f: list[int], p: int) -> int:
    """Smallest d >= 1 with gcd(X^(p^d) - X, f) nontrivial mod p.

    For a squarefree f this is the smallest degree of an irreducible factor;
    when f defines a Galois field and p is unramified all factors share it.
    """
    f = reduce(list(f), p)
    n = len(f) - 1
    if n < 1:
        raise ValueError("polynomial must have positive degree mod p")
    x = [0, 1]
    h = x
    for d in range(1, n + 1):
        h = powmod(h, p, f, p)
        diff = h + [0] * max(0, 2 - len(h))
        diff[1] -= 1
        if len(gcd(f, reduce(diff, p), p)) > 1:
            return d
    raise ArithmeticError("no factor found; polynomial is not squarefree?")

"""Elementary number theory used throughout the package."""

from fractions import Fraction
from functools import lru_cache
import math

import numpy as np
from sympy import factorint, kronecker_symbol


@lru_cache(maxsize=65536)
def factor(n):
    """Return the prime factorization of ``|n|`` as a sorted tuple of (p, e)."""
    n = abs(int(n))
    if n <= 1:
        return ()
    return tuple(sorted(factorint(n).items()))


def prime_divisors(n):
    return [p for p, _ in factor(n)]


def valuation(n, p):
    """p-adic valuation of a nonzero integer or Fraction."""
    if isinstance(n, Fraction):
        return valuation(n.numerator, p) - valuation(n.denominator, p)
    n = abs(int(n))
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def unit_part(n, p):
    """Return ``n / p^v`` for the p-adic valuation ``v`` of ``n``."""
    v = valuation(n, p)
    if isinstance(n, Fraction):
        return n / Fraction(p) ** v
    return int(n) // p ** v


def is_squarefree(n):
    return all(e == 1 for _, e in factor(n))


def num_divisors(n):
    d = 1
    for _, e in factor(n):
        d *= e + 1
    return d


def omega(n):
    """Number of distinct prime factors."""
    return len(factor(n))


def kronecker(d, n):
    """Kronecker symbol (d/n)."""
    return int(kronecker_symbol(int(d), int(n)))


def core_discriminant(d):
    """Fundamental discriminant of Q(sqrt(d)) for a nonzero integer ``d``.

    Returns 1 when ``d`` is a perfect square.
    """
    sign = -1 if d < 0 else 1
    core = sign
    for p, e in factor(d):
        if e % 2:
            core *= p
    if core % 4 != 1:
        core *= 4
    return core


def is_fundamental_discriminant(d):
    if d == 1 or d == 0:
        return False
    return core_discriminant(d) == d


def legendre(a, p):
    """Legendre symbol for an odd prime ``p``."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def is_square_mod8_unit(u):
    return u % 8 == 1


def prime_sieve(limit):
    """Return a numpy array of all primes ``<= limit``."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if flags[p]:
            flags[p * p::2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def squarefree_sieve(limit):
    """Boolean array ``a`` with ``a[n]`` true iff ``n`` is squarefree (``a[0]`` false)."""
    flags = np.ones(limit + 1, dtype=bool)
    flags[0] = False
    for p in prime_sieve(math.isqrt(limit)):
        flags[p * p::p * p] = False
    return flags


def divisor_count_sieve(limit):
    """Array ``d`` with ``d[n]`` the number of divisors of ``n`` for ``n <= limit``."""
    d = np.zeros(limit + 1, dtype=np.int64)
    for k in range(1, limit + 1):
        d[k::k] += 1
    return d


def bernoulli2_character(disc):
    """Generalized Bernoulli number B_{2,chi} for the primitive character of ``disc``.

    ``disc`` must be a fundamental discriminant or 1.
    """
    f = abs(disc)
    if f == 1:
        return Fraction(1, 6)
    total = Fraction(0)
    for a in range(1, f + 1):
        c = kronecker(disc, a)
        if c:
            total += c * (Fraction(a * a, f * f) - Fraction(a, f) + Fraction(1, 6))
    return f * total


def smallest_prime_factor_sieve(limit):
    """Array ``s`` with ``s[n]`` the least prime factor of ``n`` (``s[0] = s[1] = 0``)."""
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in prime_sieve(math.isqrt(limit)):
        block = spf[p * p::p]
        block[block == 0] = p
    rest = np.flatnonzero(spf == 0)
    rest = rest[rest >= 2]
    spf[rest] = rest
    return spf


def factor_with_sieve(n, spf):
    """Factorization of ``n`` as (p, e) pairs using a least-prime-factor table."""
    out = []
    while n > 1:
        p = int(spf[n])
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out.append((p, e))
    return out

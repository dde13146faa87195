"""Sieved arithmetic tables and prime counting along linear forms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ResourceLimitError

SIEVE_LIMIT_MAX = 10 ** 8

# Deterministic Miller-Rabin witness set, valid for all n < 3.3 * 10**24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_LIMIT = 3_317_044_064_679_887_385_961_981
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def is_prime(n: int) -> bool:
    """Deterministic primality test for n < 3.3e24."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    if n >= _MR_LIMIT:
        raise ValueError(f"{n} exceeds the deterministic Miller-Rabin range")
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for base in _MR_BASES:
        x = pow(base, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass
class ArithTables:
    """Primality, totient, squarefree, and divisor-count tables on 0..limit."""

    limit: int
    is_prime: np.ndarray
    phi: np.ndarray
    is_squarefree: np.ndarray
    divisor_count: np.ndarray

    def phi_summatory(self, m: int) -> int:
        """Phi(m) = sum of phi(n) for 1 <= n <= m."""
        if not 1 <= m <= self.limit:
            raise ValueError(f"need 1 <= m <= {self.limit}, got {m}")
        return int(self.phi[1:m + 1].sum())

    def prime_count_upto(self) -> np.ndarray:
        """pi(n) for n = 0..limit as an int64 array (computed on demand)."""
        return np.cumsum(self.is_prime.astype(np.int64))


def build_tables(limit: int) -> ArithTables:
    """Sieve all four tables up to limit (inclusive)."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    if limit > SIEVE_LIMIT_MAX:
        raise ResourceLimitError(f"sieve limit {limit} exceeds {SIEVE_LIMIT_MAX}")
    n = limit + 1
    isp = np.ones(n, dtype=bool)
    isp[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if isp[p]:
            isp[p * p::p] = False

    primes = np.nonzero(isp)[0]
    phi = np.arange(n, dtype=np.int64)
    for p in primes:
        phi[p::p] = phi[p::p] // p * (p - 1)

    sf = np.ones(n, dtype=bool)
    sf[0] = False
    for p in range(2, math.isqrt(limit) + 1):
        if isp[p]:
            sf[p * p::p * p] = False

    dc = np.zeros(n, dtype=np.int32)
    for i in range(1, n):
        dc[i::i] += 1

    return ArithTables(limit=limit, is_prime=isp, phi=phi,
                       is_squarefree=sf, divisor_count=dc)


_CACHED: Optional[ArithTables] = None


def get_tables(limit: int) -> ArithTables:
    """Shared tables covering at least 0..limit, grown geometrically."""
    global _CACHED
    if _CACHED is None or _CACHED.limit < limit:
        target = max(limit, 1024)
        if _CACHED is not None:
            target = max(target, min(2 * _CACHED.limit, SIEVE_LIMIT_MAX))
        _CACHED = build_tables(target)
    return _CACHED


def phi_summatory(m: int) -> int:
    """Phi(m) over the shared tables."""
    return get_tables(m).phi_summatory(m)


def factorize_distinct(m: int) -> list[int]:
    """Distinct prime factors of m >= 1 by trial division."""
    if m < 1:
        raise ValueError("m must be >= 1")
    out = []
    p = 2
    while p * p <= m:
        if m % p == 0:
            out.append(p)
            while m % p == 0:
                m //= p
        p += 1 if p == 2 else 2
    if m > 1:
        out.append(m)
    return out


def coprime_count(x: int, m: int) -> int:
    """#{1 <= k <= x : gcd(k, m) = 1} by inclusion-exclusion over primes of m.

    Exact for any x >= 0; the error term relative to x * phi(m)/m is bounded
    by the number of squarefree divisors of m.
    """
    if x < 0:
        raise ValueError("x must be >= 0")
    ps = factorize_distinct(m)
    total = 0
    for mask in range(1 << len(ps)):
        d = 1
        bits = 0
        mm = mask
        i = 0
        while mm:
            if mm & 1:
                d *= ps[i]
                bits += 1
            mm >>= 1
            i += 1
        total += (-1) ** bits * (x // d)
    return total


def _linear_value_prime(value: int, tables: Optional[ArithTables]) -> bool:
    if tables is not None and 0 <= value <= tables.limit:
        return bool(tables.is_prime[value])
    return is_prime(value)


def pi_prime_linear(x: int, q: int, a: int,
                    tables: Optional[ArithTables] = None) -> int:
    """#{1 <= l <= x : l*q + a prime}.  Requires gcd(q, a) = 1."""
    if x < 0:
        raise ValueError("x must be >= 0")
    if q < 1:
        raise ValueError("q must be >= 1")
    if math.gcd(q, a) != 1:
        raise ValueError(f"gcd({q}, {a}) != 1: the progression carries a fixed divisor")
    count = 0
    for ell in range(1, x + 1):
        if _linear_value_prime(ell * q + a, tables):
            count += 1
    return count


def pi_prime_joint(x: int, q: int, a: int, q2: int, a2: int,
                   tables: Optional[ArithTables] = None) -> int:
    """#{1 <= l <= x : l*q + a and l*q2 + a2 both prime}.

    Requires gcd(q, a) = gcd(q2, a2) = 1 and a*q2 - q*a2 != 0, i.e. the two
    forms are not proportional.
    """
    if x < 0:
        raise ValueError("x must be >= 0")
    if q < 1 or q2 < 1:
        raise ValueError("q and q2 must be >= 1")
    if math.gcd(q, a) != 1 or math.gcd(q2, a2) != 1:
        raise ValueError("each form needs gcd(q, a) = 1")
    if a * q2 - q * a2 == 0:
        raise ValueError("degenerate pair: a*q2 - q*a2 = 0")
    count = 0
    for ell in range(1, x + 1):
        if _linear_value_prime(ell * q + a, tables) and \
           _linear_value_prime(ell * q2 + a2, tables):
            count += 1
    return count

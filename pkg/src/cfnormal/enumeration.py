"""Ordered enumeration of the rational sequences whose expansions get concatenated.

Every kind orders its members by ascending denominator, then ascending
numerator, and indices are 1-based.  ALL_WITH_DUPLICATES ranges over raw
pairs (num, den) with 1 <= num < den, so the same value can appear many
times; every other kind ranges over rationals in lowest terms.
"""

from __future__ import annotations

import enum
import math
from typing import Iterator, Union

import numpy as np

from .core import Rational
from .sieves import coprime_count, get_tables

Member = Union[Rational, tuple[int, int]]


class SequenceKind(enum.Enum):
    ALL_WITH_DUPLICATES = "aks-dup"
    ALL_LOWEST_TERMS = "all"
    SQUAREFREE_BOTH = "squarefree"
    TYPE1 = "type1"
    TYPE2 = "type2"
    TYPE3 = "type3"

    @classmethod
    def from_string(cls, text: str) -> "SequenceKind":
        key = text.strip().lower()
        if key in _KIND_ALIASES:
            return _KIND_ALIASES[key]
        raise ValueError(
            f"unknown sequence kind {text!r}; choose from "
            f"{sorted(set(_KIND_ALIASES))}")


_KIND_ALIASES: dict[str, SequenceKind] = {
    "aks-dup": SequenceKind.ALL_WITH_DUPLICATES,
    "all-with-duplicates": SequenceKind.ALL_WITH_DUPLICATES,
    "all": SequenceKind.ALL_LOWEST_TERMS,
    "lowest-terms": SequenceKind.ALL_LOWEST_TERMS,
    "squarefree": SequenceKind.SQUAREFREE_BOTH,
    "squarefree-both": SequenceKind.SQUAREFREE_BOTH,
    "type1": SequenceKind.TYPE1,
    "nat-prime": SequenceKind.TYPE1,
    "type2": SequenceKind.TYPE2,
    "prime-nat": SequenceKind.TYPE2,
    "type3": SequenceKind.TYPE3,
    "prime-prime": SequenceKind.TYPE3,
}


def _numerators(kind: SequenceKind, den: int) -> Iterator[int]:
    """Valid numerators for a fixed denominator, ascending."""
    tables = get_tables(den)
    isp = tables.is_prime
    sf = tables.is_squarefree
    if kind is SequenceKind.ALL_WITH_DUPLICATES:
        yield from range(1, den)
    elif kind is SequenceKind.ALL_LOWEST_TERMS:
        for num in range(1, den):
            if math.gcd(num, den) == 1:
                yield num
    elif kind is SequenceKind.SQUAREFREE_BOTH:
        if sf[den]:
            for num in range(1, den):
                if sf[num] and math.gcd(num, den) == 1:
                    yield num
    elif kind is SequenceKind.TYPE1:
        if isp[den]:
            yield from range(1, den)
    elif kind is SequenceKind.TYPE2:
        for num in range(2, den):
            if isp[num] and den % num != 0:
                yield num
    elif kind is SequenceKind.TYPE3:
        if isp[den]:
            for num in range(2, den):
                if isp[num]:
                    yield num
    else:  # pragma: no cover
        raise AssertionError(kind)


def _wrap(kind: SequenceKind, num: int, den: int) -> Member:
    if kind is SequenceKind.ALL_WITH_DUPLICATES:
        return (num, den)
    return Rational(num, den)


def iter_members(kind: SequenceKind) -> Iterator[Member]:
    """Infinite ordered enumeration of the kind's members."""
    den = 2
    while True:
        for num in _numerators(kind, den):
            yield _wrap(kind, num, den)
        den += 1


def enumerate_R(kind: SequenceKind, m: int) -> Iterator[Member]:
    """Members with denominator at most m, in order."""
    if m < 1:
        raise ValueError("m must be >= 1")
    for den in range(2, m + 1):
        for num in _numerators(kind, den):
            yield _wrap(kind, num, den)


def _mobius_and_sf(limit: int) -> tuple[np.ndarray, np.ndarray]:
    tables = get_tables(limit)
    sf = tables.is_squarefree[:limit + 1]
    omega = np.zeros(limit + 1, dtype=np.int8)
    primes = np.nonzero(tables.is_prime[:limit + 1])[0]
    for p in primes:
        omega[p::p] += 1
    mob = np.where(sf, np.where(omega % 2 == 0, 1, -1), 0).astype(np.int64)
    mob[0] = 0
    return mob, sf


def _count_squarefree_both(m: int) -> int:
    # Pairs (a, q), a < q <= m, both squarefree and coprime.  With
    # S_d = #{n <= m : d | n, n squarefree}, inclusion-exclusion over the
    # common divisor gives  sum_d mu(d) S_d^2  ordered pairs including (1,1),
    # hence (that sum - 1) / 2 pairs with a < q.
    mob, sf = _mobius_and_sf(m)
    total = 0
    for d in range(1, m + 1):
        if mob[d] == 0:
            continue
        s_d = int(np.count_nonzero(sf[d::d]))
        total += int(mob[d]) * s_d * s_d
    return (total - 1) // 2


def count_R(kind: SequenceKind, m: int) -> int:
    """Exact number of members with denominator at most m, without enumeration."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if kind is SequenceKind.ALL_WITH_DUPLICATES:
        return m * (m - 1) // 2
    if m < 2:
        return 0
    tables = get_tables(m)
    if kind is SequenceKind.ALL_LOWEST_TERMS:
        return tables.phi_summatory(m) - 1
    if kind is SequenceKind.SQUAREFREE_BOTH:
        return _count_squarefree_both(m)
    isp = tables.is_prime[:m + 1]
    if kind is SequenceKind.TYPE1:
        primes = np.nonzero(isp)[0]
        return int((primes - 1).sum())
    pi = np.cumsum(isp.astype(np.int64))
    if kind is SequenceKind.TYPE3:
        primes = np.nonzero(isp)[0]
        return int((pi[primes] - 1).sum())
    if kind is SequenceKind.TYPE2:
        omega = np.zeros(m + 1, dtype=np.int64)
        for p in np.nonzero(isp)[0]:
            omega[p::p] += 1
        ns = np.arange(2, m + 1)
        per_den = pi[ns - 1] - omega[ns] + isp[ns]
        return int(per_den.sum())
    raise AssertionError(kind)  # pragma: no cover


def _position_in_den(kind: SequenceKind, num: int, den: int) -> int:
    """1-based position of num among the kind's numerators for den."""
    tables = get_tables(den)
    if kind is SequenceKind.ALL_WITH_DUPLICATES or kind is SequenceKind.TYPE1:
        return num
    if kind is SequenceKind.ALL_LOWEST_TERMS:
        return coprime_count(num, den)
    if kind is SequenceKind.SQUAREFREE_BOTH:
        sf = tables.is_squarefree
        return sum(1 for k in range(1, num + 1)
                   if sf[k] and math.gcd(k, den) == 1)
    pi = np.cumsum(tables.is_prime[:den].astype(np.int64))
    if kind is SequenceKind.TYPE3:
        return int(pi[num])
    if kind is SequenceKind.TYPE2:
        dividing = sum(1 for p in set(_prime_factors(den)) if p <= num)
        return int(pi[num]) - dividing
    raise AssertionError(kind)  # pragma: no cover


def _prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return out


def _is_member(kind: SequenceKind, num: int, den: int) -> bool:
    if not 0 < num < den:
        return False
    tables = get_tables(den)
    isp = tables.is_prime
    sf = tables.is_squarefree
    if kind is SequenceKind.ALL_WITH_DUPLICATES:
        return True
    if math.gcd(num, den) != 1:
        return False
    if kind is SequenceKind.ALL_LOWEST_TERMS:
        return True
    if kind is SequenceKind.SQUAREFREE_BOTH:
        return bool(sf[num] and sf[den])
    if kind is SequenceKind.TYPE1:
        return bool(isp[den])
    if kind is SequenceKind.TYPE2:
        return bool(isp[num])
    if kind is SequenceKind.TYPE3:
        return bool(isp[num] and isp[den])
    raise AssertionError(kind)  # pragma: no cover


def index_of(kind: SequenceKind, r: Member) -> int:
    """1-based index of a member within its kind's ordering."""
    if isinstance(r, Rational):
        num, den = r.num, r.den
    else:
        num, den = r
    if not _is_member(kind, num, den):
        raise ValueError(f"{num}/{den} is not a member of {kind.value}")
    return count_R(kind, den - 1) + _position_in_den(kind, num, den)


def rational_at(kind: SequenceKind, i: int) -> Member:
    """The i-th member (1-based); inverse of index_of."""
    if i < 1:
        raise ValueError("index must be >= 1")
    if kind is SequenceKind.ALL_WITH_DUPLICATES:
        # count over dens <= n is n(n-1)/2; find the smallest den covering i
        den = max(2, math.isqrt(2 * i))
        while den * (den - 1) // 2 < i:
            den += 1
        while den > 2 and (den - 1) * (den - 2) // 2 >= i:
            den -= 1
        return (i - (den - 1) * (den - 2) // 2, den)
    hi = 4
    while count_R(kind, hi) < i:
        hi *= 2
        if hi > 10 ** 9:
            raise ValueError(f"index {i} out of reachable range")
    lo = 1
    while lo < hi:
        mid = (lo + hi) // 2
        if count_R(kind, mid) >= i:
            hi = mid
        else:
            lo = mid + 1
    den = lo
    offset = i - count_R(kind, den - 1)
    for pos, num in enumerate(_numerators(kind, den), start=1):
        if pos == offset:
            return _wrap(kind, num, den)
    raise AssertionError("count_R disagrees with _numerators")  # pragma: no cover


def members_block(kind: SequenceKind, d_lo: int, d_hi: int) -> tuple[np.ndarray, np.ndarray]:
    """All (num, den) members with d_lo <= den < d_hi as int64 arrays, in order.

    Vectorized counterpart of enumerate_R used by the high-throughput digit
    generators; raw pairs for ALL_WITH_DUPLICATES, reduced members otherwise.
    """
    d_lo = max(d_lo, 2)
    if d_hi <= d_lo:
        return (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
    tables = get_tables(d_hi - 1)
    isp = tables.is_prime
    sf = tables.is_squarefree

    if kind in (SequenceKind.TYPE1, SequenceKind.TYPE3):
        dens = np.arange(d_lo, d_hi, dtype=np.int64)
        dens = dens[isp[d_lo:d_hi]]
        if kind is SequenceKind.TYPE1:
            counts = dens - 1
        else:
            pi = np.cumsum(isp[:d_hi].astype(np.int64))
            counts = pi[dens] - 1
    else:
        dens = np.arange(d_lo, d_hi, dtype=np.int64)
        if kind is SequenceKind.SQUAREFREE_BOTH:
            dens = dens[sf[d_lo:d_hi]]
        counts = dens - 1

    total = int(counts.sum())
    if total == 0:
        return (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
    den_rep = np.repeat(dens, counts)
    starts = np.cumsum(counts) - counts
    local = np.arange(total, dtype=np.int64) - np.repeat(starts, counts)

    if kind is SequenceKind.TYPE3:
        primes = np.nonzero(isp[:d_hi])[0].astype(np.int64)
        num = primes[local]
    else:
        num = local + 1

    if kind is SequenceKind.ALL_WITH_DUPLICATES or kind is SequenceKind.TYPE1 \
            or kind is SequenceKind.TYPE3:
        return num, den_rep
    if kind is SequenceKind.ALL_LOWEST_TERMS:
        keep = np.gcd(num, den_rep) == 1
    elif kind is SequenceKind.SQUAREFREE_BOTH:
        keep = sf[num] & (np.gcd(num, den_rep) == 1)
    elif kind is SequenceKind.TYPE2:
        keep = isp[num] & (den_rep % num != 0)
    else:  # pragma: no cover
        raise AssertionError(kind)
    return num[keep], den_rep[keep]

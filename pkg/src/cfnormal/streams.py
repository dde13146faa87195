"""Digit streams over rational sequences, with pattern counting and growth tracking.

A stream is the concatenation of the continued fraction digits of a kind's
members in order.  Occurrence counts follow the start-position convention:
A_s(N) counts the positions 1 <= i <= N at which the pattern s begins, so an
occurrence may extend up to k-1 digits past N and the counters read that far
ahead.

Two independent digit generators are provided: a scalar per-rational stream
(DigitStream) and a vectorized block generator (digit_block) that runs the
Euclidean algorithm across whole denominator ranges at once.  They must agree
digit for digit; tests hold them to that.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from .core import Convention, Rational, euclid_digits
from .enumeration import Member, SequenceKind, iter_members, members_block, rational_at
from .errors import ResourceLimitError
from .measures import KHINCHIN_LEVY, GOLDEN, Pattern, gauss_measure, pattern_grid


@dataclass
class StreamConfig:
    """Tunables shared by the stream consumers."""

    checkpoint_interval: int = 10 ** 4
    buffer_digits: int = 2 ** 20
    max_patterns: int = 10 ** 4


DEFAULT_CONFIG = StreamConfig()


class DigitStream:
    """Scalar digit stream over a kind or an explicit index list.

    Tracks enough bookkeeping to bracket any emitted digit position back to
    the rational it came from: after the c-th digit, `rational_index` is the
    1-based index M of the rational containing position c, `sum_len` is the
    total digit length of members 1..M, and `max_len` their longest expansion.
    """

    def __init__(self, kind: Optional[SequenceKind] = None,
                 convention: Convention = Convention.LONG,
                 indices: Optional[Iterable[int]] = None):
        if (kind is None) == (indices is None):
            raise ValueError("give exactly one of kind or indices")
        self.kind = kind
        self.convention = convention
        if indices is not None:
            self._members: Iterator[Member] = self._indexed_members(indices)
        else:
            self._members = iter_members(kind)
        self.position = 0
        self.rational_index = 0
        self.sum_len = 0
        self.max_len = 0
        self._buf: deque[int] = deque()

    @staticmethod
    def _indexed_members(indices: Iterable[int]) -> Iterator[Member]:
        cache: dict[int, Rational] = {}
        for i in indices:
            if i not in cache:
                member = rational_at(SequenceKind.ALL_LOWEST_TERMS, i)
                assert isinstance(member, Rational)
                cache[i] = member
            yield cache[i]

    def _refill(self) -> None:
        member = next(self._members)  # raises StopIteration on finite sources
        if isinstance(member, tuple):
            num, den = member
            g = math.gcd(num, den)
            num, den = num // g, den // g
        else:
            num, den = member.num, member.den
        digs = euclid_digits(num, den)
        if self.convention is Convention.LONG:
            digs[-1] -= 1
            digs.append(1)
        self.rational_index += 1
        self.sum_len += len(digs)
        if len(digs) > self.max_len:
            self.max_len = len(digs)
        self._buf.extend(digs)

    def __iter__(self) -> "DigitStream":
        return self

    def __next__(self) -> int:
        while not self._buf:
            self._refill()
        self.position += 1
        return self._buf.popleft()

    def take(self, n: int) -> list[int]:
        out = []
        for _ in range(n):
            try:
                out.append(next(self))
            except StopIteration:
                break
        return out


def _max_expansion_length(max_den: int, convention: Convention) -> int:
    # q_L >= Fibonacci(L+1) >= G^(L-1), so L <= log_G(den) + 2; long adds one.
    length = int(math.log(max(max_den, 2)) / math.log(GOLDEN)) + 3
    return length + (1 if convention is Convention.LONG else 0)


def digit_matrix(num: np.ndarray, den: np.ndarray,
                 convention: Convention = Convention.LONG
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise continued fraction digits of num/den (reduced first).

    Returns (matrix, lengths): matrix[i, :lengths[i]] are the digits of row i
    and the padding is zero.  Runs the Euclidean algorithm across all rows in
    lockstep, which is what makes million-digit streams cheap in Python.
    """
    num = np.asarray(num, dtype=np.int64)
    den = np.asarray(den, dtype=np.int64)
    if num.shape != den.shape:
        raise ValueError("num and den must have the same shape")
    if len(num) and (np.any(num < 1) or np.any(num >= den)):
        raise ValueError("need 0 < num < den rowwise")
    g = np.gcd(num, den)
    p = num // g
    q = den // g
    rows = len(p)
    width = _max_expansion_length(int(den.max()) if rows else 2, convention)
    mat = np.zeros((rows, width), dtype=np.int64)
    lengths = np.zeros(rows, dtype=np.int64)
    col = 0
    active = p > 0
    while active.any():
        pa = p[active]
        qa = q[active]
        a = qa // pa
        r = qa - a * pa
        mat[active, col] = a
        lengths[active] += 1
        q[active] = pa
        p[active] = r
        active = p > 0
        col += 1
    if convention is Convention.LONG:
        idx = np.arange(rows)
        last = lengths - 1
        mat[idx, last] -= 1
        mat[idx, last + 1] = 1
        lengths += 1
    return mat, lengths


def flatten_digit_matrix(mat: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Concatenate rows of a padded digit matrix in order."""
    mask = np.arange(mat.shape[1]) < lengths[:, None]
    return mat[mask]


def digit_block(kind: SequenceKind, convention: Convention, n_digits: int,
                ) -> np.ndarray:
    """First n_digits of the kind's stream as an int64 array (vectorized)."""
    if n_digits < 0:
        raise ValueError("n_digits must be >= 0")
    chunks: list[np.ndarray] = []
    have = 0
    d_lo = 2
    floor_pairs = 64
    while have < n_digits:
        # size each denominator block to the digits still missing: mean
        # expansion length grows like 0.83 ln(den), and the doubling floor
        # keeps sparse kinds from crawling through hundreds of tiny blocks
        avg_len = max(1.0, 0.83 * math.log(d_lo + 1))
        want_pairs = max(int((n_digits - have) / avg_len) + 16, floor_pairs)
        budget = min(3_000_000, 2 * want_pairs)
        d_hi = max(d_lo + 2, math.isqrt(d_lo * d_lo + 2 * budget))
        num, den = members_block(kind, d_lo, d_hi)
        if len(num):
            mat, lengths = digit_matrix(num, den, convention)
            flat = flatten_digit_matrix(mat, lengths)
            chunks.append(flat)
            have += len(flat)
        d_lo = d_hi
        floor_pairs *= 2
    if not chunks:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(chunks)[:n_digits]


class FrequencyTracker:
    """Multi-pattern occurrence counter over a digit stream.

    Builds an Aho-Corasick prefix automaton over the alphabet 1..max_digit
    plus a single OTHER symbol (any larger digit), with failure links folded
    into a dense transition table.  OTHER can never extend a pattern, so it
    is honest to collapse the unbounded digit alphabet this way.
    """

    def __init__(self, patterns: Sequence[Union[Pattern, Sequence[int]]]):
        pats = [Pattern.coerce(s) for s in patterns]
        if not pats:
            raise ValueError("need at least one pattern")
        if len(set(p.digits for p in pats)) != len(pats):
            raise ValueError("patterns must be distinct")
        self.patterns = pats
        self.max_digit = max(max(p.digits) for p in pats)
        self.max_len = max(len(p) for p in pats)
        self._build()
        self.counts = [0] * len(pats)
        self.position = 0
        self.state = 0

    def _build(self) -> None:
        nsym = self.max_digit + 1  # symbol 0 is OTHER
        goto: list[list[int]] = [[0] * nsym]
        out: list[list[tuple[int, int]]] = [[]]
        # trie phase
        for idx, pat in enumerate(self.patterns):
            state = 0
            for d in pat.digits:
                nxt = goto[state][d]
                if nxt == 0:
                    goto.append([0] * nsym)
                    out.append([])
                    nxt = len(goto) - 1
                    goto[state][d] = nxt
                state = nxt
            out[state].append((idx, len(pat)))
        # BFS failure links, folded straight into the table
        fail = [0] * len(goto)
        queue = deque()
        for sym in range(1, nsym):
            s = goto[0][sym]
            if s:
                fail[s] = 0
                queue.append(s)
        while queue:
            s = queue.popleft()
            for sym in range(1, nsym):
                t = goto[s][sym]
                if t:
                    fail[t] = goto[fail[s]][sym]
                    out[t] = out[t] + out[fail[t]]
                    queue.append(t)
                else:
                    goto[s][sym] = goto[fail[s]][sym]
        # symbol 0 (OTHER) always resets to the root
        for row in goto:
            row[0] = 0
        self._goto = goto
        self._out = out

    def feed(self, digit: int, limit: Optional[int] = None) -> None:
        """Consume one digit; count pattern starts at positions <= limit."""
        self.position += 1
        sym = digit if digit <= self.max_digit else 0
        self.state = self._goto[self.state][sym]
        hits = self._out[self.state]
        if hits:
            pos = self.position
            for idx, k in hits:
                start = pos - k + 1
                if start >= 1 and (limit is None or start <= limit):
                    self.counts[idx] += 1

    def run(self, digits: Iterable[int], limit: Optional[int] = None) -> None:
        goto = self._goto
        out = self._out
        state = self.state
        pos = self.position
        counts = self.counts
        maxd = self.max_digit
        for d in digits:
            pos += 1
            state = goto[state][d if d <= maxd else 0]
            hits = out[state]
            if hits:
                for idx, k in hits:
                    start = pos - k + 1
                    if start >= 1 and (limit is None or start <= limit):
                        counts[idx] += 1
        self.state = state
        self.position = pos

    def as_dict(self) -> dict[Pattern, int]:
        return dict(zip(self.patterns, self.counts))


def count_patterns(source: Union[Iterable[int], DigitStream],
                   patterns: Sequence[Union[Pattern, Sequence[int]]],
                   n: int) -> dict[Pattern, int]:
    """A_s(n) for each pattern: occurrence starts at positions 1..n.

    Reads n + max_len - 1 digits from the source and fails if a finite source
    runs out before that, since trailing occurrences could not be resolved.
    """
    tracker = FrequencyTracker(patterns)
    need = n + tracker.max_len - 1
    it = iter(source)
    fed = 0
    for d in it:
        tracker.feed(int(d), limit=n)
        fed += 1
        if fed == need:
            break
    if fed < need:
        raise ValueError(f"source ended after {fed} digits; need {need} "
                         f"to resolve starts up to {n}")
    return tracker.as_dict()


def count_pattern_array(digits: np.ndarray, s: Union[Pattern, Sequence[int]],
                        n: int) -> int:
    """Vectorized A_s(n) over a digit array holding >= n + k - 1 digits."""
    s = Pattern.coerce(s)
    k = len(s)
    if len(digits) < n + k - 1:
        raise ValueError(f"need {n + k - 1} digits, have {len(digits)}")
    match = np.ones(n, dtype=bool)
    for j, d in enumerate(s.digits):
        match &= digits[j:j + n] == d
    return int(match.sum())


class GrowthTracker:
    """Running log of the continuant q_n of the digits seen so far.

    Uses the stable recurrence  log q_n = log q_{n-1} + ln(a_n + q_{n-2}/q_{n-1})
    in doubles, and audits itself against exact big-integer continuants over
    each checkpoint window: with W11 = K(window digits) and W21 = K(window
    digits minus the first),  q_end = W11 q_start + W21 q_{start-1}, so the
    float value must stay within audit_tol of
    log q_start + ln W11 + log1p((W21/W11) * ratio_start).
    """

    def __init__(self, audit_interval: int = DEFAULT_CONFIG.checkpoint_interval,
                 audit_tol: float = 1e-6):
        self.n = 0
        self.logq = 0.0
        self.ratio = 0.0  # q_{n-1} / q_n
        self.audit_interval = audit_interval
        self.audit_tol = audit_tol
        self.max_audit_rel_err = 0.0
        self._reset_window()

    def _reset_window(self) -> None:
        self._w_cur, self._w_prev = 1, 0
        self._v_cur, self._v_prev = 1, 0
        self._window_digits = 0
        self._logq_start = self.logq
        self._ratio_start = self.ratio

    def update(self, a: int) -> None:
        if a < 1:
            raise ValueError("digits must be >= 1")
        t = a + self.ratio
        self.logq += math.log(t)
        self.ratio = 1.0 / t
        self.n += 1
        self._w_cur, self._w_prev = a * self._w_cur + self._w_prev, self._w_cur
        if self._window_digits > 0:
            self._v_cur, self._v_prev = a * self._v_cur + self._v_prev, self._v_cur
        self._window_digits += 1
        if self.audit_interval and self._window_digits >= self.audit_interval:
            self._audit()

    def update_many(self, digits: Iterable[int]) -> None:
        for a in digits:
            self.update(int(a))

    def _audit(self) -> None:
        expected = (self._logq_start + math.log(self._w_cur)
                    + math.log1p(self._v_cur / self._w_cur * self._ratio_start))
        rel = abs(self.logq - expected) / max(1.0, abs(self.logq))
        if rel > self.max_audit_rel_err:
            self.max_audit_rel_err = rel
        if rel > self.audit_tol:
            raise ArithmeticError(
                f"growth recurrence drifted: rel err {rel:.3e} at n={self.n}")
        self._reset_window()

    @property
    def rate(self) -> float:
        """log q_n / n, the quantity that tends to the Khinchin-Levy exponent."""
        if self.n == 0:
            raise ValueError("no digits yet")
        return self.logq / self.n


@dataclass
class PatternRow:
    pattern: Pattern
    count: int
    n: int
    empirical: float
    mu: float
    deviation: float

    def to_json_dict(self) -> dict:
        return {
            "pattern": list(self.pattern.digits),
            "count": self.count,
            "N": self.n,
            "empirical": self.empirical,
            "mu": self.mu,
            "deviation": self.deviation,
        }


@dataclass
class GrowthSummary:
    logq: float
    n: int
    g_ref: float = KHINCHIN_LEVY

    def to_json_dict(self) -> dict:
        return {"logq": self.logq, "n": self.n, "g_ref": self.g_ref}


@dataclass
class NormalityReport:
    params: dict
    rows: list[PatternRow]
    growth: GrowthSummary
    checkpoints: dict[int, list[PatternRow]] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        doc = {
            "params": self.params,
            "rows": [r.to_json_dict() for r in self.rows],
            "growth": self.growth.to_json_dict(),
        }
        if self.checkpoints:
            doc["checkpoints"] = {
                str(n): [r.to_json_dict() for r in rows]
                for n, rows in self.checkpoints.items()
            }
        return doc


def _pattern_rows(digits: np.ndarray, patterns: Sequence[Pattern],
                  n: int) -> list[PatternRow]:
    rows = []
    for pat in patterns:
        count = count_pattern_array(digits, pat, n)
        mu = gauss_measure(pat)
        empirical = count / n
        rows.append(PatternRow(pattern=pat, count=count, n=n,
                               empirical=empirical, mu=mu,
                               deviation=abs(empirical - mu)))
    return rows


def normality_report(kind: SequenceKind, convention: Convention, n: int,
                     max_digit: int = 5, max_len: int = 2,
                     config: StreamConfig = DEFAULT_CONFIG,
                     checkpoints: Sequence[int] = (),
                     audit: bool = True) -> NormalityReport:
    """Empirical pattern frequencies and growth over the first n stream digits.

    Counts every pattern over digits 1..max_digit of length <= max_len against
    its Gauss measure, and runs the growth tracker over the same digits.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    n_patterns = sum(max_digit ** j for j in range(1, max_len + 1))
    if n_patterns > config.max_patterns:
        raise ResourceLimitError(
            f"{n_patterns} patterns exceed the configured bound {config.max_patterns}")
    patterns = pattern_grid(max_digit, max_len)
    digits = digit_block(kind, convention, n + max_len - 1)
    rows = _pattern_rows(digits, patterns, n)

    tracker = GrowthTracker(audit_interval=config.checkpoint_interval if audit else 0)
    tracker.update_many(digits[:n].tolist())

    report = NormalityReport(
        params={
            "kind": kind.value,
            "conv": convention.value,
            "N": n,
            "max_digit": max_digit,
            "max_len": max_len,
        },
        rows=rows,
        growth=GrowthSummary(logq=tracker.logq, n=tracker.n),
    )
    for c in checkpoints:
        if not 1 <= c <= n:
            raise ValueError(f"checkpoint {c} outside 1..{n}")
        report.checkpoints[c] = _pattern_rows(digits, patterns, c)
    return report


@dataclass
class RatioRow:
    n: int
    m: int
    sum_len: int
    max_len: int

    @property
    def n_over_sum(self) -> float:
        return self.n / self.sum_len

    @property
    def n_maxlen_over_sum(self) -> float:
        return self.n * self.max_len / self.sum_len

    @property
    def m_over_n(self) -> float:
        return self.m / self.n

    def to_json_dict(self) -> dict:
        return {
            "N": self.n,
            "M": self.m,
            "sum_len": self.sum_len,
            "max_len": self.max_len,
            "n_over_sum_len": self.n_over_sum,
            "n_max_len_over_sum_len": self.n_maxlen_over_sum,
            "m_over_n": self.m_over_n,
        }


@dataclass
class RatioReport:
    params: dict
    rows: list[RatioRow]

    def to_json_dict(self) -> dict:
        return {"params": self.params, "rows": [r.to_json_dict() for r in self.rows]}


def hypothesis_ratios(kind_or_stream: Union[SequenceKind, DigitStream],
                      convention: Convention = Convention.LONG,
                      n: int = 10 ** 4) -> RatioReport:
    """The three diagnostic ratios N/sum L, N*max L/sum L, M/N at N, 2N, 4N.

    The first two vanishing and the last shrinking are what the aggregation
    argument for concatenated expansions needs; here they are just measured.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(kind_or_stream, DigitStream):
        stream = kind_or_stream
        params = {"conv": stream.convention.value, "N": n}
        if stream.kind is not None:
            params["kind"] = stream.kind.value
    else:
        stream = DigitStream(kind=kind_or_stream, convention=convention)
        params = {"kind": kind_or_stream.value, "conv": convention.value, "N": n}
    rows = []
    for target in (n, 2 * n, 4 * n):
        while stream.position < target:
            try:
                next(stream)
            except StopIteration:
                raise ValueError(
                    f"stream ended at {stream.position} digits; need {target}")
        rows.append(RatioRow(n=target, m=stream.rational_index,
                             sum_len=stream.sum_len, max_len=stream.max_len))
    return RatioReport(params=params, rows=rows)


CFDIGITS_HEADER_VERSION = "cfdigits v1"


def format_header(kind: Optional[SequenceKind], convention: Convention) -> str:
    kind_name = kind.value if kind is not None else "indices"
    return f"{CFDIGITS_HEADER_VERSION} kind={kind_name} conv={convention.value}"


def encode_varint(value: int) -> bytes:
    """Unsigned LEB128."""
    if value < 0:
        raise ValueError("varint encodes nonnegative integers")
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def decode_varints(data: bytes) -> list[int]:
    out = []
    shift = 0
    cur = 0
    for byte in data:
        cur |= (byte & 0x7F) << shift
        if byte & 0x80:
            shift += 7
        else:
            out.append(cur)
            cur = 0
            shift = 0
    if shift:
        raise ValueError("truncated varint stream")
    return out

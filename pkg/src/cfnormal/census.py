"""Classifying rationals by how typical their digit statistics are.

A rational with q in lowest terms and digit string of length L is judged on
two numbers: how far the pattern frequency A_s/L sits from the Gauss measure
of the pattern's cylinder, and how far (ln q)/L sits from the Khinchin-Levy
exponent.  Small deviations on both counts make it normal for the given
tolerance.  Aggregate censuses run that test over whole denominator ranges.

The same module houses the exceptional-set predicates over digit prefixes
(frequency deviation at depth N, growth deviation at depth N) and Monte Carlo
estimators of their Gauss measure, including an exact digit sampler that
stays faithful at any depth.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .core import Convention, Rational, expand
from .enumeration import SequenceKind, count_R, members_block
from .errors import ResourceLimitError
from .measures import KHINCHIN_LEVY, Pattern, gauss_measure
from .streams import digit_matrix

CENSUS_ROW_LIMIT = 2 * 10 ** 8
ORBIT_DEPTH_CAP = 40


def resolve_threads(value: Optional[int] = None) -> int:
    """Explicit value, else the CFNORMAL_THREADS variable, else core count."""
    if value is not None:
        if value < 1:
            raise ValueError("threads must be >= 1")
        return value
    env = os.environ.get("CFNORMAL_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# per-rational classification

@dataclass(frozen=True)
class NormalityParams:
    epsilon: float
    s: Pattern
    convention: Convention = Convention.LONG

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        object.__setattr__(self, "s", Pattern.coerce(self.s))


@dataclass(frozen=True)
class NormalityCheck:
    """Outcome of the two-inequality test, with both left-hand sides."""

    normal: bool
    freq_dev: float
    growth_dev: float
    a_count: int
    length: int
    log_den: float

    def __bool__(self) -> bool:
        return self.normal


def digit_length(r: Rational, convention: Convention = Convention.LONG) -> int:
    return len(expand(r, convention))


def _occurrences(digits: Sequence[int], s_digits: tuple[int, ...]) -> int:
    """Occurrences of s lying fully inside the digit string (overlaps count)."""
    k = len(s_digits)
    total = 0
    for i in range(len(digits) - k + 1):
        if tuple(digits[i:i + k]) == s_digits:
            total += 1
    return total


def is_eps_s_normal(r: Rational, p: NormalityParams) -> NormalityCheck:
    """Both deviations strictly below epsilon: frequency and growth.

    The frequency side compares A_s over the rational's own digits (no
    read-ahead; the string is finite) against the cylinder measure.  The
    growth side compares ln(q)/L against the Khinchin-Levy exponent, q being
    the lowest-terms denominator.  A pattern longer than the digit string
    simply has A_s = 0.
    """
    digits = expand(r, p.convention).digits
    length = len(digits)
    a = _occurrences(digits, p.s.digits)
    mu = gauss_measure(p.s)
    log_den = math.log(r.den)
    freq_dev = abs(a / length - mu)
    growth_dev = abs(log_den / length - KHINCHIN_LEVY)
    return NormalityCheck(
        normal=freq_dev < p.epsilon and growth_dev < p.epsilon,
        freq_dev=freq_dev,
        growth_dev=growth_dev,
        a_count=a,
        length=length,
        log_den=log_den,
    )


# ---------------------------------------------------------------------------
# vectorized classification over denominator blocks

def _block_lengths_mask(mat: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    return np.arange(mat.shape[1]) < lengths[:, None]


def _block_occurrences(mat: np.ndarray, lengths: np.ndarray,
                       s_digits: tuple[int, ...],
                       limit: Optional[np.ndarray] = None) -> np.ndarray:
    """Rowwise count of s inside each digit row (or inside the first
    limit[i] digits when limit is given)."""
    k = len(s_digits)
    width = mat.shape[1]
    bound = lengths if limit is None else np.minimum(lengths, limit)
    counts = np.zeros(mat.shape[0], dtype=np.int64)
    for j in range(width - k + 1):
        ok = bound >= j + k
        for t, d in enumerate(s_digits):
            ok = ok & (mat[:, j + t] == d)
        counts += ok
    return counts


def _classify_block(num: np.ndarray, den: np.ndarray,
                    p: NormalityParams) -> tuple[int, int]:
    """(rows, abnormal rows) for the given member pairs."""
    if len(num) == 0:
        return 0, 0
    g = np.gcd(num, den)
    q = den // g
    mat, lengths = digit_matrix(num, den, p.convention)
    a = _block_occurrences(mat, lengths, p.s.digits)
    mu = gauss_measure(p.s)
    logq = np.log(q.astype(np.float64))
    freq_dev = np.abs(a / lengths - mu)
    growth_dev = np.abs(logq / lengths - KHINCHIN_LEVY)
    normal = (freq_dev < p.epsilon) & (growth_dev < p.epsilon)
    return len(num), int(len(num) - normal.sum())


def _den_chunks(d_lo: int, d_hi: int, pair_budget: int = 2_000_000):
    """Split [d_lo, d_hi] so each piece holds at most ~pair_budget pairs."""
    lo = d_lo
    while lo <= d_hi:
        hi = max(lo + 8, math.isqrt(lo * lo + 2 * pair_budget))
        hi = min(hi, d_hi + 1)
        yield lo, hi
        lo = hi


def _census_chunk(args) -> tuple[int, int]:
    kind_value, lo, hi, eps, s_digits, conv_value = args
    kind = SequenceKind(kind_value)
    p = NormalityParams(eps, Pattern(tuple(s_digits)),
                        Convention(conv_value))
    num, den = members_block(kind, lo, hi)
    return _classify_block(num, den, p)


@dataclass
class CensusReport:
    kind: SequenceKind
    m: int
    params: NormalityParams
    total: int
    abnormal: int
    den_range: tuple[int, int]
    wall_time: float = field(default=0.0, compare=False)

    CSV_HEADER = "m,kind,eps,s,total,abnormal,ratio"

    @property
    def ratio(self) -> float:
        return self.abnormal / self.total if self.total else 0.0

    def merge(self, other: "CensusReport") -> "CensusReport":
        """Combine reports over disjoint denominator ranges of one census."""
        if (self.kind, self.m, self.params) != (other.kind, other.m, other.params):
            raise ValueError("reports describe different censuses")
        a, b = sorted((self.den_range, other.den_range))
        if a[1] >= b[0]:
            raise ValueError("denominator ranges overlap")
        return CensusReport(
            kind=self.kind, m=self.m, params=self.params,
            total=self.total + other.total,
            abnormal=self.abnormal + other.abnormal,
            den_range=(a[0], max(a[1], b[1])),
            wall_time=self.wall_time + other.wall_time,
        )

    def to_json_dict(self) -> dict:
        return {
            "params": {
                "kind": self.kind.value,
                "m": self.m,
                "eps": self.params.epsilon,
                "s": list(self.params.s.digits),
                "conv": self.params.convention.value,
                "den_range": list(self.den_range),
            },
            "total": self.total,
            "abnormal": self.abnormal,
            "ratio": self.ratio,
        }

    def to_csv_row(self) -> str:
        return (f"{self.m},{self.kind.value},{self.params.epsilon},"
                f"{self.params.s},{self.total},{self.abnormal},{self.ratio}")


def run_census(kind: SequenceKind, m: int, p: NormalityParams,
               den_range: Optional[tuple[int, int]] = None,
               threads: int = 1) -> CensusReport:
    """Classify every member with denominator up to m (or within den_range).

    Work proceeds over denominator chunks sized to keep the digit matrices
    modest; with threads > 1 the chunks fan out over processes and the
    partial counts merge additively.
    """
    if m < 3:
        raise ValueError("m must be >= 3")
    expected = count_R(kind, m)
    if expected > CENSUS_ROW_LIMIT:
        raise ResourceLimitError(
            f"census over {expected} members exceeds the row limit {CENSUS_ROW_LIMIT}")
    lo, hi = den_range if den_range is not None else (2, m)
    if not 2 <= lo <= hi <= m:
        raise ValueError("den_range must satisfy 2 <= lo <= hi <= m")
    start = time.perf_counter()
    tasks = [(kind.value, a, b, p.epsilon, p.s.digits, p.convention.value)
             for a, b in _den_chunks(lo, hi)]
    total = abnormal = 0
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(tasks))) as pool:
            for rows, bad in pool.map(_census_chunk, tasks):
                total += rows
                abnormal += bad
    else:
        for task in tasks:
            rows, bad = _census_chunk(task)
            total += rows
            abnormal += bad
    if den_range is None and total != expected:
        raise AssertionError(
            f"classified {total} members, expected {expected}")  # pragma: no cover
    return CensusReport(kind=kind, m=m, params=p, total=total,
                        abnormal=abnormal, den_range=(lo, hi),
                        wall_time=time.perf_counter() - start)


# ---------------------------------------------------------------------------
# the exceptional-prefix families Gamma and Gamma'

def n_delta(m: int, delta: float) -> int:
    """floor((1 - 2 delta) ln(m) / g); the reference prefix depth for m."""
    if m < 3:
        raise ValueError("m must be >= 3")
    if not 0.0 < delta < 1.0 / 3.0:
        raise ValueError("delta must lie in (0, 1/3)")
    return int(math.floor((1.0 - 2.0 * delta) * math.log(m) / KHINCHIN_LEVY))


@dataclass(frozen=True)
class GammaParams:
    m: int
    delta: float
    eta: float
    s: Pattern

    def __post_init__(self) -> None:
        n_delta(self.m, self.delta)  # validates m and delta
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")
        object.__setattr__(self, "s", Pattern.coerce(self.s))

    @property
    def n(self) -> int:
        return n_delta(self.m, self.delta)


def _window_count(digits: Sequence[int], s_digits: tuple[int, ...],
                  n: int) -> int:
    """#{0 <= i <= n-k : digits[i:i+k] == s} over the first n digits."""
    k = len(s_digits)
    total = 0
    for i in range(n - k + 1):
        if tuple(digits[i:i + k]) == s_digits:
            total += 1
    return total


def in_gamma(r: Rational, gp: GammaParams,
             convention: Convention = Convention.LONG) -> bool:
    """Membership in the exceptional family for (m, delta, s, eta).

    True when the denominator is at most m and the expansion is either
    shorter than n, or its depth-n convergent denominator strays from the
    expected growth by more than delta, or the pattern frequency over the
    first n digits strays from the cylinder measure by more than eta.
    """
    n = gp.n
    if n < 1:
        raise ValueError("n_delta is 0 for these parameters; the prefix "
                         "conditions are vacuous")
    if r.den > gp.m:
        return False
    digits = expand(r, convention).digits
    if len(digits) < n:
        return True
    q_prev, q_cur = 0, 1
    for a in digits[:n]:
        q_prev, q_cur = q_cur, a * q_cur + q_prev
    if abs(math.log(q_cur) / n - KHINCHIN_LEVY) > gp.delta:
        return True
    freq = _window_count(digits, gp.s.digits, n) / n
    return abs(freq - gauss_measure(gp.s)) > gp.eta


def _gamma_block(num: np.ndarray, den: np.ndarray, gp: GammaParams,
                 convention: Convention) -> np.ndarray:
    """Vectorized in_gamma over lowest-terms pairs (den <= gp.m assumed)."""
    n = gp.n
    mat, lengths = digit_matrix(num, den, convention)
    short = lengths < n
    width = mat.shape[1]
    q_prev = np.zeros(len(num))
    q_cur = np.ones(len(num))
    for j in range(min(n, width)):
        a = mat[:, j].astype(np.float64)
        q_prev, q_cur = q_cur, a * q_cur + q_prev
    with np.errstate(divide="ignore", invalid="ignore"):
        growth_bad = np.abs(np.log(q_cur) / n - KHINCHIN_LEVY) > gp.delta
    counts = _block_occurrences(mat, lengths, gp.s.digits,
                                limit=np.full(len(num), n, dtype=np.int64))
    freq_bad = np.abs(counts / n - gauss_measure(gp.s)) > gp.eta
    return short | growth_bad | freq_bad


@dataclass
class GammaCensus:
    m: int
    params: GammaParams
    convention: Convention
    total: int
    members: int

    @property
    def ratio(self) -> float:
        return self.members / self.total if self.total else 0.0


def gamma_census(gp: GammaParams,
                 convention: Convention = Convention.LONG) -> GammaCensus:
    """Count the exceptional rationals among all lowest-terms den <= m."""
    if gp.n < 1:
        raise ValueError("n_delta is 0 for these parameters")
    total = members = 0
    for lo, hi in _den_chunks(2, gp.m, pair_budget=4_000_000):
        num, den = members_block(SequenceKind.ALL_LOWEST_TERMS, lo, hi)
        if not len(num):
            continue
        flags = _gamma_block(num, den, gp, convention)
        total += len(num)
        members += int(flags.sum())
    return GammaCensus(m=gp.m, params=gp, convention=convention,
                       total=total, members=members)


def gamma_prime_q_bounds(gp: GammaParams) -> tuple[float, float]:
    """The denominator window every accepted depth-n prefix must land in."""
    g = KHINCHIN_LEVY
    lo = gp.m ** ((1.0 - 2.0 * gp.delta) * (1.0 - gp.delta / (12.0 * g))) \
        * math.exp(-2.0 * g)
    hi = gp.m ** ((1.0 - 2.0 * gp.delta) * (1.0 + gp.delta / g))
    return lo, hi


def gamma_prime_contains(prefix: Sequence[int], gp: GammaParams) -> bool:
    """Whether the rank-n cylinder of this prefix belongs to the good union.

    All three conditions are non-strict: growth of the depth-n denominator
    within delta, growth of the depth-(n-1) denominator within delta/12, and
    the window frequency of the fixed pattern within eta of its cylinder
    measure.  Distinct prefixes name disjoint cylinders, so membership is a
    property of the prefix alone.
    """
    n = gp.n
    digits = tuple(int(d) for d in prefix)
    if len(digits) != n:
        raise ValueError(f"prefix length {len(digits)} != n = {n}")
    if n < 2:
        raise ValueError("need n >= 2: the second growth condition reads "
                         "the depth-(n-1) denominator")
    if any(d < 1 for d in digits):
        raise ValueError("digits must be >= 1")
    q_prev, q_cur = 0, 1
    for a in digits:
        q_prev, q_cur = q_cur, a * q_cur + q_prev
    qn, qn1 = q_cur, q_prev
    g = KHINCHIN_LEVY
    if abs(math.log(qn) / n - g) > gp.delta:
        return False
    if abs(math.log(qn1) / (n - 1) - g) > gp.delta / 12.0:
        return False
    freq = _window_count(digits, gp.s.digits, n) / n
    return abs(freq - gauss_measure(gp.s)) <= gp.eta


# ---------------------------------------------------------------------------
# exceptional sets of real prefixes

def continuant_den(digits: Sequence[int]) -> int:
    """Exact q of the finite string (big integer)."""
    q_prev, q_cur = 0, 1
    for a in digits:
        q_prev, q_cur = q_cur, int(a) * q_cur + q_prev
    return q_cur


def in_E_set(digits: Sequence[int], epsilon: float,
             s: Union[Pattern, Sequence[int]], n: int) -> bool:
    """Frequency deviation beyond epsilon (relative) at depth n.

    Counts starts in positions 1..n; occurrences may extend up to k-1 digits
    further, so the prefix must supply n+k-1 digits.  The deviation test is
    strict: |A - mu n| > epsilon mu n.
    """
    s = Pattern.coerce(s)
    k = len(s)
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(digits) < n + k - 1:
        raise ValueError(f"need {n + k - 1} digits, have {len(digits)}")
    a = 0
    sd = s.digits
    for i in range(n):
        if tuple(digits[i:i + k]) == sd:
            a += 1
    mu_n = gauss_measure(s) * n
    return abs(a - mu_n) > epsilon * mu_n


def in_F_set(digits: Sequence[int], epsilon: float, n: int) -> bool:
    """Growth deviation beyond epsilon at depth n, from the exact q_n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(digits) < n:
        raise ValueError(f"need {n} digits, have {len(digits)}")
    q = continuant_den(digits[:n])
    return abs(math.log(q) / n - KHINCHIN_LEVY) > epsilon


# ---------------------------------------------------------------------------
# sampling digit prefixes under the Gauss measure

def _digit_of(y: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", over="ignore"):
        a = np.floor(1.0 / y)
    a = np.where(np.isfinite(a), a, 2.0 ** 62)
    return np.clip(a, 1.0, 2.0 ** 62).astype(np.int64)


class GaussDigitSampler:
    """Exact digit prefixes of Gauss-distributed reals, any depth.

    Conditioned on the digits so far (convergents p1/q1 before p2/q2), the
    shifted tail y of a Gauss-distributed x has density proportional to
    1/((1+r y)(1+rho y)) with r = q1/q2 and rho = (p1+q1)/(p2+q2).  That
    family is closed under emitting a digit: both parameters update by
    t -> 1/(a+t).  The inverse CDF is elementary, the state recursion is
    contractive, and so double precision is enough at any depth; iterating
    the Gauss map forward, by contrast, sheds accuracy with every digit.
    At the start (r, rho) = (0, 1) and the first draw reproduces the plain
    inverse-CDF sample 2^u - 1.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one sample row")
        self.n = n
        self.r = np.zeros(n)
        self.rho = np.ones(n)

    def _scale(self) -> np.ndarray:
        # ln((1+r)/(1+rho)), written to stay accurate when r ~ rho
        return np.log1p((self.r - self.rho) / (1.0 + self.rho))

    def _cdf(self, t) -> np.ndarray:
        diff = self.r - self.rho
        k = self._scale()
        num = np.log1p(diff * t / (1.0 + self.rho * t))
        with np.errstate(invalid="ignore"):
            c = num / k
        deg = k == 0.0
        if deg.any():
            c = np.where(deg, t * (1.0 + self.rho) / (1.0 + self.rho * t), c)
        return c

    def _inverse(self, u: np.ndarray) -> np.ndarray:
        diff = self.r - self.rho
        k = self._scale()
        em = np.expm1(u * k)
        with np.errstate(invalid="ignore", divide="ignore"):
            t = em / (diff - self.rho * em)
        deg = k == 0.0
        if deg.any():
            t = np.where(deg, u / (1.0 + self.rho - u * self.rho), t)
        return t

    def push(self, a: np.ndarray) -> None:
        self.r = 1.0 / (a + self.r)
        self.rho = 1.0 / (a + self.rho)

    def prob_digit(self, d: int) -> np.ndarray:
        """P(next digit = d | state), an interval of the tail distribution."""
        hi = self._cdf(1.0 / d)
        lo = self._cdf(1.0 / (d + 1.0))
        return hi - lo

    def step(self, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(self.n)
        a = _digit_of(self._inverse(u))
        self.push(a)
        return a

    def step_tilted(self, theta: float, d: int, rng: np.random.Generator
                    ) -> tuple[np.ndarray, np.ndarray]:
        """One digit under an exponential tilt of the indicator {digit = d}.

        Emits d with probability q = p e^theta / (1 + p (e^theta - 1)) where
        p is the state-conditional probability, otherwise a digit drawn from
        the exact conditional law on the complement.  Returns the digits and
        the per-row log importance weight increment, so averaging
        weight * indicator over many rows stays unbiased for the untilted
        chain.
        """
        p = self.prob_digit(d)
        et = math.exp(theta)
        q = p * et / (1.0 + p * (et - 1.0))
        u = rng.random(self.n)
        pick = u < q
        # reuse the same uniform for the complement branch
        u2 = (u - q) / (1.0 - q)
        c_lo = self._cdf(1.0 / (d + 1.0))
        u3 = u2 * (1.0 - p)
        u3 = np.where(u3 < c_lo, u3, u3 + p)
        u3 = np.where(pick, 0.5, u3)  # dummy for the rows that emit d
        a_other = _digit_of(self._inverse(u3))
        # guard the measure-zero boundary roundings out of the d bucket
        a_other = np.where(a_other == d, d + 1, a_other)
        a = np.where(pick, d, a_other)
        dlogw = np.where(pick,
                         np.log(p) - np.log(q),
                         np.log1p(-p) - np.log1p(-q))
        self.push(a)
        return a, dlogw

    def sample_matrix(self, depth: int,
                      rng: np.random.Generator) -> np.ndarray:
        out = np.empty((self.n, depth), dtype=np.int64)
        for j in range(depth):
            out[:, j] = self.step(rng)
        return out


def gauss_orbit_digits(u: np.ndarray, depth: int) -> np.ndarray:
    """Digit matrix by forward float iteration of the shift map.

    Cheap and adequate for shallow prefixes; each iteration loses a little
    precision, which is why callers cap it at ORBIT_DEPTH_CAP.
    """
    if depth > ORBIT_DEPTH_CAP:
        raise ValueError(f"orbit extraction is unreliable past "
                         f"{ORBIT_DEPTH_CAP} digits; use the exact sampler")
    x = np.asarray(2.0 ** np.asarray(u) - 1.0, dtype=np.float64)
    out = np.empty((len(x), depth), dtype=np.int64)
    for j in range(depth):
        with np.errstate(divide="ignore"):
            inv = 1.0 / np.maximum(x, 1e-300)
        a = np.clip(np.floor(inv), 1.0, 2.0 ** 62)
        x = np.clip(inv - a, 0.0, np.nextafter(1.0, 0.0))
        out[:, j] = a.astype(np.int64)
    return out


@dataclass
class MeasureEstimate:
    estimate: float
    stderr: float
    n_samples: int
    hits: int

    def to_json_dict(self) -> dict:
        return {"estimate": self.estimate, "stderr": self.stderr,
                "n_samples": self.n_samples, "hits": self.hits}


def merge_estimates(parts: Sequence[MeasureEstimate]) -> MeasureEstimate:
    """Pool independent estimates of the same event by total counts."""
    if not parts:
        raise ValueError("nothing to merge")
    hits = sum(p.hits for p in parts)
    n = sum(p.n_samples for p in parts)
    est = hits / n
    return MeasureEstimate(estimate=est,
                           stderr=math.sqrt(est * (1.0 - est) / n),
                           n_samples=n, hits=hits)


def estimate_measure(predicate: Callable[[np.ndarray], np.ndarray],
                     depth: int, n_samples: int, seed: int = 0,
                     method: str = "auto",
                     block_size: int = 1 << 16) -> MeasureEstimate:
    """Gauss-measure of a digit-prefix event by direct sampling.

    The predicate receives a (rows x depth) digit matrix and must return a
    boolean row mask.  method "orbit" extracts digits by float iteration and
    is refused past ORBIT_DEPTH_CAP digits; "chain" uses the exact sampler at
    any depth; "auto" picks whichever applies.  Fixed seed, fixed block size
    give identical results.
    """
    if n_samples < 10 ** 3:
        raise ValueError("need at least 1000 samples")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if method == "auto":
        method = "orbit" if depth <= ORBIT_DEPTH_CAP else "chain"
    if method not in ("orbit", "chain"):
        raise ValueError(f"unknown method {method!r}")
    if method == "orbit" and depth > ORBIT_DEPTH_CAP:
        raise ValueError(f"orbit method capped at depth {ORBIT_DEPTH_CAP}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    hits = 0
    done = 0
    while done < n_samples:
        rows = min(block_size, n_samples - done)
        if method == "orbit":
            digits = gauss_orbit_digits(rng.random(rows), depth)
        else:
            digits = GaussDigitSampler(rows).sample_matrix(depth, rng)
        mask = np.asarray(predicate(digits), dtype=bool)
        if mask.shape != (rows,):
            raise ValueError("predicate must return one boolean per row")
        hits += int(mask.sum())
        done += rows
    est = hits / n_samples
    return MeasureEstimate(estimate=est,
                           stderr=math.sqrt(est * (1.0 - est) / n_samples),
                           n_samples=n_samples, hits=hits)


@dataclass
class GrowthEstimate:
    mean: float
    stderr: float
    depth: int
    n_samples: int


def mc_growth_rate(depth: int = 100, n_samples: int = 10 ** 4,
                   seed: int = 0) -> GrowthEstimate:
    """Mean of (ln q_depth)/depth over Gauss-sampled points."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    sampler = GaussDigitSampler(n_samples)
    logq = np.zeros(n_samples)
    ratio = np.zeros(n_samples)
    for _ in range(depth):
        t = sampler.step(rng) + ratio
        logq += np.log(t)
        ratio = 1.0 / t
    vals = logq / depth
    return GrowthEstimate(mean=float(vals.mean()),
                          stderr=float(vals.std(ddof=1) / math.sqrt(n_samples)),
                          depth=depth, n_samples=n_samples)


# ---------------------------------------------------------------------------
# decay of the exceptional sets, measured

def _logsumexp(v: np.ndarray) -> float:
    if v.size == 0:
        return float("-inf")
    m = float(v.max())
    return m + math.log(float(np.exp(v - m).sum()))


@dataclass
class ERow:
    n: int
    estimate: float
    log_estimate: float
    rel_stderr: float

    def to_json_dict(self) -> dict:
        return {"N": self.n, "estimate": self.estimate,
                "log_estimate": self.log_estimate,
                "rel_stderr": self.rel_stderr}


@dataclass
class FRow:
    n: int
    estimate: float
    stderr: float
    hits: int

    def to_json_dict(self) -> dict:
        return {"N": self.n, "estimate": self.estimate,
                "stderr": self.stderr, "hits": self.hits}


@dataclass
class EFDecayReport:
    params: dict
    rows_e: list[ERow]
    rows_f: list[FRow]

    def to_json_dict(self) -> dict:
        return {"params": self.params,
                "rows_e": [r.to_json_dict() for r in self.rows_e],
                "rows_f": [r.to_json_dict() for r in self.rows_f]}


def _tune_theta(d: int, target: float, seed: np.random.SeedSequence,
                pilot_n: int = 1500, pilot_depth: int = 1200) -> float:
    """Tilt strength whose mean digit-d frequency lands near target.

    Starts from the closed form for an independent Bernoulli stream (the
    digits are close to one) and applies two Newton corrections measured on
    short pilot runs.
    """
    rng = np.random.default_rng(seed)
    p0 = gauss_measure([d])
    t = min(max(target, 1e-3), 1.0 - 1e-3)
    theta = math.log(t * (1.0 - p0) / (p0 * (1.0 - t)))
    for _ in range(2):
        sampler = GaussDigitSampler(pilot_n)
        count = 0
        for _ in range(pilot_depth):
            a, _ = sampler.step_tilted(theta, d, rng)
            count += int((a == d).sum())
        frac = count / (pilot_n * pilot_depth)
        theta += (t - frac) / max(frac * (1.0 - frac), 1e-3)
    return theta


def _tilted_tail_run(args) -> dict[int, tuple[float, float]]:
    """One tilted pass; per checkpoint the log mean and log stderr of the
    weighted tail indicator."""
    d, theta, checkpoints, n_samples, threshold_frac, upper, seed = args
    rng = np.random.default_rng(seed)
    sampler = GaussDigitSampler(n_samples)
    logw = np.zeros(n_samples)
    count = np.zeros(n_samples, dtype=np.int64)
    marks = set(checkpoints)
    out: dict[int, tuple[float, float]] = {}
    log_n = math.log(n_samples)
    for step in range(1, max(checkpoints) + 1):
        a, dlw = sampler.step_tilted(theta, d, rng)
        logw += dlw
        count += a == d
        if step in marks:
            bound = threshold_frac * step
            hit = count > bound if upper else count < bound
            lw = logw[hit]
            l1 = _logsumexp(lw) - log_n
            l2 = _logsumexp(2.0 * lw) - log_n
            if lw.size:
                # Var(mean) = (M2 - M1^2)/n, kept in the log domain
                gap = min(2.0 * l1 - l2, 0.0)
                log_var = l2 + math.log1p(-math.exp(gap)) - log_n \
                    if gap < 0.0 else float("-inf")
                log_se = 0.5 * log_var
            else:
                log_se = float("-inf")
            out[step] = (l1, log_se)
    return out


def _f_decay_run(args) -> list[FRow]:
    checkpoints, n_samples, epsilon, seed = args
    rng = np.random.default_rng(seed)
    sampler = GaussDigitSampler(n_samples)
    logq = np.zeros(n_samples)
    ratio = np.zeros(n_samples)
    marks = set(checkpoints)
    rows = []
    for step in range(1, max(checkpoints) + 1):
        t = sampler.step(rng) + ratio
        logq += np.log(t)
        ratio = 1.0 / t
        if step in marks:
            hits = int((np.abs(logq / step - KHINCHIN_LEVY) > epsilon).sum())
            p = hits / n_samples
            rows.append(FRow(n=step, estimate=p,
                             stderr=math.sqrt(p * (1.0 - p) / n_samples),
                             hits=hits))
    return rows


def _ef_task(args):
    tag = args[0]
    if tag == "tilt":
        return _tilted_tail_run(args[1:])
    return _f_decay_run(args[1:])


def ef_decay_estimates(checkpoints: Sequence[int] = (100, 1000, 10 ** 4),
                       n_samples: int = 10 ** 5,
                       eps_e: float = 0.5,
                       s: Union[Pattern, Sequence[int]] = (1,),
                       eps_f: float = 0.1,
                       seed: int = 0,
                       threads: int = 1) -> EFDecayReport:
    """Monte Carlo decay of both exceptional sets along one set of depths.

    The growth set is estimated by plain sampling.  The frequency set is far
    too small for that beyond shallow depths (its measure falls like
    e^{-cN}), so each tail is estimated by importance sampling on the digit
    chain, exponentially tilted so the tilted mean frequency sits at the
    tail's own threshold; weighted averages are unbiased for the plain
    chain, and the two tails add.  Estimates are reported both raw (which
    may underflow to zero at large depth) and in the log domain.
    """
    s = Pattern.coerce(s)
    if len(s) != 1:
        raise ValueError("the tilted estimator handles single-digit patterns")
    if n_samples < 10 ** 3:
        raise ValueError("need at least 1000 samples")
    cps = sorted(set(int(c) for c in checkpoints))
    if cps[0] < 1:
        raise ValueError("checkpoints must be >= 1")
    d = s.digits[0]
    mu = gauss_measure(s)
    frac_hi = (1.0 + eps_e) * mu
    frac_lo = (1.0 - eps_e) * mu
    seeds = np.random.SeedSequence(seed).spawn(5)
    theta_hi = _tune_theta(d, frac_hi, seeds[0])
    theta_lo = _tune_theta(d, frac_lo, seeds[1])

    tasks = [
        ("tilt", d, theta_hi, cps, n_samples, frac_hi, True, seeds[2]),
        ("tilt", d, theta_lo, cps, n_samples, frac_lo, False, seeds[3]),
        ("f", cps, n_samples, eps_f, seeds[4]),
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=min(threads, 3)) as pool:
            hi_out, lo_out, rows_f = list(pool.map(_ef_task, tasks))
    else:
        hi_out, lo_out, rows_f = (_ef_task(t) for t in tasks)

    rows_e = []
    for cp in cps:
        l1h, lseh = hi_out[cp]
        l1l, lsel = lo_out[cp]
        log_est = float(np.logaddexp(l1h, l1l))
        est = math.exp(log_est) if log_est > -745.0 else 0.0
        log_se = 0.5 * float(np.logaddexp(2.0 * lseh, 2.0 * lsel))
        rel = math.exp(log_se - log_est) if math.isfinite(log_est) else float("inf")
        rows_e.append(ERow(n=cp, estimate=est, log_estimate=log_est,
                           rel_stderr=rel))
    params = {
        "checkpoints": cps, "n_samples": n_samples, "eps_e": eps_e,
        "s": list(s.digits), "eps_f": eps_f, "seed": seed,
        "method_e": "tilted-importance", "theta_hi": theta_hi,
        "theta_lo": theta_lo, "method_f": "plain",
    }
    return EFDecayReport(params=params, rows_e=rows_e, rows_f=rows_f)

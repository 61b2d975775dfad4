"""Graded length counting along a value sequence.

alpha(n) counts the monomial basis of grade n (see `oracle` for the direct
enumeration).  It satisfies alpha(0) = 1 and, for n in block i (meaning
r_i <= n < r_{i+1}),

    alpha(n) = alpha(r_i - 1) + min(alpha(r_i - 1), alpha(n - r_i)),

which this module evaluates in O(I) per point after memoizing the block heads
alpha(r_i - 1).  On every plateau (r_0+...+r_i, r_{i+1}) the value is the
constant 2^i, alpha(r_i - 1)/r_i tends to 1/(2+theta) with explicit error
epsilon_i, and exact two-sided envelopes bound alpha(n) for all n.

All arithmetic is exact (ints and Fractions).  Sequences and tables are
immutable after construction, so concurrent reads are safe; the block-head
memo is a pure cache and correctness never depends on hits.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import IO, Iterable, Sequence, Union

from .errors import DomainError, InsufficientPrecision, SequenceTooShort
from .theta import (
    ThetaSpec,
    ValueSequence,
    expand_theta,
    multiplicity_from_theta,
)

Rational = Union[int, str, Fraction]


def _validate_strictly_increasing(r: tuple[int, ...]) -> None:
    for i in range(1, len(r) - 1):
        if r[i + 1] <= r[i]:
            raise DomainError(
                f"value sequence must be strictly increasing from index 1; "
                f"r_{i}={r[i]} >= r_{i + 1}={r[i + 1]}"
            )


def _alpha_chain(r: tuple[int, ...], heads: Sequence[int], n: int) -> int:
    # Assumes 0 <= n < r[-1] and heads[j] valid for every block the chain visits.
    stack = []
    m = n
    while m:
        i = bisect_right(r, m) - 1
        stack.append(heads[i])
        m -= r[i]
    a = 1
    for h in reversed(stack):
        a = h + min(h, a)
    return a


@lru_cache(maxsize=64)
def _block_heads(vs: ValueSequence) -> tuple[int, ...]:
    """heads[i] = alpha(r_i - 1) for 0 <= i <= I, computed by the recursion itself."""
    r = vs.r
    _validate_strictly_increasing(r)
    heads = [1, 1][: len(r)]
    for i in range(2, len(r)):
        shifted = _alpha_chain(r, heads, r[i] - 1 - r[i - 1])
        heads.append(heads[i - 1] + min(heads[i - 1], shifted))
    return tuple(heads)


def alpha_at(vs: ValueSequence, n: int) -> int:
    """Exact alpha(n) as a point query; n may be astronomically large (but < r_I)."""
    if n < 0:
        raise DomainError("n must be >= 0")
    if n == 0:
        return 1
    if n >= vs.r[-1]:
        raise SequenceTooShort(
            f"n={n} is not below r_{vs.max_index}={vs.r[-1]}; build a longer sequence"
        )
    return _alpha_chain(vs.r, _block_heads(vs), n)


@dataclass(frozen=True)
class HilbertTable:
    """Dense alpha values 0..n_max with cumulative sums cumulative[n] = sum_{k<n} alpha(k)."""

    vs: ValueSequence
    alpha: tuple[int, ...]
    cumulative: tuple[int, ...]
    heads: tuple[int, ...]

    @property
    def n_max(self) -> int:
        return len(self.alpha) - 1

    def alpha_at(self, n: int) -> int:
        if not 0 <= n <= self.n_max:
            raise DomainError(f"n={n} outside tabulated range [0, {self.n_max}]")
        return self.alpha[n]

    def cumulative_at(self, n: int) -> int:
        if not 0 <= n <= self.n_max:
            raise DomainError(f"n={n} outside tabulated range [0, {self.n_max}]")
        return self.cumulative[n]


def alpha_table(vs: ValueSequence, n_max: int) -> HilbertTable:
    """Tabulate alpha and its cumulative sums densely by a linear sweep."""
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    if n_max >= vs.r[-1]:
        raise SequenceTooShort(
            f"n_max={n_max} is not below r_{vs.max_index}={vs.r[-1]}"
        )
    heads = _block_heads(vs)
    r = vs.r
    alpha = [1]
    i = 1
    for n in range(1, n_max + 1):
        while n >= r[i + 1]:
            i += 1
        h = heads[i]
        alpha.append(h + min(h, alpha[n - r[i]]))
    cumulative = [0]
    for n in range(1, n_max + 1):
        cumulative.append(cumulative[n - 1] + alpha[n - 1])
    return HilbertTable(
        vs=vs, alpha=tuple(alpha), cumulative=tuple(cumulative), heads=heads
    )


@dataclass(frozen=True)
class Plateau:
    """Maximal interval (inclusive) on which alpha is the constant 2^i; may be empty."""

    i: int
    lo: int
    hi: int
    value: int

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi

    @property
    def length(self) -> int:
        return max(0, self.hi - self.lo + 1)


def plateau_decomposition(vs: ValueSequence) -> tuple[Plateau, ...]:
    """Plateaus at levels 1 <= i < I: lo = (r_0+...+r_i)+1, hi = r_{i+1}-1, value 2^i.

    Empty levels (hi = lo - 1) are kept so indexing stays aligned with i.
    """
    r = vs.r
    out = []
    partial = r[0] + (r[1] if len(r) > 1 else 0)
    for i in range(1, len(r) - 1):
        out.append(Plateau(i=i, lo=partial + 1, hi=r[i + 1] - 1, value=2**i))
        partial += r[i + 1]
    return tuple(out)


@dataclass(frozen=True)
class EpsilonTerm:
    """Exact gap epsilon_i = alpha(r_i - 1)/r_i - 1/(2+theta) (the whole ratio when theta is infinite)."""

    i: int
    value: Fraction


def epsilon_at(theta: ThetaSpec, i: int) -> EpsilonTerm:
    """Closed-form epsilon_i, exactly.

    Finite theta: (R_i + 2^(1-i)) / ((2+theta) * (2+theta - R_i - 2^(1-i))).
    Infinite theta: 1 / (1 + i - 2^(1-i)).
    Strictly decreasing in i either way, since R_i is non-increasing.
    """
    if i < 2:
        raise DomainError("epsilon terms start at i = 2")
    if theta.is_infinite:
        return EpsilonTerm(i=i, value=1 / (1 + i - Fraction(1, 2 ** (i - 1))))
    f = theta.as_fraction()  # raises InsufficientPrecision for digit prefixes
    r_i = expand_theta(theta, i).remainder(i)
    t = r_i + Fraction(1, 2 ** (i - 1))
    return EpsilonTerm(i=i, value=t / ((2 + f) * (2 + f - t)))


def n_of_epsilon(theta: ThetaSpec, eps: Rational) -> int:
    """Smallest i >= 2 with epsilon_i < eps (all later terms are smaller too)."""
    e = Fraction(eps)
    if e <= 0:
        raise DomainError("eps must be > 0")
    i = 2
    while epsilon_at(theta, i).value >= e:
        i += 1
    return i


@dataclass(frozen=True)
class EnvelopeViolation:
    n: int
    alpha: int
    bound: Fraction


def _table_for(vs: ValueSequence, n_max: int, table: HilbertTable | None) -> HilbertTable:
    if table is not None and table.vs == vs and table.n_max >= n_max:
        return table
    return alpha_table(vs, n_max)


def _require_theta(vs: ValueSequence) -> ThetaSpec:
    if vs.theta is None:
        raise DomainError("this check needs the sequence's theta; none is attached")
    if vs.theta.is_bits:
        raise InsufficientPrecision(
            "digit-prefix theta has no exact limit; use .truncation() explicitly"
        )
    return vs.theta


def lower_envelope_check(
    vs: ValueSequence, n_max: int, table: HilbertTable | None = None
) -> EnvelopeViolation | None:
    """Check alpha(n)*(2+theta) > n for all n <= n_max (alpha(n) >= 1 when theta is infinite).

    Returns None on pass, else the first violation.  Comparisons are exact
    integer cross-multiplications.
    """
    theta = _require_theta(vs)
    tab = _table_for(vs, n_max, table)
    if theta.is_infinite:
        for n in range(n_max + 1):
            if tab.alpha[n] < 1:
                return EnvelopeViolation(n=n, alpha=tab.alpha[n], bound=Fraction(1))
        return None
    f = theta.as_fraction()
    p, q = f.numerator, f.denominator
    scale = 2 * q + p  # (2 + theta) * q
    for n in range(n_max + 1):
        if not tab.alpha[n] * scale > n * q:
            return EnvelopeViolation(n=n, alpha=tab.alpha[n], bound=Fraction(n * q, scale))
    return None


def upper_envelope_check(
    vs: ValueSequence,
    eps: Rational,
    n_max: int,
    table: HilbertTable | None = None,
) -> EnvelopeViolation | None:
    """Check alpha(n) <= (1/(2+theta) + eps)*n + alpha(r_N - 1) for r_N <= n <= n_max.

    N = N(eps) is the first index with epsilon_N < eps.  When r_N exceeds
    n_max there is nothing to check and the result is a (vacuous) pass.
    """
    theta = _require_theta(vs)
    e = Fraction(eps)
    N = n_of_epsilon(theta, e)
    if N > vs.max_index or vs.r[N] > n_max:
        return None
    start = vs.r[N]
    head = alpha_at(vs, start - 1)
    slope = e if theta.is_infinite else 1 / (2 + theta.as_fraction()) + e
    num, den = slope.numerator, slope.denominator
    tab = _table_for(vs, n_max, table)
    for n in range(start, n_max + 1):
        if not (tab.alpha[n] - head) * den <= num * n:
            return EnvelopeViolation(
                n=n, alpha=tab.alpha[n], bound=slope * n + head
            )
    return None


@dataclass(frozen=True)
class LimitRow:
    i: int
    ratio: Fraction
    distance: Fraction


def limit_report(vs: ValueSequence, sample_indices: Iterable[int]) -> tuple[LimitRow, ...]:
    """Rows (i, alpha(r_i - 1)/r_i, distance to the limit 1/(2+theta)).

    For i >= 2 the distance equals epsilon_i exactly.
    """
    theta = _require_theta(vs)
    limit = multiplicity_from_theta(theta)
    assert isinstance(limit, Fraction)
    heads = _block_heads(vs)
    rows = []
    for i in sample_indices:
        if not 1 <= i <= vs.max_index:
            raise SequenceTooShort(f"index {i} outside [1, {vs.max_index}]")
        ratio = Fraction(heads[i], vs.r[i])
        rows.append(LimitRow(i=i, ratio=ratio, distance=ratio - limit))
    return tuple(rows)


@dataclass(frozen=True)
class CumulativeRow:
    n: int
    ratio: Fraction
    distance: Fraction


def cumulative_limit_report(
    vs: ValueSequence,
    samples: Iterable[int],
    table: HilbertTable | None = None,
) -> tuple[CumulativeRow, ...]:
    """Rows (n, 2*cumulative(n)/n^2, |ratio - C|) where C is the limit 1/(2+theta)."""
    theta = _require_theta(vs)
    C = multiplicity_from_theta(theta)
    assert isinstance(C, Fraction)
    ns = sorted(set(int(n) for n in samples))
    if not ns:
        return ()
    if ns[0] < 1:
        raise DomainError("cumulative ratios need n >= 1")
    tab = _table_for(vs, ns[-1], table)
    rows = []
    for n in ns:
        ratio = Fraction(2 * tab.cumulative[n], n * n)
        rows.append(CumulativeRow(n=n, ratio=ratio, distance=abs(ratio - C)))
    return tuple(rows)


def write_alpha_csv(table: HilbertTable, fp: IO[str]) -> None:
    """Rows n,alpha,cumulative with all integers as decimal text."""
    fp.write("n,alpha,cumulative\n")
    for n in range(table.n_max + 1):
        fp.write(f"{n},{table.alpha[n]},{table.cumulative[n]}\n")


def write_plateaus_csv(plateaus: Iterable[Plateau], fp: IO[str]) -> None:
    fp.write("i,lo,hi,value\n")
    for p in plateaus:
        fp.write(f"{p.i},{p.lo},{p.hi},{p.value}\n")

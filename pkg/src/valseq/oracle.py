"""Brute-force ground truth for alpha(n) by direct basis enumeration.

The grade-n basis is identified with exponent tuples (n_0; n_1, ..., n_i) in
N x {0,1}^i satisfying n_0 + n_1*r_1 + ... + n_i*r_i = n, where i is the block
of n.  Equivalently there is one tuple per subset T of {r_1, ..., r_i} with
sum(T) <= n, and n_0 absorbs the slack n - sum(T).  Counting these subsets is
the oracle against which the fast recursive evaluator is cross-checked; it
never consults the recursion.

Enumeration cost is 2^i with i ~ log2(n), so the oracle is practical up to
n around 10^6.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache
from typing import IO, Iterable, Sequence

from .errors import DomainError
from .theta import ValueSequence, block_index


def _trim(flags: Iterable[int]) -> tuple[int, ...]:
    out = tuple(flags)
    while out and out[-1] == 0:
        out = out[:-1]
    return out


@dataclass(frozen=True)
class ExponentTuple:
    """One basis element: slack exponent n0 plus the 0/1 flags n_1, n_2, ...

    Trailing zero flags are trimmed on construction so equality is padded
    equality: (3;) == (3; 0, 0).
    """

    n0: int
    flags: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.n0 < 0:
            raise DomainError("n0 must be >= 0")
        if any(f not in (0, 1) for f in self.flags):
            raise DomainError("flags must be 0 or 1")
        object.__setattr__(self, "flags", _trim(self.flags))

    def value(self, r: Sequence[int]) -> int:
        """n0 + sum of the flagged r_j (flags[k] multiplies r_{k+1})."""
        return self.n0 + sum(f * r[k + 1] for k, f in enumerate(self.flags))

    def flag_string(self) -> str:
        return "".join(str(f) for f in self.flags)


def enumerate_basis(vs: ValueSequence, n: int) -> tuple[ExponentTuple, ...]:
    """All exponent tuples of value exactly n, in subset-mask order (n_1 is the low bit)."""
    if n < 0:
        raise DomainError("n must be >= 0")
    if n == 0:
        return (ExponentTuple(0),)
    i = block_index(vs, n)
    r = vs.r
    out = []
    for mask in range(1 << i):
        total = 0
        for j in range(1, i + 1):
            if (mask >> (j - 1)) & 1:
                total += r[j]
        if total <= n:
            flags = tuple((mask >> (j - 1)) & 1 for j in range(1, i + 1))
            out.append(ExponentTuple(n0=n - total, flags=flags))
    return tuple(out)


@lru_cache(maxsize=16)
def _sorted_subset_sums(values: tuple[int, ...]) -> tuple[int, ...]:
    # All 2^len(values) subset sums, sorted, built by merge doubling.
    if not values:
        return (0,)
    base = _sorted_subset_sums(values[:-1])
    step = values[-1]
    shifted = [s + step for s in base]
    merged = []
    a = b = 0
    while a < len(base) and b < len(shifted):
        if base[a] <= shifted[b]:
            merged.append(base[a])
            a += 1
        else:
            merged.append(shifted[b])
            b += 1
    merged.extend(base[a:])
    merged.extend(shifted[b:])
    return tuple(merged)


def alpha_bruteforce(vs: ValueSequence, n: int) -> int:
    """|enumerate_basis(vs, n)| without materializing the tuples."""
    if n < 0:
        raise DomainError("n must be >= 0")
    if n == 0:
        return 1
    i = block_index(vs, n)
    sums = _sorted_subset_sums(vs.r[1 : i + 1])
    return bisect_right(sums, n)


@dataclass(frozen=True)
class Disagreement:
    n: int
    bruteforce: int
    recursive: int


def compare_range(vs: ValueSequence, n_max: int) -> Disagreement | None:
    """First n <= n_max where the recursion disagrees with brute force, or None."""
    from .hilbert import alpha_at

    for n in range(n_max + 1):
        slow = alpha_bruteforce(vs, n)
        fast = alpha_at(vs, n)
        if slow != fast:
            return Disagreement(n=n, bruteforce=slow, recursive=fast)
    return None


def write_tuples_csv(vs: ValueSequence, ns: Iterable[int], fp: IO[str]) -> None:
    """Rows n,n0,flags with flags as a bit-string (n_1 first)."""
    fp.write("n,n0,flags\n")
    for n in ns:
        for t in enumerate_basis(vs, n):
            fp.write(f"{n},{t.n0},{t.flag_string()}\n")

"""Growth parameter theta, its binary digit expansion, and the value sequence it drives.

A parameter theta >= 0 (or infinity) is encoded by digits e_2, e_3, ... where
e_2 = floor(2*theta) and each later e_j in {0, 1} is chosen greedily so the
remainder R_j = theta - sum_{k<=j} e_k * 2^(1-k) stays in [0, 2^(1-j)).  For
theta = infinity the digits are e_j = 2^(j-1).  The digits feed the recurrence

    r_0 = 1,  r_1 = 1,  r_{i+1} = 2*r_i + 1 + e_{i+1}   (i >= 1),

whose closed form is r_i = 2^i - 1 + sum_{k=2..i} e_k * 2^(i-k).

Everything here is exact: rationals are `fractions.Fraction`, sequence entries
are Python ints, and all values are immutable after construction.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence, Union

from .errors import DomainError, InsufficientPrecision, SequenceTooShort

RATIONAL = "rational"
BITS = "bits"
INFINITY = "infinity"


@dataclass(frozen=True)
class ThetaSpec:
    """The growth parameter: an exact rational, a finite digit prefix, or infinity.

    Use the factories `rational`, `from_bits`, `infinite` (or `parse`) rather
    than the constructor.
    """

    kind: str
    value: Fraction | None = None
    e2: int | None = None
    bits: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in (RATIONAL, BITS, INFINITY):
            raise DomainError(f"unknown theta kind: {self.kind!r}")
        if self.kind == RATIONAL:
            if not isinstance(self.value, Fraction) or self.value < 0:
                raise DomainError("rational theta must be a Fraction >= 0")
        elif self.kind == BITS:
            if not isinstance(self.e2, int) or self.e2 < 0:
                raise DomainError("e2 must be a nonnegative integer")
            if any(b not in (0, 1) for b in self.bits):
                raise DomainError("bits must all be 0 or 1")

    @classmethod
    def rational(cls, value: Union[int, str, Fraction], den: int | None = None) -> "ThetaSpec":
        f = Fraction(value, den) if den is not None else Fraction(value)
        if f < 0:
            raise DomainError("theta must be >= 0")
        return cls(kind=RATIONAL, value=f)

    @classmethod
    def from_bits(cls, e2: int, bits: Iterable[int] = ()) -> "ThetaSpec":
        return cls(kind=BITS, e2=int(e2), bits=tuple(int(b) for b in bits))

    @classmethod
    def infinite(cls) -> "ThetaSpec":
        return cls(kind=INFINITY)

    @classmethod
    def parse(cls, text: str) -> "ThetaSpec":
        """Parse 'p/q', an integer, or 'inf'."""
        t = text.strip().lower()
        if t in ("inf", "infinity", "oo"):
            return cls.infinite()
        try:
            return cls.rational(Fraction(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse theta from {text!r}") from exc

    @property
    def is_rational(self) -> bool:
        return self.kind == RATIONAL

    @property
    def is_bits(self) -> bool:
        return self.kind == BITS

    @property
    def is_infinite(self) -> bool:
        return self.kind == INFINITY

    @property
    def exact_upto(self) -> int | None:
        """Largest digit index j available, or None when unbounded."""
        if self.kind == BITS:
            return 2 + len(self.bits)
        return None

    def as_fraction(self) -> Fraction:
        if self.kind == RATIONAL:
            assert self.value is not None
            return self.value
        if self.kind == BITS:
            raise InsufficientPrecision("digit-prefix theta has no exact rational value")
        raise DomainError("theta is infinite")

    def truncation(self) -> "ThetaSpec":
        """The exact rational obtained by reading the digit prefix as terminating.

        Only meaningful for the `bits` kind; the true parameter lies in
        [truncation, truncation + 2^(1-exact_upto)).
        """
        if self.kind != BITS:
            raise DomainError("truncation applies to digit-prefix theta only")
        assert self.e2 is not None
        f = Fraction(self.e2, 2)
        for j, b in enumerate(self.bits, start=3):
            f += Fraction(b, 2 ** (j - 1))
        return ThetaSpec.rational(f)


@dataclass(frozen=True)
class DigitExpansion:
    """Digits e_2..e_upto plus, for exact rational theta, the remainders R_2..R_upto."""

    e: tuple[int, ...]
    remainders: tuple[Fraction, ...] | None
    upto: int

    def digit(self, j: int) -> int:
        if not 2 <= j <= self.upto:
            raise DomainError(f"digit index {j} outside [2, {self.upto}]")
        return self.e[j - 2]

    def remainder(self, j: int) -> Fraction:
        if self.remainders is None:
            raise InsufficientPrecision("remainders are only defined for exact rational theta")
        if not 2 <= j <= self.upto:
            raise DomainError(f"remainder index {j} outside [2, {self.upto}]")
        return self.remainders[j - 2]


def expand_theta(theta: ThetaSpec, upto: int) -> DigitExpansion:
    """Digits of theta up to index `upto` (inclusive), greedily extracted.

    For rational theta the remainders satisfy 0 <= R_j < 2^(1-j) exactly; ties
    always resolve to the terminating (trailing-zero) expansion.
    """
    if upto < 2:
        raise DomainError("digit expansion starts at index 2")
    if theta.is_infinite:
        return DigitExpansion(
            e=tuple(2 ** (j - 1) for j in range(2, upto + 1)),
            remainders=None,
            upto=upto,
        )
    if theta.is_bits:
        limit = theta.exact_upto
        assert limit is not None and theta.e2 is not None
        if upto > limit:
            raise InsufficientPrecision(
                f"digits known only up to index {limit}, requested {upto}"
            )
        return DigitExpansion(
            e=(theta.e2,) + theta.bits[: upto - 2],
            remainders=None,
            upto=upto,
        )
    f = theta.as_fraction()
    e2 = (2 * f.numerator) // f.denominator
    digits = [e2]
    rem = f - Fraction(e2, 2)
    remainders = [rem]
    for j in range(3, upto + 1):
        step = Fraction(1, 2 ** (j - 1))
        bit = 1 if rem >= step else 0
        rem = rem - step if bit else rem
        assert 0 <= rem < step
        digits.append(bit)
        remainders.append(rem)
    return DigitExpansion(e=tuple(digits), remainders=tuple(remainders), upto=upto)


class MultiplicityInterval(NamedTuple):
    """Exact enclosure of the limit 1/(2+theta) implied by a digit prefix."""

    lo: Fraction
    hi: Fraction


def theta_from_multiplicity(C: Union[int, str, Fraction]) -> ThetaSpec:
    """Invert C = 1/(2+theta): C in (0, 1/2] gives rational theta, C = 0 gives infinity."""
    c = Fraction(C)
    if c < 0 or c > Fraction(1, 2):
        raise DomainError(f"multiplicity must lie in [0, 1/2], got {c}")
    if c == 0:
        return ThetaSpec.infinite()
    return ThetaSpec.rational(1 / c - 2)


def multiplicity_from_theta(theta: ThetaSpec) -> Union[Fraction, MultiplicityInterval]:
    """The limit value 1/(2+theta); an exact interval for digit-prefix theta."""
    if theta.is_infinite:
        return Fraction(0)
    if theta.is_rational:
        return 1 / (2 + theta.as_fraction())
    limit = theta.exact_upto
    assert limit is not None
    t_lo = theta.truncation().as_fraction()
    t_hi = t_lo + Fraction(1, 2 ** (limit - 1))
    return MultiplicityInterval(lo=1 / (2 + t_hi), hi=1 / (2 + t_lo))


@dataclass(frozen=True)
class ValueSequence:
    """The values r_0..r_I, optionally tagged with the theta that produced them.

    Construction does not enforce the growth inequalities; run
    `check_sequence_invariants` to test them.  Evaluators require r to be
    strictly increasing from index 1.
    """

    r: tuple[int, ...]
    theta: ThetaSpec | None = None

    def __post_init__(self) -> None:
        if len(self.r) < 1:
            raise DomainError("value sequence needs at least r_0")
        if any((not isinstance(v, int)) or v < 0 for v in self.r):
            raise DomainError("value sequence entries must be nonnegative integers")

    @property
    def max_index(self) -> int:
        return len(self.r) - 1


def build_value_sequence(theta: ThetaSpec, I: int) -> ValueSequence:
    """Run the recurrence r_{i+1} = 2 r_i + 1 + e_{i+1} out to index I."""
    if I < 1:
        raise DomainError("need I >= 1")
    r = [1, 1]
    if I >= 2:
        exp = expand_theta(theta, I)
        for i in range(1, I):
            r.append(2 * r[i] + 1 + exp.digit(i + 1))
    return ValueSequence(r=tuple(r), theta=theta)


def value_sequence_closed_form(theta: ThetaSpec, i: int) -> int:
    """r_i directly: 1 for i = 0, else 2^i - 1 + sum_{k=2..i} e_k 2^(i-k)."""
    if i < 0:
        raise DomainError("index must be >= 0")
    if i == 0:
        return 1
    total = 2**i - 1
    if i >= 2:
        exp = expand_theta(theta, i)
        for k in range(2, i + 1):
            total += exp.digit(k) * 2 ** (i - k)
    return total


def sequence_covering(theta: ThetaSpec, n_max: int) -> ValueSequence:
    """Shortest sequence with r_I > n_max, so every n <= n_max sits in a known block."""
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    I = 2
    while value_sequence_closed_form(theta, I) <= n_max:
        I += 1
    return build_value_sequence(theta, I)


def block_index(vs: ValueSequence, n: int) -> int:
    """The unique i with r_i <= n < r_{i+1} (n >= 1); needs n < r_I to be decidable."""
    if n < 1:
        raise DomainError("block location needs n >= 1")
    r = vs.r
    if n >= r[-1]:
        raise SequenceTooShort(
            f"n={n} is not below r_{vs.max_index}={r[-1]}; build a longer sequence"
        )
    return bisect_right(r, n) - 1


@dataclass(frozen=True)
class InequalityCheck:
    """Outcome of one inequality family over a whole sequence."""

    name: str
    description: str
    violations: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def first_violation(self) -> int | None:
        return self.violations[0] if self.violations else None


@dataclass(frozen=True)
class InvariantReport:
    checks: tuple[InequalityCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def __getitem__(self, name: str) -> InequalityCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def check_sequence_invariants(vs: ValueSequence | Sequence[int]) -> InvariantReport:
    """Evaluate the four growth inequalities exactly; violations are data, not errors.

    Families (index i is where the inequality is anchored):
      doubling          r_{i+1} > 2 r_i                    for 1 <= i < I
      sum_dominated     2 r_i > r_0 + ... + r_i            for 2 <= i <= I
      spaced_above_max  r_{i+1} >= max(2 r_i, sum) + 1     for 1 <= i < I
      growth_margin     r_{i+1} - (r_0 + ... + r_i) >= i   for 1 <= i < I
    """
    r = tuple(vs.r) if isinstance(vs, ValueSequence) else tuple(vs)
    I = len(r) - 1
    prefix = [0]
    for v in r:
        prefix.append(prefix[-1] + v)  # prefix[i+1] = r_0 + ... + r_i

    doubling = tuple(i for i in range(1, I) if not r[i + 1] > 2 * r[i])
    dominated = tuple(i for i in range(2, I + 1) if not 2 * r[i] > prefix[i + 1])
    spaced = tuple(
        i for i in range(1, I) if not r[i + 1] >= max(2 * r[i], prefix[i + 1]) + 1
    )
    margin = tuple(i for i in range(1, I) if not r[i + 1] - prefix[i + 1] >= i)

    return InvariantReport(
        checks=(
            InequalityCheck("doubling", "r_{i+1} > 2*r_i", doubling),
            InequalityCheck("sum_dominated", "2*r_i > r_0+...+r_i", dominated),
            InequalityCheck(
                "spaced_above_max", "r_{i+1} >= max(2*r_i, r_0+...+r_i) + 1", spaced
            ),
            InequalityCheck("growth_margin", "r_{i+1} - (r_0+...+r_i) >= i", margin),
        )
    )


def theta_to_dict(theta: ThetaSpec) -> dict:
    if theta.is_rational:
        f = theta.as_fraction()
        return {"kind": RATIONAL, "num": str(f.numerator), "den": str(f.denominator)}
    if theta.is_bits:
        return {"kind": BITS, "e2": theta.e2, "bits": list(theta.bits)}
    return {"kind": INFINITY}


def theta_from_dict(d: dict) -> ThetaSpec:
    kind = d.get("kind")
    if kind == RATIONAL:
        return ThetaSpec.rational(Fraction(int(d["num"]), int(d["den"])))
    if kind == BITS:
        return ThetaSpec.from_bits(int(d["e2"]), d.get("bits", ()))
    if kind == INFINITY:
        return ThetaSpec.infinite()
    raise DomainError(f"unknown theta kind in JSON: {kind!r}")


def sequence_to_dict(vs: ValueSequence) -> dict:
    """JSON-ready form; entries are decimal strings since they outgrow JSON numbers."""
    return {
        "theta": theta_to_dict(vs.theta) if vs.theta is not None else None,
        "r": [str(v) for v in vs.r],
    }


def sequence_from_dict(d: dict) -> ValueSequence:
    theta = theta_from_dict(d["theta"]) if d.get("theta") is not None else None
    return ValueSequence(r=tuple(int(v) for v in d["r"]), theta=theta)

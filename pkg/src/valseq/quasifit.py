"""Refutation certificates against "quasi-polynomial plus bounded" models.

A candidate model (degree d, period s, deviation M) claims there are
polynomials A_p of degree <= d, one per residue class p mod s, with
|alpha(p + s*t) - A_p(t)| <= M for every integer t >= 1.  `refute` picks
evaluation points that pit long constant plateaus against doubling growth,
writes the resulting linear constraints on the d+1 unknown coefficients, and
projects variables out one at a time in exact rational arithmetic.  If the
system is infeasible for some class, the nonnegative combination of
constraints that collapses to an impossibility (0 <= negative) is returned as
a machine-checkable witness.

Certificate convention: point j with shift t_j contributes two rows,

    row 2j   :  sum_k a_k t_j^k  <=  alpha_j + M
    row 2j+1 : -sum_k a_k t_j^k  <=  M - alpha_j

and the witness lambda satisfies lambda >= 0, sum lambda_r * row_r = 0 on the
coefficients and < 0 on the right-hand sides.  `verify_certificate` re-derives
every alpha value from the attached data source; claimed values are never
trusted.

Feasibility of the selected points is reported as `Inconclusive`: the point
selection is a heuristic, so the absence of a certificate is never spun as a
proof that the model fits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

from .errors import DomainError, MalformedCertificate, SequenceTooShort
from .hilbert import alpha_at, plateau_decomposition
from .theta import ThetaSpec, ValueSequence, build_value_sequence

AlphaSource = Union[ValueSequence, Callable[[int], int]]
Rational = Union[int, str, Fraction]

_ROW_CAP = 50_000


@dataclass(frozen=True)
class ModelCandidate:
    """A degree bound, a period, and a sup-norm deviation bound."""

    degree: int
    period: int
    deviation: Fraction

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise DomainError("degree must be >= 0")
        if self.period < 1:
            raise DomainError("period must be >= 1")
        object.__setattr__(self, "deviation", Fraction(self.deviation))
        if self.deviation < 0:
            raise DomainError("deviation must be >= 0")


def difference_reduce(candidate: ModelCandidate) -> ModelCandidate:
    """Map a model for the cumulative sums to one for its first difference.

    First-differencing a periodic-coefficient polynomial keeps the period and
    (at worst) the degree, while the bounded part at most doubles.
    """
    return ModelCandidate(
        degree=candidate.degree,
        period=candidate.period,
        deviation=2 * candidate.deviation,
    )


@dataclass(frozen=True)
class RefutationCertificate:
    candidate: ModelCandidate
    residue_class: int
    points: tuple[tuple[int, int], ...]  # (n, alpha(n))
    witness: tuple[Fraction, ...]  # 2 multipliers per point: upper row, lower row
    source: AlphaSource | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Inconclusive:
    """The selected points admit an exact fit; no refutation claimed."""

    candidate: ModelCandidate
    reason: str


def _alpha_of(source: AlphaSource, n: int) -> int:
    if isinstance(source, ValueSequence):
        return alpha_at(source, n)
    value = source(n)
    if not isinstance(value, int) or value < 0:
        raise DomainError(f"alpha source returned {value!r} for n={n}")
    return value


# ---------------------------------------------------------------------------
# Exact Fourier-Motzkin projection with witness tracking.


def _prune(
    rows: list[tuple[list[Fraction], Fraction, list[Fraction]]],
) -> tuple[list[tuple[list[Fraction], Fraction, list[Fraction]]], list[Fraction] | None]:
    """Drop tautologies, dedupe scaled copies (keep the tightest), spot 0 <= neg."""
    kept: dict[tuple[Fraction, ...], tuple[Fraction, list[Fraction]]] = {}
    for coeffs, rhs, combo in rows:
        if all(c == 0 for c in coeffs):
            if rhs < 0:
                return [], combo
            continue
        scale = max(abs(c) for c in coeffs)
        key = tuple(c / scale for c in coeffs)
        scaled_rhs = rhs / scale
        prev = kept.get(key)
        if prev is None or scaled_rhs < prev[0]:
            kept[key] = (scaled_rhs, [x / scale for x in combo])
    out = [(list(key), rhs, combo) for key, (rhs, combo) in kept.items()]
    return out, None


def _fm_witness(
    matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> list[Fraction] | None:
    """Multipliers proving {x : matrix x <= rhs} empty, or None when feasible.

    Returned lambda satisfies lambda >= 0, lambda^T matrix = 0 and
    lambda^T rhs < 0, with indices matching the input rows.
    """
    m = len(matrix)
    if m == 0:
        return None
    nvars = len(matrix[0])
    rows = [
        (
            [Fraction(c) for c in matrix[j]],
            Fraction(rhs[j]),
            [Fraction(1) if k == j else Fraction(0) for k in range(m)],
        )
        for j in range(m)
    ]
    rows, witness = _prune(rows)
    if witness is not None:
        return witness
    for var in range(nvars):
        pos = [row for row in rows if row[0][var] > 0]
        neg = [row for row in rows if row[0][var] < 0]
        zero = [row for row in rows if row[0][var] == 0]
        if not pos or not neg:
            rows = zero  # the variable absorbs every one-sided constraint
        else:
            combined = list(zero)
            for pc, pr, pw in pos:
                sp = 1 / pc[var]
                for nc, nr, nw in neg:
                    sn = 1 / -nc[var]
                    coeffs = [sp * a + sn * b for a, b in zip(pc, nc)]
                    coeffs[var] = Fraction(0)  # exact by construction
                    combined.append(
                        (
                            coeffs,
                            sp * pr + sn * nr,
                            [sp * a + sn * b for a, b in zip(pw, nw)],
                        )
                    )
            rows = combined
        if len(rows) > _ROW_CAP:
            raise RuntimeError("projection exceeded the row cap; candidate too large")
        rows, witness = _prune(rows)
        if witness is not None:
            return witness
    return None


def _constraint_rows(
    candidate: ModelCandidate, points: Sequence[tuple[int, int]]
) -> tuple[list[list[Fraction]], list[Fraction]]:
    d, s, M = candidate.degree, candidate.period, candidate.deviation
    matrix: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    p = points[0][0] % s if points else 0
    for n, a in points:
        t = (n - p) // s
        powers = [Fraction(t**k) for k in range(d + 1)]
        matrix.append(powers)
        rhs.append(Fraction(a) + M)
        matrix.append([-c for c in powers])
        rhs.append(M - Fraction(a))
    return matrix, rhs


# ---------------------------------------------------------------------------
# Point selection.


def _required_length(candidate: ModelCandidate, theta: ThetaSpec | None, level: int) -> int:
    """Plateau length demanded at `level` before we pit it against growth."""
    d, s, M = candidate.degree, candidate.period, candidate.deviation
    if theta is not None and theta.is_rational:
        weight = 2 + theta.as_fraction()
    else:
        # Infinite theta (or unknown): positions outgrow values roughly like
        # the level index, so scale the demand with it.
        weight = Fraction(level + 3)
    return s * (d + 2) * max(2, math.ceil(2 * M * weight) + 2)


def _select_levels(
    vs: ValueSequence, candidate: ModelCandidate
) -> list[tuple[int, int, int]] | None:
    """(lo, hi, value) for the first degree+2 long-enough plateaus, or None."""
    plateaus = plateau_decomposition(vs)
    chosen = []
    for p in plateaus:
        if p.length >= _required_length(candidate, vs.theta, p.i):
            chosen.append((p.lo, p.hi, p.value))
            if len(chosen) == candidate.degree + 2:
                return chosen
    return None


def _class_points_from_levels(
    levels: Sequence[tuple[int, int, int]], p: int, s: int
) -> list[int]:
    """Extreme class-p positions inside each plateau (maximal spacing in t)."""
    ns: list[int] = []
    for lo, hi, _value in levels:
        t_lo = max(1, -((p - lo) // s))  # ceil((lo - p) / s)
        t_hi = (hi - p) // s
        if t_hi < t_lo:
            continue
        ns.append(p + s * t_lo)
        if t_hi != t_lo:
            ns.append(p + s * t_hi)
    return sorted(set(ns))


def _synthetic_grid(candidate: ModelCandidate, p: int) -> list[int]:
    d, s = candidate.degree, candidate.period
    ts = set(range(1, d + 3))
    base = d + 2
    for j in range(1, d + 5):
        ts.add(base << j)
    return [p + s * t for t in sorted(ts)]


def refute(
    source: AlphaSource,
    candidate: ModelCandidate,
    *,
    max_index: int | None = None,
) -> RefutationCertificate | Inconclusive:
    """Try to prove no (degree, period, deviation) model fits the data.

    For a value sequence the points come from plateau ladders; the sequence is
    extended as needed (rebuilt from its theta) unless `max_index` caps it, in
    which case SequenceTooShort may be raised.  A returned certificate is
    always verified before it is emitted.
    """
    if isinstance(source, ValueSequence):
        vs = source
        levels = _select_levels(vs, candidate)
        while levels is None:
            if vs.theta is None:
                raise SequenceTooShort(
                    "sequence lacks long enough plateaus and has no theta to extend"
                )
            target = max(16, 2 * vs.max_index)
            if max_index is not None:
                if vs.max_index >= max_index:
                    raise SequenceTooShort(
                        f"need plateaus beyond index cap {max_index}"
                    )
                target = min(target, max_index)
            vs = build_value_sequence(vs.theta, target)
            levels = _select_levels(vs, candidate)
        point_sets = [
            _class_points_from_levels(levels, p, candidate.period)
            for p in range(candidate.period)
        ]
        data_source: AlphaSource = vs
    else:
        point_sets = [
            _synthetic_grid(candidate, p) for p in range(candidate.period)
        ]
        data_source = source

    for p, ns in enumerate(point_sets):
        if len(ns) < candidate.degree + 2:
            continue
        points = tuple((n, _alpha_of(data_source, n)) for n in ns)
        matrix, rhs = _constraint_rows(candidate, points)
        witness = _fm_witness(matrix, rhs)
        if witness is not None:
            cert = RefutationCertificate(
                candidate=candidate,
                residue_class=p,
                points=points,
                witness=tuple(witness),
                source=data_source,
            )
            if not verify_certificate(cert):
                raise RuntimeError("internal error: emitted witness failed verification")
            return cert
    return Inconclusive(
        candidate=candidate,
        reason="every residue class admits an exact fit on the selected points",
    )


def sweep_candidates(
    source: AlphaSource,
    candidates: Iterable[ModelCandidate],
    *,
    max_index: int | None = None,
) -> list[tuple[ModelCandidate, RefutationCertificate | Inconclusive]]:
    """Run `refute` over a candidate grid, pairing each with its outcome."""
    return [(c, refute(source, c, max_index=max_index)) for c in candidates]


def verify_certificate(cert: RefutationCertificate) -> bool:
    """Re-check a certificate independently of the solver that produced it.

    Structural defects raise MalformedCertificate.  A structurally sound
    certificate returns False unless the multipliers are nonnegative, every
    cited alpha value matches a fresh evaluation, the multiplier combination
    cancels all polynomial coefficients, and the combined right-hand side is
    negative.
    """
    cand = cert.candidate
    s = cand.period
    if not 0 <= cert.residue_class < s:
        raise MalformedCertificate("residue class outside [0, period)")
    if not cert.points:
        raise MalformedCertificate("certificate cites no evaluation points")
    if len(cert.witness) != 2 * len(cert.points):
        raise MalformedCertificate("witness length must be two multipliers per point")
    if cert.source is None:
        raise MalformedCertificate("certificate carries no data source to check against")
    ts = []
    for n, claimed in cert.points:
        if not isinstance(n, int) or not isinstance(claimed, int):
            raise MalformedCertificate("points must be integer pairs")
        if (n - cert.residue_class) % s != 0:
            raise MalformedCertificate(f"point n={n} is not in residue class {cert.residue_class}")
        t = (n - cert.residue_class) // s
        if t < 1:
            raise MalformedCertificate(f"point n={n} has nonpositive shift t={t}")
        ts.append(t)
    if len(set(ts)) != len(ts):
        raise MalformedCertificate("duplicate evaluation points")

    if any(lam < 0 for lam in cert.witness):
        return False
    for n, claimed in cert.points:
        if _alpha_of(cert.source, n) != claimed:
            return False
    matrix, rhs = _constraint_rows(cand, cert.points)
    ncols = cand.degree + 1
    for k in range(ncols):
        if sum(lam * matrix[j][k] for j, lam in enumerate(cert.witness)) != 0:
            return False
    total = sum(lam * rhs[j] for j, lam in enumerate(cert.witness))
    return total < 0


# ---------------------------------------------------------------------------
# JSON forms (all integers as decimal strings).


def candidate_to_dict(candidate: ModelCandidate) -> dict:
    M = candidate.deviation
    return {
        "degree": candidate.degree,
        "period": candidate.period,
        "deviation": [str(M.numerator), str(M.denominator)],
    }


def candidate_from_dict(d: dict) -> ModelCandidate:
    num, den = d["deviation"]
    return ModelCandidate(
        degree=int(d["degree"]),
        period=int(d["period"]),
        deviation=Fraction(int(num), int(den)),
    )


def certificate_to_dict(cert: RefutationCertificate) -> dict:
    return {
        "candidate": candidate_to_dict(cert.candidate),
        "class": cert.residue_class,
        "points": [[str(n), str(a)] for n, a in cert.points],
        "witness": [[str(l.numerator), str(l.denominator)] for l in cert.witness],
    }


def certificate_from_dict(d: dict, source: AlphaSource | None = None) -> RefutationCertificate:
    try:
        return RefutationCertificate(
            candidate=candidate_from_dict(d["candidate"]),
            residue_class=int(d["class"]),
            points=tuple((int(n), int(a)) for n, a in d["points"]),
            witness=tuple(Fraction(int(num), int(den)) for num, den in d["witness"]),
            source=source,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedCertificate(f"bad certificate JSON: {exc}") from exc

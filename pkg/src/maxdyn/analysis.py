"""Periodicity, accumulation intervals, density checks and nearby cycles.

Everything that decides something (periodicity, containment, continued
fraction quotients, term decompositions) runs on exact scalars; floats only
appear in the density statistics.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import gcd
from typing import Iterator, Sequence

from .cases import (
    Case,
    NotNormalized,
    case_fast_forward,
    satisfies,
    trace_routes,
)
from .core import NoC4Window, Tuple4, normalize_to_C4, step_forward, terms
from .scalar import ZERO, Scalar, rational_ratio, smin, to_float

__all__ = [
    "Verdict",
    "Certificate",
    "PeriodicityReport",
    "AccumulationPrediction",
    "DensityReport",
    "NonPositiveReport",
    "PeriodicNeighbor",
    "TermDecomposition",
    "PeriodicInput",
    "PreconditionViolated",
    "Degenerate",
    "predict_periodicity",
    "detect_period",
    "predict_accumulation",
    "containment_violations",
    "density_report",
    "nonpositive_bounds",
    "continued_fraction",
    "convergents",
    "nearby_periodic",
    "decompose_term",
    "kronecker_gaps",
    "max_gap",
]

DEFAULT_MAX_PERIOD_STEPS = 1_000_000


class PeriodicInput(ValueError):
    """An operation that needs a non-periodic orbit got a periodic one."""


class PreconditionViolated(ValueError):
    pass


class Degenerate(ValueError):
    """``x`` and ``w - z`` are rationally dependent, so decompositions are not unique."""


class Verdict(str, Enum):
    PERIODIC = "periodic"
    NON_PERIODIC = "non_periodic"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Certificate:
    """Why a verdict holds.

    ``kind`` is ``sigma_rational`` (with ``ratio``), ``sigma_irrational`` or
    ``cycle_found`` (with ``length``).
    """

    kind: str
    ratio: Fraction | None = None
    length: int | None = None

    def __str__(self) -> str:
        if self.kind == "sigma_rational":
            return f"sigma_rational({self.ratio})"
        if self.kind == "cycle_found":
            return f"cycle_found({self.length})"
        return self.kind


@dataclass(frozen=True)
class PeriodicityReport:
    verdict: Verdict
    period: int | None
    certificate: Certificate
    c4_tuple: Tuple4 | None = None

    @property
    def periodic(self) -> bool:
        return self.verdict is Verdict.PERIODIC


@dataclass(frozen=True)
class AccumulationPrediction:
    c4_tuple: Tuple4
    lo: Scalar
    hi: Scalar
    shift: int = 0


@dataclass(frozen=True)
class DensityReport:
    """Float density statistics of an orbit against its predicted interval.

    ``violations`` counts floats outside ``[lo - epsilon, hi + epsilon]``;
    ``exact_violations`` counts terms outside ``[lo, hi]`` by exact sign tests.
    """

    n_steps: int
    violations: int
    max_gap: float
    interval: tuple[float, float]
    epsilon: float
    exact_violations: int = 0
    distinct: int = 0


@dataclass(frozen=True)
class NonPositiveReport:
    """Where the non-positive terms of a C4 orbit fall.

    C1-type terms are ``x2 - x1`` and ``x4 - x2`` produced while a C1 window
    is fast-forwarded; C3-type terms are ``x4 - x3`` and ``x3 - x2 - x4``
    produced from a C3 window.  ``common`` counts the recurring ``w - x`` and
    ``-z``; ``other`` counts non-positive terms matching none of these.
    """

    all_in_interval: bool
    c1_in: bool
    c3_in: bool
    interval: tuple[Scalar, Scalar]
    c1_interval: tuple[Scalar, Scalar]
    c3_interval: tuple[Scalar, Scalar]
    n_terms: int
    nonpositive: int
    c1_count: int
    c3_count: int
    common: int
    other: int


@dataclass(frozen=True)
class PeriodicNeighbor:
    tuple: Tuple4
    p: int
    q: int
    predicted_period: int
    convergent: tuple[int, int]
    distance: Scalar


@dataclass(frozen=True)
class TermDecomposition:
    """``value == t*x + y - s*(w - z)`` for the C4 window ``(x, y, z, w)``."""

    t: int
    s: int


# -- periodicity ---------------------------------------------------------------


def detect_period(w: Sequence[Scalar], max_steps: int = DEFAULT_MAX_PERIOD_STEPS) -> int | None:
    """Smallest ``n <= max_steps`` with ``F^n(w) == w``, else ``None``.

    The map is invertible, so any cycle passes through ``w`` itself and it is
    enough to compare each window with the start.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    start = tuple(w)
    t = start
    for n in range(1, max_steps + 1):
        t = step_forward(t)
        if t == start:
            return n
    return None


def predict_periodicity(w: Sequence[Scalar], max_steps: int = DEFAULT_MAX_PERIOD_STEPS) -> PeriodicityReport:
    """Decide periodicity exactly from the C4 form ``(x, y, z, w)``.

    The orbit is periodic iff ``(w - z) / x`` is rational.  For periodic
    orbits the period is found by direct iteration (``None`` if it exceeds
    ``max_steps``).
    """
    try:
        c4, _ = normalize_to_C4(w)
    except NoC4Window as exc:
        return PeriodicityReport(Verdict.PERIODIC, exc.period, Certificate("cycle_found", length=exc.period))
    x, y, z, ww = c4
    if x.is_zero():
        return PeriodicityReport(Verdict.PERIODIC, 1, Certificate("cycle_found", length=1), c4)
    q = rational_ratio(ww - z, x)
    if q is None:
        return PeriodicityReport(Verdict.NON_PERIODIC, None, Certificate("sigma_irrational"), c4)
    period = detect_period(c4, max_steps)
    return PeriodicityReport(Verdict.PERIODIC, period, Certificate("sigma_rational", ratio=q), c4)


def predict_accumulation(w: Sequence[Scalar]) -> AccumulationPrediction:
    """Accumulation interval ``[min(w - x, -z), x]`` of a non-periodic orbit."""
    try:
        c4, shift = normalize_to_C4(w)
    except NoC4Window as exc:
        raise PeriodicInput(str(exc)) from None
    x, y, z, ww = c4
    if x.is_zero() or rational_ratio(ww - z, x) is not None:
        raise PeriodicInput("orbit is periodic; it has no accumulation interval")
    return AccumulationPrediction(c4, smin(ww - x, -z), x, shift)


def containment_violations(w: Sequence[Scalar], lo: Scalar, hi: Scalar, n_terms: int) -> int:
    """Number of the first ``n_terms`` orbit terms outside ``[lo, hi]``, exactly."""
    bad = 0
    stream = terms(w)
    for _ in range(n_terms):
        v = next(stream)
        if v < lo or v > hi:
            bad += 1
    return bad


def max_gap(values: Sequence[float], dedup: float = 1e-12) -> float:
    """Largest gap between consecutive sorted values (closer than ``dedup`` merge)."""
    ordered = sorted(values)
    if len(ordered) < 2:
        return 0.0
    gap = 0.0
    prev = ordered[0]
    for v in ordered[1:]:
        if v - prev <= dedup:
            continue
        gap = max(gap, v - prev)
        prev = v
    return gap


def density_report(w: Sequence[Scalar], n_steps: int, epsilon: float = 1e-9) -> DensityReport:
    """Float statistics of ``n_steps`` terms of the C4-normalized orbit."""
    pred = predict_accumulation(w)
    lo, hi = pred.lo, pred.hi
    flo, fhi = to_float(lo, epsilon / 4), to_float(hi, epsilon / 4)
    floats = []
    violations = exact = 0
    stream = terms(pred.c4_tuple)
    for _ in range(n_steps):
        v = next(stream)
        f = to_float(v, epsilon / 4)
        if f < flo - epsilon or f > fhi + epsilon:
            violations += 1
        if v < lo or v > hi:
            exact += 1
        floats.append(f)
    inside = [f for f in floats if flo - epsilon <= f <= fhi + epsilon]
    distinct = len(set(round(f, 12) for f in inside))
    return DensityReport(n_steps, violations, max_gap(inside), (flo, fhi), epsilon, exact, distinct)


def _fast_forward_terms(t: Tuple4, case: Case) -> tuple[list[Scalar], Tuple4]:
    k = 10 if case is Case.C2 else 11
    out = []
    win = t
    for _ in range(k):
        win = step_forward(win)
        out.append(win[3])
    image, _ = case_fast_forward(t, case)
    if win != image:
        raise AssertionError(f"closed form of {case} disagrees with iteration")
    return out, win


def nonpositive_bounds(w: Sequence[Scalar], n_steps: int) -> NonPositiveReport:
    """Check every non-positive term against ``[min(-z, w - x), 0]``.

    Walks the orbit case by case from the C4 window, attributing each
    non-positive term to the case window that produced it.
    """
    c4 = tuple(w)
    if not satisfies(c4, Case.C4):
        raise NotNormalized("nonpositive_bounds needs a C4 window")
    x, y, z, ww = c4
    lo = smin(-z, ww - x)
    c1_lo, c3_lo = ww - x, -z
    common_vals = {ww - x, -z}
    all_in = c1_in = c3_in = True
    n_terms = nonpos = c1n = c3n = common = other = 0

    def visit(v: Scalar) -> bool:
        nonlocal all_in, nonpos
        if v.sign() > 0:
            return False
        nonpos += 1
        if v < lo:
            all_in = False
        return True

    for v in c4:
        if visit(v):
            common += 1
    n_terms = 4
    trace = trace_routes(c4, max_cases=n_steps // 10 + 2, stop_on_return=False)
    t = c4
    for case, _ in trace.cases:
        produced, nxt = _fast_forward_terms(t, case)
        x1, x2, x3, x4 = t
        if case is Case.C1:
            typed = {x2 - x1, x4 - x2}
        elif case is Case.C3:
            typed = {x4 - x3, x3 - x2 - x4}
        else:
            typed = set()
        for v in produced:
            if n_terms >= n_steps:
                break
            n_terms += 1
            if not visit(v):
                continue
            if v in typed:
                if case is Case.C1:
                    c1n += 1
                    if v < c1_lo or v.sign() > 0:
                        c1_in = False
                else:
                    c3n += 1
                    if v < c3_lo or v.sign() > 0:
                        c3_in = False
            elif v in common_vals:
                common += 1
            else:
                other += 1
        if n_terms >= n_steps:
            break
        t = nxt
    return NonPositiveReport(
        all_in_interval=all_in,
        c1_in=c1_in,
        c3_in=c3_in,
        interval=(lo, ZERO),
        c1_interval=(c1_lo, ZERO),
        c3_interval=(c3_lo, ZERO),
        n_terms=n_terms,
        nonpositive=nonpos,
        c1_count=c1n,
        c3_count=c3n,
        common=common,
        other=other,
    )


# -- Diophantine approximation -------------------------------------------------


def _floor_ratio(a: Scalar, b: Scalar) -> int:
    """Exact ``floor(a / b)`` for ``b > 0``, from a float guess and sign tests."""
    fa = to_float(a, 1e-30)
    fb = to_float(b, 1e-30)
    k = int(fa // fb) if fb else 0
    while (a - b * k).sign() < 0:
        k -= 1
    while (a - b * (k + 1)).sign() >= 0:
        k += 1
    return k


def continued_fraction(a: Scalar, b: Scalar, n_terms: int) -> list[int]:
    """Partial quotients of ``a / b`` (``b > 0``), each certified exactly.

    Runs the Euclidean algorithm on the pair ``(a, b)``; stops early when the
    ratio is rational and the expansion terminates.
    """
    if b.sign() <= 0:
        raise ValueError("continued_fraction needs a positive denominator")
    out = []
    for _ in range(n_terms):
        k = _floor_ratio(a, b)
        out.append(k)
        a, b = b, a - b * k
        if b.is_zero():
            break
    return out


def convergents(quotients: Sequence[int]) -> Iterator[tuple[int, int]]:
    h0, h1 = 1, quotients[0]
    k0, k1 = 0, 1
    yield h1, k1
    for a in quotients[1:]:
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield h1, k1


def nearby_periodic(c4: Sequence[Scalar], count: int, max_quotients: int = 200) -> list[PeriodicNeighbor]:
    """Periodic windows near a non-periodic C4 window, with growing periods.

    Each convergent ``m/n > 1`` of ``x / (w - z)`` gives the window
    ``((m/n)(w - z), y, z, w)``, which has period ``10p + 11q`` with
    ``p = n`` and ``q = m + n``.  Convergents whose window leaves the form
    ``y1 >= w`` are skipped.
    """
    x, y, z, ww = c4
    d = ww - z
    if not (satisfies(c4, Case.C4) and x > ww and d.sign() > 0):
        raise PreconditionViolated("need a C4 window with x > w and w - z > 0")
    if rational_ratio(d, x) is not None:
        raise PreconditionViolated("(w - z) / x is rational; the orbit is periodic")
    out: list[PeriodicNeighbor] = []
    quotients = continued_fraction(x, d, max_quotients)
    for m, n in convergents(quotients):
        if len(out) >= count:
            break
        if m <= n or gcd(m, n) != 1:
            continue
        head = d * Fraction(m, n)
        if head < ww:
            continue
        p, q = n, m + n
        out.append(PeriodicNeighbor((head, y, z, ww), p, q, 10 * p + 11 * q, (m, n), abs(head - x)))
    return out


# -- term decomposition --------------------------------------------------------


def _solve_pair(v: Scalar, a: Scalar, b: Scalar) -> tuple[Fraction, Fraction] | None:
    """Rationals ``(t, s)`` with ``v == t*a + s*b``; ``None`` if none exist."""
    va, aa, bb = v.terms, a.terms, b.terms
    rads = sorted(set(va) | set(aa) | set(bb))
    zero = Fraction(0)
    rows = [(aa.get(r, zero), bb.get(r, zero), va.get(r, zero)) for r in rads]
    pivot = None
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            det = rows[i][0] * rows[j][1] - rows[j][0] * rows[i][1]
            if det:
                pivot = (i, j, det)
                break
        if pivot:
            break
    if pivot is None:
        raise Degenerate("x and w - z are rationally dependent")
    i, j, det = pivot
    (a1, b1, c1), (a2, b2, c2) = rows[i], rows[j]
    t = (c1 * b2 - c2 * b1) / det
    s = (a1 * c2 - a2 * c1) / det
    if any(t * ar + s * br != cr for ar, br, cr in rows):
        return None
    return t, s


def decompose_term(value: Scalar, c4: Sequence[Scalar]) -> TermDecomposition | None:
    """Write ``value`` as ``t*x + y - s*(w - z)`` with non-negative integers."""
    x, y, z, ww = c4
    pair = _solve_pair(value - y, x, z - ww)
    if pair is None:
        return None
    t, s = pair
    if t.denominator != 1 or s.denominator != 1 or t < 0 or s < 0:
        return None
    return TermDecomposition(int(t), int(s))


# -- Kronecker density ---------------------------------------------------------


def kronecker_gaps(delta1: Scalar | int | Fraction, delta2: Scalar | int | Fraction, n_terms: int) -> float:
    """Largest cyclic gap among the fractional parts ``{s*delta1 + delta2}``, ``s = 1..n``."""
    if n_terms < 1:
        raise ValueError("n_terms must be at least 1")
    d1, d2 = Scalar(delta1), Scalar(delta2)
    v = d2
    fracs = []
    for _ in range(n_terms):
        v = v + d1
        f = v - v.floor()
        fracs.append(to_float(f, 1e-14))
    fracs.sort()
    distinct = [fracs[0]]
    for f in fracs[1:]:
        if f - distinct[-1] > 1e-12:
            distinct.append(f)
    gaps = [b - a for a, b in zip(distinct, distinct[1:])]
    gaps.append(1.0 - distinct[-1] + distinct[0])
    return max(gaps)

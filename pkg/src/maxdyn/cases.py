"""Case classification, whole-case fast-forwards and route decomposition.

A non-negative window whose first entry is the orbit maximum falls into one
of five cases.  Each case has a closed-form image after 10 or 11 steps::

    C1  x1 >= x2 >= x4 >= x3 >= 0                 -11-> (x1, x2+x3-x4, x3, x4)
    C2  x1 >= x3 >= max(x2, x4) >= 0, x3 >= x2+x4  -10-> (x1, x1-x3+x2+x4, x2, x3)
    C3  x1 >= x3 >= max(x2, x4) >= 0, x3 <= x2+x4  -11-> (x1, x2, x3, x2+x4-x3)
    C4  x1 >= x4 >= x2 >= x3 >= 0                 -11-> (x1, x3, x4+x3-x2, x4)
    C5  x1 >= x4 >= x3 >= x2 >= 0                 -11-> (x1, x2, x4, x2+x4-x3)

Starting from C4 the orbit walks the graph
``C4->C5, C5->{C2,C3}, C3->{C3,C2}, C2->{C1,C4}, C1->{C1,C4}``,
and each return to C4 closes one of four routes::

    R1  C4 C5 C2 C1^(m1+1) C4
    R2  C4 C5 C2 C4
    R3  C4 C5 C3^(m3+1) C2 C1^(m1+1) C4
    R4  C4 C5 C3^(m3+1) C2 C4
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .scalar import Scalar

__all__ = [
    "Case",
    "RouteId",
    "Route",
    "RouteTrace",
    "NotNormalized",
    "GraphViolation",
    "satisfies",
    "matching_cases",
    "classify",
    "classify_or_none",
    "case_fast_forward",
    "trace_routes",
    "SUCCESSORS",
    "CASE_STEPS",
]


class Case(str, Enum):
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    C5 = "C5"

    def __str__(self) -> str:
        return self.value


class RouteId(str, Enum):
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    R4 = "R4"
    DEGENERATE = "degenerate"

    def __str__(self) -> str:
        return self.value


class NotNormalized(ValueError):
    """Window has a negative entry or its first entry is not the largest."""


class GraphViolation(RuntimeError):
    """A case transition outside the admissible graph (indicates a bug)."""


CASE_STEPS = {Case.C1: 11, Case.C2: 10, Case.C3: 11, Case.C4: 11, Case.C5: 11}

# preferred successor first; ties on boundaries resolve towards closing a route
SUCCESSORS = {
    Case.C4: (Case.C5,),
    Case.C5: (Case.C2, Case.C3),
    Case.C3: (Case.C2, Case.C3),
    Case.C2: (Case.C4, Case.C1),
    Case.C1: (Case.C4, Case.C1),
}

# C4 first so that boundary windows such as (x, w, z, w) open a route
_PRIORITY = (Case.C4, Case.C1, Case.C2, Case.C3, Case.C5)


def _check_normalized(w: Sequence[Scalar]) -> None:
    x1, x2, x3, x4 = w
    if x2.sign() < 0 or x3.sign() < 0 or x4.sign() < 0:
        raise NotNormalized(f"negative entry in {_fmt(w)}")
    if x1 < x2 or x1 < x3 or x1 < x4:
        raise NotNormalized(f"first entry is not the maximum in {_fmt(w)}")


def _fmt(w: Sequence[Scalar]) -> str:
    return "(" + ", ".join(str(v) for v in w) + ")"


def satisfies(w: Sequence[Scalar], case: Case) -> bool:
    """Whether ``w`` meets the (non-strict) inequalities of ``case``."""
    x1, x2, x3, x4 = w
    if case is Case.C1:
        return x1 >= x2 >= x4 >= x3 and x3.sign() >= 0
    if case is Case.C4:
        return x1 >= x4 >= x2 >= x3 and x3.sign() >= 0
    if case is Case.C5:
        return x1 >= x4 >= x3 >= x2 and x2.sign() >= 0
    head = x1 >= x3 and x3 >= x2 and x3 >= x4 and x2.sign() >= 0 and x4.sign() >= 0
    if not head:
        return False
    if case is Case.C2:
        return x3 >= x2 + x4
    return x3 <= x2 + x4


def matching_cases(w: Sequence[Scalar]) -> list[Case]:
    return [c for c in Case if satisfies(w, c)]


def classify_or_none(w: Sequence[Scalar]) -> Case | None:
    for case in _PRIORITY:
        if satisfies(w, case):
            return case
    return None


def classify(w: Sequence[Scalar]) -> Case:
    """Case of a normalized window; boundary ties go C4, C1, C2, C3, C5."""
    _check_normalized(w)
    case = classify_or_none(w)
    if case is None:
        raise NotNormalized(f"{_fmt(w)} matches no case")
    return case


def case_fast_forward(w: Sequence[Scalar], case: Case | None = None) -> tuple[tuple, int]:
    """Closed-form image of ``w`` after one whole case, and its step count."""
    if case is None:
        case = classify(w)
    elif not satisfies(w, case):
        raise NotNormalized(f"{_fmt(w)} does not satisfy {case}")
    x1, x2, x3, x4 = w
    if case is Case.C1:
        image = (x1, x2 + x3 - x4, x3, x4)
    elif case is Case.C2:
        image = (x1, x1 - x3 + x2 + x4, x2, x3)
    elif case is Case.C3:
        image = (x1, x2, x3, x2 + x4 - x3)
    elif case is Case.C4:
        image = (x1, x3, x4 + x3 - x2, x4)
    else:
        image = (x1, x2, x4, x2 + x4 - x3)
    return image, CASE_STEPS[case]


@dataclass(frozen=True)
class Route:
    kind: RouteId
    m1: int
    m3: int
    steps: int
    start: tuple


@dataclass
class RouteTrace:
    """Cases visited from a C4 window, grouped into closed routes.

    ``c4_windows`` holds the C4 window opening each route plus the one
    closing the last complete route.  ``tail`` lists cases of an unfinished
    route when the horizon cut the trace short.
    """

    cases: list[tuple[Case, int]] = field(default_factory=list)
    routes: list[Route] = field(default_factory=list)
    c4_windows: list[tuple] = field(default_factory=list)
    tail: list[tuple[Case, int]] = field(default_factory=list)
    closed: bool = False
    final: tuple = ()

    @property
    def steps(self) -> int:
        return sum(k for _, k in self.cases)

    def case_string(self) -> str:
        return " ".join(str(c) for c, _ in self.cases)


def _route_of(segment: list[tuple[Case, int]], start: tuple) -> Route:
    names = [c for c, _ in segment]
    steps = sum(k for _, k in segment)
    if names[:2] != [Case.C4, Case.C5]:
        raise GraphViolation(f"route does not open with C4 C5: {names}")
    i = 2
    m3 = 0
    while i < len(names) and names[i] is Case.C3:
        i += 1
    n3 = i - 2
    if i >= len(names) or names[i] is not Case.C2:
        raise GraphViolation(f"route misses C2: {names}")
    i += 1
    n1 = len(names) - i
    if any(c is not Case.C1 for c in names[i:]):
        raise GraphViolation(f"unexpected cases after C2: {names}")
    m3 = max(n3 - 1, 0)
    m1 = max(n1 - 1, 0)
    if n3 == 0:
        kind = RouteId.R1 if n1 else RouteId.R2
    else:
        kind = RouteId.R3 if n1 else RouteId.R4
    return Route(kind, m1, m3, steps, start)


def _next_case(t: Sequence[Scalar], prev: Case) -> Case:
    _check_normalized(t)
    for case in SUCCESSORS[prev]:
        if satisfies(t, case):
            return case
    raise GraphViolation(
        f"{_fmt(t)} after {prev} satisfies {[str(c) for c in matching_cases(t)]}, "
        f"none of {[str(c) for c in SUCCESSORS[prev]]}"
    )


def trace_routes(
    c4: Sequence[Scalar],
    max_cases: int = 10_000,
    stop_on_return: bool = True,
    max_routes: int | None = None,
) -> RouteTrace:
    """Follow whole cases from a C4 window and segment them into routes.

    Stops after ``max_cases`` cases, after ``max_routes`` complete routes, or
    when the C4 start window recurs and ``stop_on_return`` is set.  A window that C4 maps to itself
    (constant-like orbits) yields one degenerate route.
    """
    start = tuple(c4)
    _check_normalized(start)
    if not satisfies(start, Case.C4):
        raise NotNormalized(f"{_fmt(start)} is not in C4")
    trace = RouteTrace(c4_windows=[start])
    t = start
    prev: Case | None = None
    segment: list[tuple[Case, int]] = []
    seg_start = start
    while len(trace.cases) < max_cases:
        case = Case.C4 if prev is None else _next_case(t, prev)
        if case is Case.C4 and segment:
            trace.routes.append(_route_of(segment, seg_start))
            trace.c4_windows.append(t)
            segment = []
            seg_start = t
            if stop_on_return and t == start:
                trace.closed = True
                break
            if max_routes is not None and len(trace.routes) >= max_routes:
                break
        image, k = case_fast_forward(t, case)
        trace.cases.append((case, k))
        if case is Case.C4 and image == t:
            trace.routes.append(Route(RouteId.DEGENERATE, 0, 0, k, t))
            trace.c4_windows.append(t)
            trace.closed = True
            break
        segment.append((case, k))
        t = image
        prev = case
    trace.tail = segment
    trace.final = t
    return trace

"""The recurrence ``x[n+4] = max(x[n+3], x[n+2], x[n+1], 0) - x[n]``.

A state is a window of four consecutive terms, held as a plain 4-tuple of
:class:`~maxdyn.scalar.Scalar`.  Stepping a window forward is the map
``F(x, y, z, w) = (y, z, w, max(0, y, z, w) - x)``; stepping backward uses
``x[n] = max(x[n+1], x[n+2], x[n+3], 0) - x[n+4]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Tuple

from .scalar import ZERO, Scalar, smax

__all__ = [
    "Tuple4",
    "OrbitSlice",
    "NormalizationError",
    "NoC4Window",
    "tuple4",
    "step_forward",
    "step_backward",
    "iterate",
    "orbit",
    "terms",
    "bound_M",
    "normalize_max_first",
    "normalize_to_C4",
    "equivalent",
    "C4_TRANSITION_CAP",
]

Tuple4 = Tuple[Scalar, Scalar, Scalar, Scalar]

#: Case transitions allowed in :func:`normalize_to_C4` before giving up.
C4_TRANSITION_CAP = 100_000


class NormalizationError(RuntimeError):
    """The finite-loop argument was violated while seeking a C4 window."""


class NoC4Window(NormalizationError):
    """The orbit cycled without meeting a C4 window.

    This happens for monotone-type orbits such as ``(4, 3, 2, 1)`` or
    ``(1, 1/2, 0, 0)``; ``period`` is the observed return time, so the orbit
    is periodic.
    """

    def __init__(self, period: int):
        super().__init__(f"orbit is periodic with period {period} and has no C4 window")
        self.period = period


def tuple4(*values: Scalar | int | Fraction | str) -> Tuple4:
    """Coerce four numbers or literals into a window."""
    if len(values) == 1 and not isinstance(values[0], (str, int, Fraction, Scalar)):
        values = tuple(values[0])
    if len(values) != 4:
        raise ValueError(f"a window needs 4 values, got {len(values)}")
    return tuple(v if isinstance(v, Scalar) else Scalar(v) for v in values)  # type: ignore[return-value]


@dataclass(frozen=True)
class OrbitSlice:
    """Consecutive orbit terms ``x[start_index], x[start_index+1], ...``."""

    start_index: int
    values: tuple[Scalar, ...]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, n: int) -> Scalar:
        """Term with orbit index ``n`` (not list position)."""
        return self.values[n - self.start_index]

    def windows(self) -> Iterator[Tuple4]:
        v = self.values
        for i in range(len(v) - 3):
            yield (v[i], v[i + 1], v[i + 2], v[i + 3])

    @property
    def last_window(self) -> Tuple4:
        return tuple(self.values[-4:])  # type: ignore[return-value]


def step_forward(w: Sequence[Scalar]) -> Tuple4:
    x1, x2, x3, x4 = w
    return (x2, x3, x4, smax(x2, x3, x4, ZERO) - x1)


def step_backward(w: Sequence[Scalar]) -> Tuple4:
    x1, x2, x3, x4 = w
    return (smax(x1, x2, x3, ZERO) - x4, x1, x2, x3)


def iterate(w: Sequence[Scalar], n: int, backward: bool = False) -> Tuple4:
    """Apply ``n`` steps and return the resulting window."""
    step = step_backward if backward else step_forward
    t = tuple(w)
    for _ in range(n):
        t = step(t)
    return t  # type: ignore[return-value]


def orbit(w: Sequence[Scalar], n: int, direction: str = "forward") -> OrbitSlice:
    """The ``n + 4`` terms covering ``n`` steps from ``w``.

    Forward orbits start at index 1 (``w`` is ``x1..x4``); backward orbits
    end at index 4 and start at ``1 - n``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    x1, x2, x3, x4 = w
    if direction == "forward":
        values = [x1, x2, x3, x4]
        for _ in range(n):
            a, b, c, d = values[-4:]
            values.append(smax(b, c, d, ZERO) - a)
        return OrbitSlice(1, tuple(values))
    if direction == "backward":
        rev = [x4, x3, x2, x1]
        for _ in range(n):
            d, c, b, a = rev[-4:]
            rev.append(smax(a, b, c, ZERO) - d)
        return OrbitSlice(1 - n, tuple(reversed(rev)))
    raise ValueError(f"direction must be 'forward' or 'backward', not {direction!r}")


def terms(w: Sequence[Scalar]) -> Iterator[Scalar]:
    """Endless stream ``x1, x2, ...`` of the forward orbit."""
    a, b, c, d = w
    yield a
    yield b
    yield c
    yield d
    while True:
        a, b, c, d = b, c, d, smax(b, c, d, ZERO) - a
        yield d


def bound_M(w: Sequence[Scalar]) -> Scalar:
    """``max(|x1|, ..., |x12|)``, which bounds every forward term."""
    values = orbit(w, 8).values
    return smax(*(abs(v) for v in values))


def normalize_max_first(w: Sequence[Scalar]) -> tuple[Tuple4, int]:
    """Window starting at the first term equal to :func:`bound_M`.

    Returns ``(window, shift)`` where the window is ``x[1+shift .. 4+shift]``.
    When ``M`` first shows up as ``-M`` the positive copy arrives four steps
    later, so the search runs over ``x1..x16``.
    """
    m = bound_M(w)
    values = orbit(w, 15).values
    for j in range(16):
        if values[j] == m:
            return tuple(values[j : j + 4]), j  # type: ignore[return-value]
    raise AssertionError("bound not attained by a non-negative term in x1..x16")


def normalize_to_C4(w: Sequence[Scalar], cap: int = C4_TRANSITION_CAP) -> tuple[Tuple4, int]:
    """Equivalent window satisfying Case C4, ``x1 >= x4 >= x2 >= x3 >= 0``.

    Starts from :func:`normalize_max_first` and fast-forwards a whole case at
    a time.  Returns ``(window, steps)`` with the window equal to the orbit
    window at index ``1 + steps`` of the input.
    """
    from .cases import Case, case_fast_forward, classify_or_none, satisfies

    t, steps = normalize_max_first(w)
    m = t[0]
    seen = {t: steps}
    for _ in range(cap):
        if satisfies(t, Case.C4):
            return t, steps
        case = classify_or_none(t)
        if case is None:
            # outside the case table: walk to the next case window headed by the maximum
            t = step_forward(t)
            steps += 1
            while t not in seen and (t[0] != m or classify_or_none(t) is None):
                t = step_forward(t)
                steps += 1
        else:
            t, k = case_fast_forward(t, case)
            steps += k
        if t in seen:
            raise NoC4Window(steps - seen[t])
        seen[t] = steps
    raise NormalizationError(f"no C4 window after {cap} case transitions")


def equivalent(a: Sequence[Scalar], b: Sequence[Scalar], horizon: int) -> bool:
    """Whether ``b`` is a window of ``a``'s orbit within ``horizon`` shifts.

    Sound but incomplete: ``False`` only means no match inside the horizon.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    from .invariants import v1, v2

    a, b = tuple(a), tuple(b)
    if v1(a) != v1(b) or v2(a) != v2(b):
        return False
    fwd = bwd = a
    if fwd == b:
        return True
    for _ in range(horizon):
        fwd = step_forward(fwd)
        bwd = step_backward(bwd)
        if fwd == b or bwd == b:
            return True
    return False

"""First integrals of the max recurrence and of the 4D Lyness map.

``v1`` and ``v2`` are exact on :class:`Scalar` windows and also accept plain
floats.  The ``*_batch`` helpers are numpy versions for large float sweeps.
The Lyness map ``L4(x, y, z, w) = (y, z, w, (a + y + z + w) / x)`` runs on
exact rationals (``gmpy2.mpq``) or floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import gmpy2
import numpy as np

from .core import step_forward
from .scalar import Scalar, ZERO, smax, to_float

__all__ = [
    "v1",
    "v2",
    "check_invariance",
    "step_forward_batch",
    "v1_batch",
    "v2_batch",
    "LynessState",
    "lyness_state",
    "lyness_step",
    "lyness_orbit",
    "lyness_h",
    "lyness_h_parts",
    "lyness_conserved",
    "tropical_limit_residual",
]


def _max(*values):
    if isinstance(values[0], Scalar):
        return smax(*values)
    return max(values)


def _zero_like(x):
    return ZERO if isinstance(x, Scalar) else 0.0


def v1(w: Sequence) -> Scalar | float:
    """``max(0,x,y,z,w) + max(0,-x) + max(0,-y) + max(0,-z) + max(0,-w)``."""
    x, y, z, ww = w
    o = _zero_like(x)
    return (
        _max(o, x, y, z, ww)
        + _max(o, -x)
        + _max(o, -y)
        + _max(o, -z)
        + _max(o, -ww)
    )


def v2(w: Sequence) -> Scalar | float:
    """``max(0,x,y,z,w,x+w) + max(0,x,y) + max(0,y,z) + max(0,z,w) - x - y - z - w``."""
    x, y, z, ww = w
    o = _zero_like(x)
    return (
        _max(o, x, y, z, ww, x + ww)
        + _max(o, x, y)
        + _max(o, y, z)
        + _max(o, z, ww)
        - x
        - y
        - z
        - ww
    )


def check_invariance(w: Sequence[Scalar], n_steps: int) -> bool:
    """True iff ``v1`` and ``v2`` stay exactly constant for ``n_steps`` steps."""
    t = tuple(w)
    a, b = v1(t), v2(t)
    for _ in range(n_steps):
        t = step_forward(t)
        if v1(t) != a or v2(t) != b:
            return False
    return True


def step_forward_batch(arr: np.ndarray) -> np.ndarray:
    """Float version of the map on an ``(N, 4)`` array of windows."""
    x, y, z, w = arr.T
    top = np.maximum(np.maximum(y, z), np.maximum(w, 0.0))
    return np.stack([y, z, w, top - x], axis=1)


def v1_batch(arr: np.ndarray) -> np.ndarray:
    x, y, z, w = arr.T
    head = np.max(np.stack([np.zeros_like(x), x, y, z, w]), axis=0)
    return head + np.maximum(0, -x) + np.maximum(0, -y) + np.maximum(0, -z) + np.maximum(0, -w)


def v2_batch(arr: np.ndarray) -> np.ndarray:
    x, y, z, w = arr.T
    zero = np.zeros_like(x)
    head = np.max(np.stack([zero, x, y, z, w, x + w]), axis=0)
    return (
        head
        + np.maximum(0, np.maximum(x, y))
        + np.maximum(0, np.maximum(y, z))
        + np.maximum(0, np.maximum(z, w))
        - x
        - y
        - z
        - w
    )


LynessNumber = Union[type(gmpy2.mpq()), float]


@dataclass(frozen=True)
class LynessState:
    """Window of the Lyness map together with its parameter ``a``."""

    x: LynessNumber
    y: LynessNumber
    z: LynessNumber
    w: LynessNumber
    a: LynessNumber

    @property
    def exact(self) -> bool:
        return not isinstance(self.x, float)

    @property
    def window(self) -> tuple:
        return (self.x, self.y, self.z, self.w)


def lyness_state(x, y, z, w, a=1, exact: bool = True) -> LynessState:
    """Build a state; exact mode converts ints, Fractions and strings to ``mpq``."""
    conv = _to_mpq if exact else float
    return LynessState(conv(x), conv(y), conv(z), conv(w), conv(a))


def _to_mpq(v) -> gmpy2.mpq:
    if isinstance(v, Fraction):
        return gmpy2.mpq(v.numerator, v.denominator)
    if isinstance(v, float):
        raise TypeError("exact Lyness states need rational input, not float")
    return gmpy2.mpq(v)


def lyness_step(s: LynessState) -> LynessState:
    if s.x == 0:
        raise ZeroDivisionError("Lyness step with x = 0")
    return LynessState(s.y, s.z, s.w, (s.a + s.y + s.z + s.w) / s.x, s.a)


def lyness_orbit(s: LynessState, n: int) -> list[LynessState]:
    out = [s]
    for _ in range(n):
        s = lyness_step(s)
        out.append(s)
    return out


def lyness_h(s: LynessState, which: int | str):
    """Evaluate ``H1`` or ``H2``; result has the state's numeric kind."""
    x, y, z, w, a = s.x, s.y, s.z, s.w, s.a
    den = x * y * z * w
    if den == 0:
        raise ZeroDivisionError("H is undefined when a coordinate is zero")
    which = str(which).upper().lstrip("H")
    if which == "1":
        return (a + x + y + z + w) * (x + 1) * (y + 1) * (z + 1) * (w + 1) / den
    if which == "2":
        return (a + x + y + z + w + x * w) * (1 + x + y) * (1 + y + z) * (1 + z + w) / den
    raise ValueError(f"unknown invariant {which!r}; use 1 or 2")


def lyness_h_parts(s: LynessState, which: int | str) -> tuple:
    """``H`` as an unreduced integer pair ``(numerator, denominator)``.

    Exact mode only.  Skipping the gcd reductions of :func:`lyness_h` makes
    equality tests on large-height orbits much cheaper.
    """
    if not s.exact:
        raise TypeError("lyness_h_parts needs an exact state")
    (X, Dx), (Y, Dy), (Z, Dz), (W, Dw), (A, Da) = (
        (v.numerator, v.denominator) for v in (s.x, s.y, s.z, s.w, s.a)
    )
    d = Dx * Dy * Dz * Dw  # common denominator of x, y, z, w
    xs, ys, zs, ws = X * Dy * Dz * Dw, Y * Dx * Dz * Dw, Z * Dx * Dy * Dw, W * Dx * Dy * Dz
    den = X * Y * Z * W
    if den == 0:
        raise ZeroDivisionError("H is undefined when a coordinate is zero")
    which = str(which).upper().lstrip("H")
    if which == "1":
        lead = A * d + Da * (xs + ys + zs + ws)
        num = lead * (X + Dx) * (Y + Dy) * (Z + Dz) * (W + Dw)
        return num, den * Da * d
    if which == "2":
        lead = A * d + Da * (xs + ys + zs + ws + X * W * Dy * Dz)
        f1 = X * Dy + Y * Dx + Dx * Dy
        f2 = Y * Dz + Z * Dy + Dy * Dz
        f3 = Z * Dw + W * Dz + Dz * Dw
        return lead * f1 * f2 * f3, den * Da * Dx * Dy * Dy * Dz * Dz * Dw
    raise ValueError(f"unknown invariant {which!r}; use 1 or 2")


def lyness_conserved(s: LynessState, n_steps: int, which=(1, 2)) -> bool:
    """True iff every requested ``H`` is exactly constant over ``n_steps`` steps."""
    refs = []
    for k in which:
        num, den = lyness_h_parts(s, k)
        refs.append((k, num, den))
    for _ in range(n_steps):
        s = lyness_step(s)
        for k, num, den in refs:
            n2, d2 = lyness_h_parts(s, k)
            if n2 * den != num * d2:
                return False
    return True


def _soft_excess(values: Sequence[float], eps: float) -> float:
    """``eps*log(sum(exp(v/eps))) - max(v)``, evaluated without overflow.

    ``log1p`` keeps the tiny excesses of small ``eps`` from rounding to zero.
    """
    top = max(values)
    rest = list(values)
    rest.remove(top)
    return eps * math.log1p(math.fsum(math.exp((v - top) / eps) for v in rest))


def tropical_limit_residual(w: Sequence, which: int, eps: float) -> float:
    """``|eps*ln H(exp(x/eps), ...; a=1) - V(x, ...)|`` for ``which`` in {1, 2}.

    With ``a = 1`` every factor of ``H`` is a sum of exponentials whose
    tropical limit is one of the max terms of ``V``; the residual is the sum
    of the per-factor log-sum-exp excesses over the plain maxima, which is
    how it is computed here.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    x, y, z, ww = (to_float(v, 1e-15) if isinstance(v, Scalar) else float(v) for v in w)
    # exp(0/eps) = 1 stands for the constant a = 1 and the literal 1s
    if which == 1:
        groups = [(0.0, x, y, z, ww), (0.0, x), (0.0, y), (0.0, z), (0.0, ww)]
    elif which == 2:
        groups = [(0.0, x, y, z, ww, x + ww), (0.0, x, y), (0.0, y, z), (0.0, z, ww)]
    else:
        raise ValueError(f"which must be 1 or 2, got {which!r}")
    for g in groups:
        for v in g:
            if not math.isfinite(v / eps):
                raise OverflowError(f"coordinate {v} too large for eps={eps}")
    return abs(math.fsum(_soft_excess(g, eps) for g in groups))

import math
from fractions import Fraction

import gmpy2
import numpy as np
import pytest
from hypothesis import given

import maxdyn.invariants as inv
from maxdyn.core import step_forward, tuple4
from maxdyn.invariants import (
    check_invariance,
    lyness_h,
    lyness_orbit,
    lyness_state,
    lyness_step,
    step_forward_batch,
    tropical_limit_residual,
    v1,
    v1_batch,
    v2,
    v2_batch,
)
from maxdyn.scalar import Scalar, to_float

from conftest import case_window, windows

S2 = Scalar.sqrt(2)


def test_v1_examples():
    assert v1(tuple4(1, 1, 1, 1)) == 1
    assert v1((2 * S2, Scalar(1), Scalar(0), Scalar(1))) == 2 * S2
    assert v1(tuple4(-1, 0, 0, 0)) == 1


def test_v2_examples():
    assert v2((2 * S2, Scalar(1), Scalar(0), Scalar(1))) == 2 * S2 + 1
    assert v2(tuple4(0, 0, 0, 0)) == 0
    assert v2(tuple4(1, 1, 1, 1)) == 1


def test_check_invariance_examples():
    assert check_invariance((Scalar(3), Scalar(1), S2, Scalar(2)), 10_000)
    assert check_invariance(tuple4(0, 0, 0, 0), 10)


def test_check_invariance_detects_a_perturbed_orbit(monkeypatch):
    calls = {"n": 0}

    def faulty(w):
        calls["n"] += 1
        out = step_forward(w)
        if calls["n"] == 50:
            out = out[:3] + (out[3] + Fraction(1, 7),)
        return out

    monkeypatch.setattr(inv, "step_forward", faulty)
    assert not check_invariance((Scalar(3), Scalar(1), S2, Scalar(2)), 100)


@given(windows())
def test_v1_v2_conserved_by_one_step(t):
    u = step_forward(t)
    assert v1(u) == v1(t)
    assert v2(u) == v2(t)


def test_identities_on_strict_C4(rng):
    n = 0
    while n < 200:
        x, y, z, w = case_window(rng, "C4")
        if not (x > w > y > z > 0):
            continue
        n += 1
        assert v1((x, y, z, w)) == x
        assert v2((x, y, z, w)) == x + w - z


def test_batch_functions_agree_with_exact(rng):
    from conftest import random_window

    ws = [random_window(rng) for _ in range(200)]
    arr = np.array([[to_float(v, 1e-15) for v in w] for w in ws])
    assert np.allclose(v1_batch(arr), [to_float(v1(w), 1e-15) for w in ws], atol=1e-12)
    assert np.allclose(v2_batch(arr), [to_float(v2(w), 1e-15) for w in ws], atol=1e-12)
    stepped = np.array([[to_float(v, 1e-15) for v in step_forward(w)] for w in ws])
    assert np.allclose(step_forward_batch(arr), stepped, atol=1e-12)


def test_float_inputs_supported():
    assert v1((1.0, -2.0, 0.5, 0.0)) == pytest.approx(3.0)
    assert v2((0.0, 0.0, 0.0, 0.0)) == 0.0


# -- Lyness -----------------------------------------------------------------


def test_lyness_step_examples():
    assert lyness_step(lyness_state(1, 1, 1, 1, a=1)).window == (1, 1, 1, 4)
    assert lyness_step(lyness_state(1, 1, 1, 1, a=0)).window == (1, 1, 1, 3)
    s = lyness_state(2, 1, 1, 1, a=1)
    h = lyness_h(s, "H1")
    assert all(lyness_h(t, 1) == h for t in lyness_orbit(s, 5))


def test_lyness_h_examples():
    s = lyness_state(1, 1, 1, 1, a=1)
    assert lyness_h(s, "H1") == 80
    assert lyness_h(s, 2) == 162
    with pytest.raises(ValueError):
        lyness_h(s, 3)


def test_lyness_exact_and_float_modes():
    s = lyness_state(Fraction(1, 2), 3, "2/3", 1, a=2)
    assert s.exact and isinstance(s.x, type(gmpy2.mpq()))
    f = lyness_state(0.5, 3, 2 / 3, 1, a=2, exact=False)
    assert not f.exact
    for a, b in zip(lyness_orbit(s, 20), lyness_orbit(f, 20)):
        assert float(a.w) == pytest.approx(b.w, rel=1e-9)
    with pytest.raises(TypeError):
        lyness_state(0.5, 1, 1, 1)


def test_lyness_conservation_short():
    for a in (0, 1, 2):
        s = lyness_state(Fraction(3, 2), 2, Fraction(1, 3), 5, a=a)
        h1, h2 = lyness_h(s, 1), lyness_h(s, 2)
        for t in lyness_orbit(s, 60):
            assert lyness_h(t, 1) == h1 and lyness_h(t, 2) == h2


def test_lyness_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        lyness_step(lyness_state(0, 1, 1, 1))
    with pytest.raises(ZeroDivisionError):
        lyness_h(lyness_state(1, 0, 1, 1), 1)


# -- tropical limit ---------------------------------------------------------


def test_tropical_residual_examples(rng):
    w = (1.0, 1.0, 1.0, 1.0)
    assert tropical_limit_residual(w, 1, 0.01) < tropical_limit_residual(w, 1, 0.1)
    for eps in (0.1, 0.01, 0.001):
        assert tropical_limit_residual((0.0,) * 4, 1, eps) == pytest.approx(eps * math.log(80))
    for _ in range(20):
        t = tuple(rng.uniform(-2, 2) for _ in range(4))
        assert tropical_limit_residual(t, 2, 1e-3) < 0.05


def test_tropical_residual_matches_direct_formula():
    # moderate eps, where exp() does not overflow
    x, y, z, w = 0.3, -0.7, 1.1, 0.2
    eps = 0.5
    X, Y, Z, W = (math.exp(v / eps) for v in (x, y, z, w))
    h2 = (1 + X + Y + Z + W + X * W) * (1 + X + Y) * (1 + Y + Z) * (1 + Z + W) / (X * Y * Z * W)
    direct = abs(eps * math.log(h2) - v2((x, y, z, w)))
    assert tropical_limit_residual((x, y, z, w), 2, eps) == pytest.approx(direct, rel=1e-12)
    h1 = (1 + X + Y + Z + W) * (1 + X) * (1 + Y) * (1 + Z) * (1 + W) / (X * Y * Z * W)
    assert tropical_limit_residual((x, y, z, w), 1, eps) == pytest.approx(abs(eps * math.log(h1) - v1((x, y, z, w))), rel=1e-12)


def test_tropical_residual_errors():
    with pytest.raises(ValueError):
        tropical_limit_residual((0.0,) * 4, 1, 0.0)
    with pytest.raises(ValueError):
        tropical_limit_residual((0.0,) * 4, 3, 0.1)
    with pytest.raises(OverflowError):
        tropical_limit_residual((1e300, 0.0, 0.0, 0.0), 1, 1e-10)


def test_lyness_h_parts_match_reduced_values(rng):
    for _ in range(200):
        v = [Fraction(rng.choice([-1, 1]) * rng.randint(1, 50), rng.randint(1, 9)) for _ in range(5)]
        s = lyness_state(*v[:4], a=v[4])
        for k in (1, 2):
            num, den = inv.lyness_h_parts(s, k)
            assert Fraction(int(num), int(den)) == lyness_h(s, k)


def test_lyness_conserved_detects_wrong_parameter():
    s = lyness_state(1, 2, 3, 4, a=1)
    assert inv.lyness_conserved(s, 100)
    # stepping with a different a than the one H is evaluated at breaks conservation
    wrong = inv.LynessState(s.x, s.y, s.z, s.w, s.a)
    stepped = lyness_step(inv.LynessState(s.x, s.y, s.z, s.w, s.a + 1))
    assert lyness_h(inv.LynessState(*stepped.window, s.a), 1) != lyness_h(wrong, 1)

import random
from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from maxdyn.scalar import Scalar

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

RADICANDS = (1, 2, 3, 5, 6, 7)


def rationals(max_num=50, max_den=12):
    return st.builds(Fraction, st.integers(-max_num, max_num), st.integers(1, max_den))


def scalars(max_terms=3):
    return st.dictionaries(st.sampled_from(RADICANDS), rationals(), max_size=max_terms).map(Scalar.from_terms)


def windows(elements=None):
    elements = elements or scalars(2)
    return st.tuples(elements, elements, elements, elements)


def random_rational(rng: random.Random, lo=-20, hi=20, den=10) -> Fraction:
    d = rng.randint(1, den)
    return Fraction(rng.randint(lo * d, hi * d), d)


def random_window(rng: random.Random, radical_prob=0.3):
    out = []
    for _ in range(4):
        v = Scalar(random_rational(rng))
        if rng.random() < radical_prob:
            v = v + Scalar.sqrt(rng.choice((2, 3, 5))).scale(random_rational(rng, -3, 3, 4))
        out.append(v)
    return tuple(out)


@pytest.fixture
def rng():
    return random.Random(20240611)


def case_window(rng: random.Random, case: str):
    """Random rational window satisfying the inequalities of ``case``."""

    def nonneg(hi=20):
        return random_rational(rng, 0, hi, 12)

    if case in ("C1", "C4", "C5"):
        a, b, c, d = sorted((nonneg() for _ in range(4)), reverse=True)
        order = {"C1": (a, b, d, c), "C4": (a, c, d, b), "C5": (a, d, c, b)}[case]
        return tuple(Scalar(v) for v in order)
    x3 = nonneg()
    if case == "C2":
        x2 = x3 * Fraction(rng.randint(0, 100), 100)
        x4 = (x3 - x2) * Fraction(rng.randint(0, 100), 100)
    else:
        x2 = x3 * Fraction(rng.randint(0, 100), 100)
        x4 = x3 - x2 + x2 * Fraction(rng.randint(0, 100), 100)
    if rng.random() < 0.5:
        x2, x4 = x4, x2
    x1 = x3 + nonneg(5)
    return tuple(Scalar(v) for v in (x1, x2, x3, x4))


def period_window(rng: random.Random, p: int, q: int):
    """Window ``(((q-p)/p) d, y2, y3, y3 + d)`` in C4 form, expected period ``10p + 11q``."""
    d = Fraction(rng.randint(1, 40), rng.randint(1, 7))
    room = Fraction(q - 2 * p, p) * d  # y1 - y4 when y3 = 0
    y3 = 0 if rng.random() < 0.3 else room * Fraction(rng.randint(0, 99), 100)
    y4 = y3 + d
    y2 = y3 + d * Fraction(rng.randint(0, 100), 100)
    return tuple(Scalar(v) for v in (Fraction(q - p, p) * d, y2, y3, y4))


# -- acceptance bookkeeping ------------------------------------------------

ACCEPTANCE_RESULTS: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[n])

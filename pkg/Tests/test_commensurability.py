# Tests/test_commensurability.py
import math, sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "wavepacket"))

from commensurability import (classical_beat, convergents, cross_ratios, enumerate_fractimes,  # noqa: E402
                              fractime_at, full_revival, rationalize, revival_triple)
from models import Box2D, Lattice, StarkHydrogen, TimeScales, derivatives, exact_trev_ratio, stark_lattice, timescales  # noqa: E402

PI = math.pi


def scenario(L1_sq, L2_sq):
    m, lat = Box2D.from_squares(L1_sq, L2_sq), Lattice(18, 18)
    ts = timescales(derivatives(m, lat), lat)
    return ts, revival_triple(ts, exact_f2=exact_trev_ratio(m, lat))


def test_convergents_of_pi():
    cs = [c for _, c in zip(range(4), convergents(PI))]
    assert cs == [Fraction(3), Fraction(22, 7), Fraction(333, 106), Fraction(355, 113)]


@pytest.mark.parametrize("x,expected", [(0.75, Fraction(3, 4)), (-0.75, Fraction(-3, 4)),
                                        (4 / 3, Fraction(4, 3)), (0.0, Fraction(0)), (7.0, Fraction(7))])
def test_rationalize(x, expected):
    assert rationalize(x) == expected


def test_rationalize_incommensurate():
    assert rationalize(PI) is None
    assert rationalize(math.sqrt(2), max_den=1000, tol=1e-12) is None


@pytest.mark.parametrize("bad", [dict(x=math.nan), dict(x=1.0, max_den=0), dict(x=1.0, tol=-1.0)])
def test_rationalize_rejects(bad):
    with pytest.raises(ValueError):
        rationalize(**bad)


def test_classical_beat_figure1():
    ts, _ = scenario(Fraction(3, 4), 1)
    beat = classical_beat(ts.Tcl1, ts.Tcl2)
    assert (beat.a, beat.b) == (3, 4)
    assert beat.Tcl == pytest.approx(1 / (12 * PI), rel=1e-13)
    assert classical_beat(None, ts.Tcl2) is None


def test_triple_and_full_revival_figure1():
    _, tri = scenario(Fraction(3, 4), 1)
    assert (tri.f1, tri.f2, tri.f12) == (Fraction(1), Fraction(4, 3), None)
    assert tri.exact and tri.base == "trev1"
    assert tri.ratio("trev1", "trev2") == Fraction(3, 4)
    assert full_revival(tri) == 4
    assert float(full_revival(tri)) * tri.base_time == pytest.approx(3 / PI, rel=1e-14)


def test_triple_and_full_revival_figure2():
    _, tri = scenario(1, 3)
    assert tri.f2 == 3
    assert float(full_revival(tri)) * tri.base_time == pytest.approx(3 / PI, rel=1e-14)


def test_triple_without_exact_squares():
    m, lat = Box2D(math.sqrt(0.75), 1.0), Lattice(18, 18)
    tri = revival_triple(timescales(derivatives(m, lat), lat))
    assert tri.f2 == Fraction(4, 3) and not tri.exact


def test_triple_stark_uses_cross_time():
    # trev12 / |trev1| = 1 / (n^4 F) = 2
    lat = stark_lattice(50, 1)
    ts = timescales(derivatives(StarkHydrogen(8e-8), lat), lat)
    tri = revival_triple(ts)
    assert tri.base == "trev1"
    assert tri.f1 == -1 and tri.f2 is None and tri.f12 == 2
    assert full_revival(tri) == 2


def test_triple_incommensurate():
    ts = TimeScales(1.0, 1.0, 1.0, math.sqrt(2), None)
    assert revival_triple(ts) is None
    assert revival_triple(TimeScales(1.0, 1.0, None, None, None)) is None


def test_enumerate_figure2():
    ts, tri = scenario(1, 3)
    pts = enumerate_fractimes(tri, ts, qmax=12)
    xs = [p.x for p in pts]
    assert xs == sorted(xs)
    for x in (Fraction(1, 2), Fraction(3, 4), Fraction(3, 2), Fraction(9, 4), Fraction(3)):
        assert x in xs
    assert xs[-1] == 3
    assert all(p.check(tri) for p in pts)
    assert all(p.p1q1.denominator <= 12 and p.p2q2.denominator <= 12 for p in pts)
    last = pts[-1]
    assert last.p1q1.denominator == 1 and last.p2q2.denominator == 1


def test_enumerate_respects_tmax_and_qmax():
    ts, tri = scenario(Fraction(3, 4), 1)
    pts = enumerate_fractimes(tri, ts, qmax=2, tmax=2 * tri.base_time)
    # t/trev2 = 3x/4 keeps a denominator <= 2 only at x = 2
    assert [p.x for p in pts] == [Fraction(2)]
    with pytest.raises(ValueError):
        enumerate_fractimes(tri, ts, qmax=0)


def test_fractime_fractions_figure1():
    _, tri = scenario(Fraction(3, 4), 1)
    pt = fractime_at(tri, Fraction(1))
    assert (pt.p1q1, pt.p2q2, pt.p12q12) == (Fraction(1), Fraction(3, 4), None)
    assert pt.check(tri)
    assert cross_ratios(pt) is None


def test_cross_ratios():
    lat = stark_lattice(50, 1)
    ts = timescales(derivatives(StarkHydrogen(8e-8), lat), lat)
    tri = revival_triple(ts)
    pt = fractime_at(tri, Fraction(1, 2))
    assert pt.p1q1 == Fraction(-1, 2) and pt.p12q12 == Fraction(1, 4)
    r1, r2 = cross_ratios(pt)
    assert r1 == Fraction(-1, 2) and r2 is None


def test_rationalize_spec_cases():
    assert rationalize(0.75, max_den=10, tol=1e-9) == Fraction(3, 4)
    assert rationalize(math.sqrt(2), max_den=100, tol=1e-9) is None
    assert rationalize(1 / 3 + 1e-12, max_den=10, tol=1e-9) == Fraction(1, 3)
    for q in range(1, 20):
        for p in range(0, 2 * q):
            assert rationalize(p / q, max_den=q) == Fraction(p, q)


def test_classical_beat_equal_and_irrational():
    for T in (1.0, 0.37, 12.5):
        beat = classical_beat(T, T)
        assert (beat.a, beat.b) == (1, 1) and beat.Tcl == pytest.approx(T)
    assert classical_beat(1.0, math.sqrt(2)) is None


def test_triple_irrational_revivals():
    assert revival_triple(TimeScales(1.0, 1.0, 1.0, math.sqrt(3), None)) is None


def test_enumerate_figure1_small_q():
    ts, tri = scenario(Fraction(3, 4), 1)
    pts = {p.x: p for p in enumerate_fractimes(tri, ts, qmax=4, tmax=3 / PI)}
    one = pts[Fraction(1)]
    assert one.t == pytest.approx(3 / (4 * PI)) and (one.p1q1, one.p2q2) == (Fraction(1), Fraction(3, 4))
    full = pts[Fraction(4)]
    assert full.t == pytest.approx(3 / PI) and (full.p1q1, full.p2q2) == (Fraction(4), Fraction(3))


def test_cross_ratio_examples():
    from commensurability import FracTime
    pt = FracTime(t=1.0, x=Fraction(1), p1q1=Fraction(1, 2), p2q2=None, p12q12=Fraction(1, 2))
    assert cross_ratios(pt) == (Fraction(1), None)
    pt = FracTime(t=1.0, x=Fraction(1), p1q1=Fraction(1, 3), p2q2=None, p12q12=Fraction(1, 6))
    assert cross_ratios(pt)[0] == Fraction(1, 2)

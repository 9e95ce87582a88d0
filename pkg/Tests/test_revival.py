# Tests/test_revival.py
import math, sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "wavepacket"))

from commensurability import enumerate_fractimes, fractime_at, full_revival, revival_triple  # noqa: E402
from models import (Box2D, Lattice, ModelFamily, StarkHydrogen, derivatives, exact_trev_ratio,  # noqa: E402
                    stark_lattice, timescales)
from packet import PacketSpec, autocorrelation, build_coefficients, classical_overlap, phase_provider  # noqa: E402
from revival import (ThetaSpec, TuneTarget, classify, coefficients_1d, cross_term_catalog,  # noqa: E402
                     expansion_coefficients, is_cyclic, minimal_periods, point_from_spec, point_report,
                     predict_autocorrelation, revival_point, theta, tune_parameter, verify_expansion,
                     verify_point)

F = Fraction
PI = math.pi


def box_scenario(L1_sq, L2_sq):
    m, lat = Box2D.from_squares(L1_sq, L2_sq), Lattice(18, 18)
    ds = derivatives(m, lat)
    ts = timescales(ds, lat)
    tri = revival_triple(ts, exact_f2=exact_trev_ratio(m, lat))
    return m, lat, ds, ts, tri


@pytest.fixture(scope="module")
def fig1():
    return box_scenario(F(3, 4), 1)


@pytest.fixture(scope="module")
def fig2():
    return box_scenario(1, 3)


def point_at(scn, x):
    *_, tri = scn
    return revival_point(fractime_at(tri, F(x)))


def reduced(qmax):
    return [F(p, q) for q in range(1, qmax + 1) for p in range(q) if math.gcd(p, q) == 1]


def oracle_period(spec, axis, bound):
    # smallest l with theta(k + l e_axis) == theta(k) on a box of residues
    for l in range(1, bound + 1):
        ok = True
        for k1 in range(bound + 2):
            for k2 in range(bound + 2):
                s1, s2 = (k1 + l, k2) if axis == 0 else (k1, k2 + l)
                if theta(spec, s1, s2) != theta(spec, k1, k2):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return l
    return None


# ---------- theta + periods ----------
def test_theta_values():
    assert theta(ThetaSpec(F(1), F(3, 4)), 0, 0) == 0
    assert theta(ThetaSpec(F(1), F(3, 4)), 1, 1) == F(3, 4)
    assert theta(ThetaSpec(F(1, 2)), 2, 5) == 0
    assert theta(ThetaSpec(F(1, 3), F(0), F(1, 2)), 1, 1) == F(5, 6)


@pytest.mark.parametrize("spec,expected", [(ThetaSpec(F(1), F(3, 4)), (1, 2)),
                                           (ThetaSpec(F(1, 2), F(1, 2)), (2, 2)),
                                           (ThetaSpec(F(0), F(0)), (1, 1)),
                                           (ThetaSpec(F(0), F(0), F(1, 2)), (2, 2))])
def test_minimal_periods_examples(spec, expected):
    assert minimal_periods(spec) == expected
    assert is_cyclic(spec, *expected)


def test_is_cyclic_rejects_short_period():
    assert not is_cyclic(ThetaSpec(F(1, 2)), 1, 1)
    assert is_cyclic(ThetaSpec(F(1, 2)), 4, 1)


def test_minimal_periods_match_exhaustive_scan():
    specs = cross_term_catalog() + [ThetaSpec(a, b) for a in reduced(12)[::3] for b in reduced(12)[::5]]
    for spec in specs:
        l1, l2 = minimal_periods(spec)
        assert is_cyclic(spec, l1, l2)
        assert oracle_period(spec, 0, l1) == l1
        assert oracle_period(spec, 1, l2) == l2


# ---------- coefficients ----------
def test_full_revival_coefficients():
    a = expansion_coefficients(ThetaSpec(F(2), F(5)), 1, 1)
    assert a.shape == (1, 1) and abs(a[0, 0] - 1) <= 1e-15


def test_half_revival_is_one_shifted_packet():
    a = coefficients_1d(F(1, 2), 2)
    assert abs(a[0]) <= 1e-15 and abs(a[1] - 1) <= 1e-15


def test_figure1_trev1_has_two_equal_waves():
    spec = ThetaSpec(F(1), F(3, 4))
    a = expansion_coefficients(spec, 1, 2)
    assert np.allclose(np.abs(a) ** 2, 0.5, atol=1e-14)


def test_verify_expansion_detects_tampering(fig2):
    pt = point_at(fig2, F(3, 4))
    assert verify_expansion(pt) <= 1e-12
    bad = np.array(pt.coeffs)
    bad[0, 0] += 0.1
    assert verify_expansion(pt, bad) >= 0.1 - 1e-9


@pytest.mark.parametrize("which", ["fig1", "fig2"])
def test_every_figure_point_passes_self_checks(which, request):
    scn = request.getfixturevalue(which)
    m, lat, ds, ts, tri = scn
    pts = [revival_point(f) for f in enumerate_fractimes(tri, ts, qmax=12)]
    assert len(pts) > 10
    for pt in pts:
        res = verify_point(pt)
        assert res.ok, res.meta
        assert res.meta["residual"] <= 1e-12
        assert pt.l1 <= pt.frac.p1q1.denominator and pt.l2 <= pt.frac.p2q2.denominator


def test_cross_term_catalog_passes_self_checks():
    specs = cross_term_catalog()
    assert len(specs) >= 20 and all(s.p12q12 is not None for s in specs)
    for s in specs:
        pt = point_from_spec(s)
        res = verify_point(pt)
        assert res.ok and res.reason == "CHECK_OK", res.meta
        assert abs(float(np.sum(np.abs(pt.coeffs) ** 2)) - 1.0) <= 1e-12


# ---------- separability ----------
def test_no_cross_term_factorizes():
    firsts = reduced(12)
    seconds = reduced(12)[::4]
    for p1 in firsts:
        l1 = minimal_periods(ThetaSpec(p1))[0]
        a1 = coefficients_1d(p1, l1)
        n1 = int(np.sum(np.abs(a1) > 1e-10))
        q1 = p1.denominator
        assert n1 == (q1 if q1 % 2 else q1 // 2)
        nz1 = np.abs(a1)[np.abs(a1) > 1e-10]
        assert float(nz1.max() - nz1.min()) <= 1e-12
        for p2 in seconds:
            pt = point_from_spec(ThetaSpec(p1, p2))
            a2 = coefficients_1d(p2, pt.l2)
            assert pt.l1 == l1
            assert float(np.max(np.abs(pt.coeffs - np.outer(a1, a2)))) <= 1e-12
            c = classify(pt)
            assert c.separable and c.equal_norm
            assert c.n_waves == n1 * int(np.sum(np.abs(a2) > 1e-10))


@pytest.mark.parametrize("spec,expected", [
    (ThetaSpec(F(0), F(0), F(1, 2)), [[0.5, 0.5], [0.5, -0.5]]),
    (ThetaSpec(F(1, 4), F(0), F(1, 2)), [[0.5, -0.5j], [0.5, 0.5j]]),
    (ThetaSpec(F(1, 2), F(0), F(1, 2)), [[0.5, -0.5], [0.5, 0.5]]),
])
def test_cross_term_can_entangle_the_waves(spec, expected):
    pt = point_from_spec(spec)
    assert (pt.l1, pt.l2) == (2, 2)
    assert float(np.max(np.abs(pt.coeffs - np.array(expected)))) <= 1e-14
    c = classify(pt)
    assert not c.separable and c.equal_norm and c.n_waves == 4


def test_cross_term_two_diagonal_waves():
    pt = point_from_spec(ThetaSpec(F(1, 4), F(1, 4), F(1, 2)))
    expected = np.array([[(2 - 2j) / 4, 0], [0, (2 + 2j) / 4]])
    assert float(np.max(np.abs(pt.coeffs - expected))) <= 1e-14
    c = classify(pt)
    assert c.n_waves == 2 and not c.separable


def test_cross_term_catalog_norms():
    # nonzero coefficient magnitudes stay equal on each catalog point
    results = [classify(point_from_spec(s)) for s in cross_term_catalog()]
    assert all(r.equal_norm for r in results)
    assert any(not r.separable for r in results)


# ---------- figure classifications ----------
@pytest.mark.parametrize("x", [F(1, 2), F(1), F(2), F(5, 2)])
def test_figure2_three_waves(fig2, x):
    assert classify(point_at(fig2, x)).n_waves == 3


@pytest.mark.parametrize("x", [F(3, 4), F(9, 4)])
def test_figure2_four_waves(fig2, x):
    pt = point_at(fig2, x)
    assert classify(pt).n_waves == 4
    assert pt.frac.t == pytest.approx(float(x) / PI)


def test_figure2_three_halves_is_out_of_phase(fig2):
    m, lat, ds, ts, tri = fig2
    pt = point_at(fig2, F(3, 2))
    c = classify(pt, ts)
    assert c.n_waves == 1
    (w,) = c.waves
    assert w.shift1 == pytest.approx(ts.Tcl1 / 2) and w.shift2 == pytest.approx(ts.Tcl2 / 2)
    grid = build_coefficients(PacketSpec(lat))
    assert abs(predict_autocorrelation(pt, grid, ts, pt.frac.t)) ** 2 < 0.9


def test_prediction_matches_direct_figure1(fig1):
    m, lat, ds, ts, tri = fig1
    grid = build_coefficients(PacketSpec(lat))
    prov = phase_provider(grid, m, ds, ts, lat, "exact")
    for x, lo, hi in ((F(1), 0.45, 0.55), (F(3), 0.45, 0.55), (F(2), 0.0, 0.02)):
        pt = point_at(fig1, x)
        pred = predict_autocorrelation(pt, grid, ts, pt.frac.t)
        direct = autocorrelation(grid, prov, pt.frac.t)
        assert abs(pred - direct) <= 1e-9
        assert lo <= abs(pred) ** 2 <= hi


def test_full_revival_prediction(fig1):
    m, lat, ds, ts, tri = fig1
    grid = build_coefficients(PacketSpec(lat))
    pt = point_at(fig1, full_revival(tri))
    assert pt.frac.t == pytest.approx(3 / PI)
    pred = predict_autocorrelation(pt, grid, ts, pt.frac.t)
    assert abs(pred - classical_overlap(grid, ts, pt.frac.t, pt.frac.t)) <= 1e-12
    assert abs(abs(pred) ** 2 - 1.0) <= 1e-9
    zero = point_from_spec(ThetaSpec(F(0), F(0)))
    assert abs(predict_autocorrelation(zero, grid, ts, 0.0) - 1.0) <= 1e-14


def test_point_report_shape(fig2):
    *_, ts, _ = fig2
    rep = point_report(point_at(fig2, F(3, 4)), ts)
    assert set(rep) >= {"t", "fractions", "l1", "l2", "n_waves", "equal_norm", "separable",
                        "residual", "coefficients"}
    assert len(rep["coefficients"]) == rep["l1"] and len(rep["coefficients"][0]) == rep["l2"]
    assert all(len(pair) == 2 for row in rep["coefficients"] for pair in row)


# ---------- tuning ----------
def test_tune_box_ratio():
    fam = ModelFamily(Box2D(1.0, 1.0), "L1")
    res = tune_parameter(fam, Lattice(18, 18), (0.5, 1.5), TuneTarget("trev1", "trev2", 0.75))
    assert len(res) == 1
    assert res[0].param == pytest.approx(math.sqrt(3) / 2, abs=1e-6)
    assert res[0].triple is not None and res[0].triple.f2 == F(4, 3)
    assert res[0].spectrum > 0


def test_tune_symmetric_box():
    fam = ModelFamily(Box2D(1.0, 1.0), "L1")
    res = tune_parameter(fam, Lattice(18, 18), (0.5, 1.5), TuneTarget("trev1", "trev2", 1.0))
    assert [r.param for r in res] == [pytest.approx(1.0, abs=1e-9)]


def test_tune_stark_cross_time():
    lat = stark_lattice(30, 1, single_parity=False)
    F_true = 1e-7
    target = 2 * PI / (3 * F_true)
    res = tune_parameter(ModelFamily(StarkHydrogen(2e-7), "F"), lat, (5e-8, 5e-7),
                         TuneTarget("trev12", None, target))
    assert len(res) == 1
    assert res[0].param == pytest.approx(F_true, rel=1e-6)


def test_tune_unreachable_is_empty():
    fam = ModelFamily(Box2D(1.0, 1.0), "L1")
    assert tune_parameter(fam, Lattice(18, 18), (0.5, 1.5), TuneTarget("trev1", "trev2", 10.0)) == []


def test_tune_target_validation():
    with pytest.raises(ValueError):
        TuneTarget("trev3", None, 1.0)
    with pytest.raises(ValueError):
        TuneTarget("trev1", "trev2", 0.0)

# revival.py
# Fractional-revival machinery at a time t_frac: the second-order phase theta,
# its minimal cyclic periods (l1, l2), the expansion coefficients a[s1, s2] of
# Psi over shifted classical waves, self-checks of the expansion, a
# classification of the subsidiary waves, and one-parameter tuning.

from __future__ import annotations
import itertools, math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from commensurability import (DEFAULT_MAX_DEN, DEFAULT_QMAX, DEFAULT_TOL, CommensurateTriple, FracTime,
                              cross_ratios, enumerate_fractimes, full_revival, revival_triple)
from models import Lattice, ModelFamily, TimeScales, derivatives, exact_trev_ratio, timescales
from packet import CoefficientGrid, classical_overlap

ZERO_COEFF = 1e-10
TIME_NAMES = ("Tcl1", "Tcl2", "trev1", "trev2", "trev12")


# ---------- theta ----------
@dataclass(frozen=True)
class ThetaSpec:
    """theta(k1, k2) = p1/q1 k1^2 + p2/q2 k2^2 + p12/q12 k1 k2 (mod 1)."""
    p1q1: Fraction
    p2q2: Fraction = Fraction(0)
    p12q12: Optional[Fraction] = None

    @classmethod
    def from_fractime(cls, frac: FracTime) -> "ThetaSpec":
        return cls(p1q1=frac.p1q1 if frac.p1q1 is not None else Fraction(0),
                   p2q2=frac.p2q2 if frac.p2q2 is not None else Fraction(0),
                   p12q12=frac.p12q12)

    @property
    def cross(self) -> Fraction:
        return self.p12q12 if self.p12q12 is not None else Fraction(0)

    def label(self) -> str:
        parts = [f"{self.p1q1}", f"{self.p2q2}"]
        if self.p12q12 is not None:
            parts.append(f"{self.p12q12}")
        return "(" + ", ".join(parts) + ")"


def theta(spec: ThetaSpec, k1: int, k2: int) -> Fraction:
    return (spec.p1q1 * k1 * k1 + spec.p2q2 * k2 * k2 + spec.cross * k1 * k2) % 1


def _shift_ok(spec: ThetaSpec, axis: int, l: int) -> bool:
    # theta(k + l e_axis) - theta(k) is affine in (k1, k2): integral everywhere
    # iff integral at (0,0), (1,0), (0,1)
    for k1, k2 in ((0, 0), (1, 0), (0, 1)):
        s1, s2 = (k1 + l, k2) if axis == 0 else (k1, k2 + l)
        if (spec.p1q1 * (s1 * s1 - k1 * k1) + spec.p2q2 * (s2 * s2 - k2 * k2)
                + spec.cross * (s1 * s2 - k1 * k2)).denominator != 1:
            return False
    return True


def is_cyclic(spec: ThetaSpec, l1: int, l2: int, span: Optional[Tuple[int, int]] = None) -> bool:
    """Exact check theta(k + l1 e1) == theta(k) == theta(k + l2 e2) (mod 1) over residues up to l + 1."""
    n1, n2 = span or (l1 + 2, l2 + 2)
    for k1 in range(n1):
        for k2 in range(n2):
            base = theta(spec, k1, k2)
            if theta(spec, k1 + l1, k2) != base or theta(spec, k1, k2 + l2) != base:
                return False
    return True


def period_bounds(spec: ThetaSpec, cross: Optional[Tuple[Optional[Fraction], Optional[Fraction]]] = None) -> Tuple[int, int]:
    """Guaranteed periods q1*s1, q2*s2 (q_i * den(p12/q12) when a component fraction is zero)."""
    if cross is None and spec.p12q12 is not None:
        cross = (spec.p12q12 / spec.p1q1 if spec.p1q1 else None,
                 spec.p12q12 / spec.p2q2 if spec.p2q2 else None)
    bounds = []
    for pq, rs in ((spec.p1q1, cross[0] if cross else None), (spec.p2q2, cross[1] if cross else None)):
        if spec.p12q12 is None:
            bounds.append(pq.denominator)
        elif rs is not None:
            bounds.append(pq.denominator * rs.denominator)
        else:
            bounds.append(pq.denominator * spec.p12q12.denominator)
    return bounds[0], bounds[1]


def minimal_periods(spec: ThetaSpec, cross=None) -> Tuple[int, int]:
    bounds = period_bounds(spec, cross)
    periods = []
    for axis, bound in enumerate(bounds):
        found = next((l for l in range(1, bound + 1) if _shift_ok(spec, axis, l)), bound)
        periods.append(found)
    return periods[0], periods[1]


# ---------- coefficients ----------
def phase_table(spec: ThetaSpec, l1: int, l2: int) -> np.ndarray:
    """exp(-2 pi i theta) over residues, theta evaluated exactly."""
    th = np.array([[float(theta(spec, k1, k2)) for k2 in range(l2)] for k1 in range(l1)], dtype=float)
    return np.exp(-2j * np.pi * th)


def expansion_coefficients(spec: ThetaSpec, l1: int, l2: int) -> np.ndarray:
    """a[s1, s2] = 1/(l1 l2) sum_k exp(-2 pi i theta_k) exp(2 pi i (s1 k1/l1 + s2 k2/l2))."""
    return np.fft.ifft2(phase_table(spec, l1, l2))


def coefficients_1d(pq: Fraction, l: int) -> np.ndarray:
    th = np.array([float((pq * k * k) % 1) for k in range(l)])
    return np.fft.ifft(np.exp(-2j * np.pi * th))


def _dft_matrix(l: int) -> np.ndarray:
    k = np.arange(l)
    return np.exp(-2j * np.pi * np.outer(k, k) / l)


# ---------- revival points ----------
@dataclass(frozen=True, eq=False)
class RevivalPoint:
    frac: FracTime
    spec: ThetaSpec
    l1: int
    l2: int
    coeffs: np.ndarray


def revival_point(frac: FracTime) -> RevivalPoint:
    spec = ThetaSpec.from_fractime(frac)
    l1, l2 = minimal_periods(spec, cross_ratios(frac))
    a = expansion_coefficients(spec, l1, l2)
    a.setflags(write=False)
    return RevivalPoint(frac=frac, spec=spec, l1=l1, l2=l2, coeffs=a)


def verify_expansion(point: RevivalPoint, coeffs: Optional[np.ndarray] = None) -> float:
    """max_k |exp(-2 pi i theta_k) - sum_s a_s exp(-2 pi i (k1 s1/l1 + k2 s2/l2))|."""
    a = point.coeffs if coeffs is None else coeffs
    target = phase_table(point.spec, point.l1, point.l2)
    rebuilt = _dft_matrix(point.l1) @ a @ _dft_matrix(point.l2).T
    return float(np.max(np.abs(target - rebuilt)))


@dataclass(frozen=True)
class Wave:
    s1: int
    s2: int
    weight: float
    shift1: Optional[float]
    shift2: Optional[float]


@dataclass(frozen=True)
class Classification:
    n_waves: int
    equal_norm: bool
    separable: bool
    waves: List[Wave] = field(default_factory=list)

    def as_dict(self) -> Dict[str, Any]:
        return {"n_waves": self.n_waves, "equal_norm": self.equal_norm, "separable": self.separable,
                "waves": [{"s1": w.s1, "s2": w.s2, "weight": w.weight,
                           "shift1": w.shift1, "shift2": w.shift2} for w in self.waves]}


def classify(point: RevivalPoint, ts: Optional[TimeScales] = None) -> Classification:
    a = point.coeffs
    mags = np.abs(a)
    nz = np.argwhere(mags > ZERO_COEFF)
    nz_mags = mags[mags > ZERO_COEFF]
    equal_norm = bool(len(nz_mags) == 0 or float(nz_mags.max() - nz_mags.min()) <= ZERO_COEFF)
    sv = np.linalg.svd(a, compute_uv=False)
    separable = bool(len(sv) < 2 or sv[0] == 0 or sv[1] <= ZERO_COEFF * sv[0])
    waves = []
    for s1, s2 in nz:
        sh1 = s1 * ts.Tcl1 / point.l1 if ts is not None and ts.Tcl1 is not None else None
        sh2 = s2 * ts.Tcl2 / point.l2 if ts is not None and ts.Tcl2 is not None else None
        waves.append(Wave(int(s1), int(s2), float(mags[s1, s2] ** 2), sh1, sh2))
    return Classification(n_waves=int(len(nz)), equal_norm=equal_norm, separable=separable, waves=waves)


def predict_autocorrelation(point: RevivalPoint, grid: CoefficientGrid, ts: TimeScales, t: float) -> complex:
    """A(t) near t_frac from the subsidiary-wave expansion."""
    T1 = ts.Tcl1 or 0.0
    T2 = ts.Tcl2 or 0.0
    total = 0j
    for s1 in range(point.l1):
        for s2 in range(point.l2):
            a = point.coeffs[s1, s2]
            if abs(a) <= ZERO_COEFF:
                continue
            total += a * classical_overlap(grid, ts, t + s1 * T1 / point.l1, t + s2 * T2 / point.l2)
    return complex(total)


# ---------- self-checks ----------
@dataclass
class CheckResult:
    ok: bool
    reason: str
    meta: Dict[str, Any]


def verify_point(point: RevivalPoint, tol: float = 1e-12) -> CheckResult:
    """Cyclicity, minimality, unitarity and expansion residual for one point."""
    meta: Dict[str, Any] = {"t": point.frac.t, "spec": point.spec.label(), "l1": point.l1, "l2": point.l2}
    if not is_cyclic(point.spec, point.l1, point.l2):
        return CheckResult(False, "FAIL_CYCLIC", meta)
    for axis, l in enumerate((point.l1, point.l2)):
        if any(_shift_ok(point.spec, axis, m) for m in range(1, l)):
            return CheckResult(False, "FAIL_MINIMAL", meta)
    unitary = abs(float(np.sum(np.abs(point.coeffs) ** 2)) - 1.0)
    meta["unitarity"] = unitary
    if unitary > tol:
        return CheckResult(False, "FAIL_UNITARY", meta)
    residual = verify_expansion(point)
    meta["residual"] = residual
    if residual > tol:
        return CheckResult(False, "FAIL_RESIDUAL", meta)
    return CheckResult(True, "CHECK_OK", meta)


def point_report(point: RevivalPoint, ts: Optional[TimeScales] = None) -> Dict[str, Any]:
    cls = classify(point, ts)
    return {
        "t": point.frac.t,
        "x": f"{point.frac.x.numerator}/{point.frac.x.denominator}",
        "fractions": point.frac.as_dict(),
        "l1": point.l1, "l2": point.l2,
        "n_waves": cls.n_waves, "equal_norm": cls.equal_norm, "separable": cls.separable,
        "residual": verify_expansion(point),
        "coefficients": [[[float(v.real), float(v.imag)] for v in row] for row in point.coeffs],
        "waves": cls.as_dict()["waves"],
    }


def point_from_spec(spec: ThetaSpec) -> RevivalPoint:
    """Revival point for a bare theta spec (no time attached)."""
    frac = FracTime(t=0.0, x=Fraction(0), p1q1=spec.p1q1, p2q2=spec.p2q2, p12q12=spec.p12q12)
    l1, l2 = minimal_periods(spec)
    a = expansion_coefficients(spec, l1, l2)
    a.setflags(write=False)
    return RevivalPoint(frac=frac, spec=spec, l1=l1, l2=l2, coeffs=a)


def cross_term_catalog() -> List[ThetaSpec]:
    p1s = [Fraction(1, 2), Fraction(1, 3), Fraction(3, 4), Fraction(2, 5)]
    p2s = [Fraction(0), Fraction(1, 4), Fraction(5, 6)]
    p12s = [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)]
    return [ThetaSpec(a, b, c) for a, b, c in itertools.product(p1s, p2s, p12s)]


# ---------- tuning ----------
@dataclass(frozen=True)
class TuneTarget:
    """value of numerator/denominator (or of numerator alone when denominator is None)."""
    numerator: str
    denominator: Optional[str]
    value: float

    def __post_init__(self):
        for name in (self.numerator, self.denominator):
            if name is not None and name not in TIME_NAMES:
                raise ValueError(f"unknown time scale {name!r} in tuning target")
        if not (self.value and math.isfinite(float(self.value))):
            raise ValueError(f"tuning target must be finite and nonzero, got {self.value!r}")


@dataclass(frozen=True)
class TuneResult:
    param: float
    triple: Optional[CommensurateTriple]
    residual: float
    spectrum: int = 0


def _achieved(family: ModelFamily, lattice: Lattice, target: TuneTarget, value: float) -> float:
    ts = timescales(derivatives(family.at(value), lattice), lattice)
    num = ts.get(target.numerator)
    if num is None:
        return math.nan
    if target.denominator is None:
        return num
    den = ts.get(target.denominator)
    return math.nan if den is None else num / den


def tune_parameter(family: ModelFamily, lattice: Lattice, param_range: Tuple[float, float], target: TuneTarget,
                   grid_points: int = 201, tol: float = DEFAULT_TOL, max_den: int = DEFAULT_MAX_DEN,
                   qmax: int = DEFAULT_QMAX) -> List[TuneResult]:
    """
    Scan the parameter, bracket sign changes of the relative residual
    (achieved - target)/|target| and refine each bracket by bisection.
    An empty list means the target is not reachable in the range.
    """
    lo, hi = float(param_range[0]), float(param_range[1])
    if not hi > lo:
        raise ValueError(f"empty parameter range [{lo}, {hi}]")
    if grid_points < 2:
        raise ValueError(f"grid_points must be >= 2, got {grid_points}")
    goal = float(target.value)
    resid = lambda v: (_achieved(family, lattice, target, v) - goal) / abs(goal)

    grid = np.linspace(lo, hi, grid_points)
    values = [resid(v) for v in grid]
    roots: List[float] = []
    for (a, ra), (b, rb) in zip(zip(grid, values), zip(grid[1:], values[1:])):
        if not (math.isfinite(ra) and math.isfinite(rb)):
            continue
        if ra == 0.0:
            roots.append(float(a))
        elif ra * rb < 0:
            roots.append(float(bisect(resid, a, b, xtol=abs(b - a) * 1e-14, maxiter=200)))
    if values and values[-1] == 0.0:
        roots.append(float(grid[-1]))

    out: List[TuneResult] = []
    for root in sorted(set(roots)):
        r = resid(root)
        if not abs(r) <= tol:
            continue
        model = family.at(root)
        ts = timescales(derivatives(model, lattice), lattice)
        triple = revival_triple(ts, max_den, tol, exact_trev_ratio(model, lattice))
        spectrum = 0
        if triple is not None:
            x = full_revival(triple)
            spectrum = len(enumerate_fractimes(triple, ts, qmax, float(x) * triple.base_time))
        out.append(TuneResult(param=root, triple=triple, residual=r, spectrum=spectrum))
    return out

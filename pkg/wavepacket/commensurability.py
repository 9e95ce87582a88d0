# commensurability.py
# Exact rational bookkeeping for time scales: float ratios -> reduced fractions
# by continued-fraction convergents, the classical beat period, the revival
# triple, fractional-revival times and the cross ratios r/s.

from __future__ import annotations
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

from models import TimeScales

DEFAULT_MAX_DEN = 64
DEFAULT_TOL = 1e-9
DEFAULT_QMAX = 12

REVIVAL_NAMES = ("trev1", "trev2", "trev12")


# ---------- continued fractions ----------
def convergents(x: float) -> Iterator[Fraction]:
    """Continued-fraction convergents of the exact binary value of x >= 0."""
    rest = Fraction(x)
    p_prev, q_prev = 1, 0
    p, q = math.floor(rest), 1
    yield Fraction(p, q)
    rest -= math.floor(rest)
    while rest:
        rest = 1 / rest
        a = math.floor(rest)
        rest -= a
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        yield Fraction(p, q)


def rationalize(x: float, max_den: int = DEFAULT_MAX_DEN, tol: float = DEFAULT_TOL) -> Optional[Fraction]:
    """
    First convergent p/q of x with q <= max_den and |x - p/q| <= tol * max(1, |x|).
    None means x is incommensurate at this resolution.
    """
    if not math.isfinite(x):
        raise ValueError(f"rationalize needs a finite value, got {x!r}")
    if max_den < 1:
        raise ValueError(f"max_den must be >= 1, got {max_den}")
    if tol < 0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    sign = -1 if x < 0 else 1
    ax = abs(x)
    bound = tol * max(1.0, ax)
    for c in convergents(ax):
        if c.denominator > max_den:
            return None
        if abs(ax - c) <= bound:
            return sign * c
    return None


# ---------- classical beat ----------
@dataclass(frozen=True)
class ClassicalBeat:
    a: int
    b: int
    Tcl: float
    residual: float


def classical_beat(Tcl1: Optional[float], Tcl2: Optional[float],
                   max_den: int = DEFAULT_MAX_DEN, tol: float = DEFAULT_TOL) -> Optional[ClassicalBeat]:
    """Tcl1 = (a/b) Tcl2 with a, b coprime gives the short-time period Tcl = b Tcl1 = a Tcl2."""
    if not Tcl1 or not Tcl2:
        return None
    T1, T2 = abs(Tcl1), abs(Tcl2)
    ratio = T1 / T2
    frac = rationalize(ratio, max_den, tol)
    if frac is None:
        return None
    return ClassicalBeat(a=frac.numerator, b=frac.denominator, Tcl=frac.denominator * T1,
                         residual=abs(ratio - float(frac)))


# ---------- revival triple ----------
@dataclass(frozen=True)
class CommensurateTriple:
    """trev_i = f_i * base_time (f_i signed); absent scales carry None."""
    f1: Optional[Fraction]
    f2: Optional[Fraction]
    f12: Optional[Fraction]
    base: str
    base_time: float
    residual: float = 0.0
    exact: bool = False

    def factor(self, name: str) -> Optional[Fraction]:
        return {"trev1": self.f1, "trev2": self.f2, "trev12": self.f12}[name]

    def present(self) -> List[Tuple[str, Fraction]]:
        return [(n, self.factor(n)) for n in REVIVAL_NAMES if self.factor(n) is not None]

    def ratio(self, a: str, b: str) -> Optional[Fraction]:
        fa, fb = self.factor(a), self.factor(b)
        if fa is None or fb is None:
            return None
        return fa / fb

    def as_dict(self) -> Dict[str, object]:
        return {"f1": _fstr(self.f1), "f2": _fstr(self.f2), "f12": _fstr(self.f12),
                "base": self.base, "base_time": self.base_time,
                "residual": self.residual, "exact": self.exact}


def _fstr(f: Optional[Fraction]) -> Optional[str]:
    return None if f is None else f"{f.numerator}/{f.denominator}"


def revival_triple(ts: TimeScales, max_den: int = DEFAULT_MAX_DEN, tol: float = DEFAULT_TOL,
                   exact_f2: Optional[Fraction] = None) -> Optional[CommensurateTriple]:
    """
    Express the present revival times as rational multiples of the first present
    one. exact_f2 (trev2/trev1 known analytically) bypasses rationalize.
    """
    present = [(n, ts.get(n)) for n in REVIVAL_NAMES if ts.get(n) is not None]
    if not present:
        return None
    base, base_value = present[0]
    base_time = abs(base_value)
    factors: Dict[str, Optional[Fraction]] = {n: None for n in REVIVAL_NAMES}
    residual = 0.0
    used_exact = False
    for name, value in present:
        if name == base:
            factors[name] = Fraction(1 if value > 0 else -1)
            continue
        x = value / base_time
        if name == "trev2" and base == "trev1" and exact_f2 is not None:
            f = Fraction(exact_f2) * (1 if base_value > 0 else -1)
            used_exact = True
        else:
            f = rationalize(x, max_den, tol)
            if f is None:
                return None
        factors[name] = f
        residual = max(residual, abs(x - float(f)))
    return CommensurateTriple(f1=factors["trev1"], f2=factors["trev2"], f12=factors["trev12"],
                              base=base, base_time=base_time, residual=residual, exact=used_exact)


def _rational_lcm(a: Fraction, b: Fraction) -> Fraction:
    num = a.numerator * b.numerator // math.gcd(a.numerator, b.numerator)
    return Fraction(num, math.gcd(a.denominator, b.denominator))


def full_revival(triple: CommensurateTriple) -> Fraction:
    """Least x > 0 (base units) at which every t/trev_i is an integer."""
    x = Fraction(1)
    first = True
    for _, f in triple.present():
        x = abs(f) if first else _rational_lcm(x, abs(f))
        first = False
    return x


# ---------- fractional revival times ----------
@dataclass(frozen=True)
class FracTime:
    t: float
    x: Fraction                       # t / base_time, exact
    p1q1: Optional[Fraction]
    p2q2: Optional[Fraction]
    p12q12: Optional[Fraction]

    def fractions(self) -> Dict[str, Optional[Fraction]]:
        return {"trev1": self.p1q1, "trev2": self.p2q2, "trev12": self.p12q12}

    def check(self, triple: CommensurateTriple) -> bool:
        """t = (p_i/q_i) trev_i in integer arithmetic: p_i * num(f_i) * den(x) == num(x) * q_i * den(f_i)."""
        for name, f in triple.present():
            pq = self.fractions()[name]
            if pq is None:
                return False
            if pq.numerator * f.numerator * self.x.denominator != self.x.numerator * pq.denominator * f.denominator:
                return False
        return True

    def as_dict(self) -> Dict[str, Optional[str]]:
        return {"p1/q1": _fstr(self.p1q1), "p2/q2": _fstr(self.p2q2), "p12/q12": _fstr(self.p12q12)}


def fractime_at(triple: CommensurateTriple, x: Fraction) -> FracTime:
    fr = {name: Fraction(x) / f for name, f in triple.present()}
    return FracTime(t=float(x) * triple.base_time, x=Fraction(x),
                    p1q1=fr.get("trev1"), p2q2=fr.get("trev2"), p12q12=fr.get("trev12"))


def enumerate_fractimes(triple: CommensurateTriple, ts: TimeScales, qmax: int = DEFAULT_QMAX,
                        tmax: Optional[float] = None) -> List[FracTime]:
    """
    Every t in (0, tmax] whose fractions t/trev_i all have denominators <= qmax,
    sorted by time. Full revivals are the points with all fractions integral.
    """
    if qmax < 1:
        raise ValueError(f"qmax must be >= 1, got {qmax}")
    if tmax is None:
        tmax = float(full_revival(triple)) * triple.base_time
    limit = tmax / triple.base_time * (1.0 + 1e-12)
    seen = set()
    points: List[FracTime] = []
    # the base fraction is +-x, so its denominator bounds the search
    for q in range(1, qmax + 1):
        for m in range(1, int(math.floor(limit * q)) + 1):
            x = Fraction(m, q)
            if x in seen:
                continue
            seen.add(x)
            pt = fractime_at(triple, x)
            if all(pq.denominator <= qmax for pq in pt.fractions().values() if pq is not None):
                points.append(pt)
    points.sort(key=lambda p: p.x)
    return points


def cross_ratios(point: FracTime) -> Optional[Tuple[Optional[Fraction], Optional[Fraction]]]:
    """r_i/s_i = (q_i p12)/(p_i q12), i.e. trev_i = (r_i/s_i) trev12."""
    if point.p12q12 is None:
        return None
    r1s1 = point.p12q12 / point.p1q1 if point.p1q1 else None
    r2s2 = point.p12q12 / point.p2q2 if point.p2q2 else None
    return r1s1, r2s2

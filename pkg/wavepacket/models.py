# models.py
# Energy models on a two-quantum-number lattice, their Taylor derivatives at the
# packet center, and the five controlling time scales (two classical periods,
# two component revival times, one cross-revival time). Atomic units throughout.

from __future__ import annotations
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

TWO_PI = 2.0 * math.pi


class DomainError(ArithmeticError):
    pass


class NumericError(ArithmeticError):
    pass


# ---------- lattice ----------
@dataclass(frozen=True)
class Lattice:
    """
    Allowed quantum numbers n_i = nbar_i + step_i * kappa_i with
    |kappa_i| <= halfwidth_i. kappa are the effective integer indices.
    """
    nbar1: int
    nbar2: int
    step1: int = 1
    step2: int = 1
    halfwidth1: int = 12
    halfwidth2: int = 12

    def __post_init__(self):
        for name in ("nbar1", "nbar2", "step1", "step2", "halfwidth1", "halfwidth2"):
            if not isinstance(getattr(self, name), (int, np.integer)):
                raise ValueError(f"Lattice.{name} must be an integer, got {getattr(self, name)!r}")
        if self.step1 < 1 or self.step2 < 1:
            raise ValueError(f"Lattice steps must be >= 1 (got {self.step1}, {self.step2})")
        if self.halfwidth1 < 1 or self.halfwidth2 < 1:
            raise ValueError(f"Lattice halfwidths must be >= 1 (got {self.halfwidth1}, {self.halfwidth2})")

    def kappa1(self) -> np.ndarray:
        return np.arange(-self.halfwidth1, self.halfwidth1 + 1)

    def kappa2(self) -> np.ndarray:
        return np.arange(-self.halfwidth2, self.halfwidth2 + 1)

    def quantum_numbers(self, kappa1, kappa2) -> Tuple[Any, Any]:
        return self.nbar1 + self.step1 * np.asarray(kappa1), self.nbar2 + self.step2 * np.asarray(kappa2)


def stark_lattice(nbar: int, kbar: int, halfwidth_n: int = 12, halfwidth_k: int = 12,
                  single_parity: bool = True) -> Lattice:
    """
    Lattice for a Stark packet. k moves in steps of two; with single_parity
    n moves in steps of two as well so n + k stays odd on every point.
    """
    if (nbar + kbar) % 2 == 0:
        raise ValueError(f"Stark center needs n + k odd (k has opposite parity to n), got n={nbar}, k={kbar}")
    return Lattice(nbar1=nbar, nbar2=kbar, step1=2 if single_parity else 1, step2=2,
                   halfwidth1=halfwidth_n, halfwidth2=halfwidth_k)


# ---------- energy models ----------
@dataclass(frozen=True)
class Box2D:
    """Particle (mass 1 a.u.) in a periodic 2D box: E = 2 pi^2 (n1^2/L1^2 + n2^2/L2^2)."""
    L1: float
    L2: float
    exact_sq: Optional[Tuple[Fraction, Fraction]] = None

    def __post_init__(self):
        if not (self.L1 > 0 and self.L2 > 0):
            raise ValueError(f"Box2D lengths must be positive (got L1={self.L1}, L2={self.L2})")

    @classmethod
    def from_squares(cls, L1_sq, L2_sq) -> "Box2D":
        s1, s2 = Fraction(L1_sq), Fraction(L2_sq)
        if s1 <= 0 or s2 <= 0:
            raise ValueError(f"Box2D squared lengths must be positive (got {s1}, {s2})")
        return cls(L1=math.sqrt(s1), L2=math.sqrt(s2), exact_sq=(s1, s2))

    @property
    def L1_sq(self) -> float:
        return float(self.exact_sq[0]) if self.exact_sq else self.L1 ** 2

    @property
    def L2_sq(self) -> float:
        return float(self.exact_sq[1]) if self.exact_sq else self.L2 ** 2

    def energy(self, n1, n2):
        n1 = np.asarray(n1, dtype=float); n2 = np.asarray(n2, dtype=float)
        return 2.0 * math.pi ** 2 * (n1 ** 2 / self.L1_sq + n2 ** 2 / self.L2_sq)

    def analytic(self, n1: float, n2: float) -> "DerivativeSet":
        c1 = 4.0 * math.pi ** 2 / self.L1_sq
        c2 = 4.0 * math.pi ** 2 / self.L2_sq
        return DerivativeSet(E0=float(self.energy(n1, n2)), d1=c1 * n1, d2=c2 * n2,
                             d11=c1, d22=c2, d12=0.0, analytic=True)


@dataclass(frozen=True)
class StarkHydrogen:
    """Weak-field hydrogen Stark levels E(n, k) = -1/(2 n^2) + 3 n k F / 2."""
    F: float

    def __post_init__(self):
        if not self.F > 0:
            raise ValueError(f"Stark field strength must be positive (got F={self.F})")

    def energy(self, n, k):
        n = np.asarray(n, dtype=float); k = np.asarray(k, dtype=float)
        if np.any(n == 0):
            raise DomainError("StarkHydrogen energy undefined at n = 0")
        return -0.5 / n ** 2 + 1.5 * n * k * self.F

    def analytic(self, n: float, k: float) -> "DerivativeSet":
        if n == 0:
            raise DomainError("StarkHydrogen derivatives undefined at n = 0")
        return DerivativeSet(E0=float(self.energy(n, k)),
                             d1=1.0 / n ** 3 + 1.5 * k * self.F,
                             d2=1.5 * n * self.F,
                             d11=-3.0 / n ** 4, d22=0.0, d12=1.5 * self.F, analytic=True)


@dataclass(frozen=True)
class Polynomial:
    """E = sum c * n1^p1 * n2^p2 over a finite support {(p1, p2): c}."""
    coeffs: Dict[Tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        for (p1, p2) in self.coeffs:
            if p1 < 0 or p2 < 0:
                raise ValueError(f"Polynomial powers must be non-negative, got {(p1, p2)}")

    def energy(self, n1, n2):
        n1 = np.asarray(n1, dtype=float); n2 = np.asarray(n2, dtype=float)
        out = np.zeros(np.broadcast(n1, n2).shape)
        for (p1, p2), c in self.coeffs.items():
            out = out + float(c) * n1 ** p1 * n2 ** p2
        return out

    def analytic(self, n1: float, n2: float) -> None:
        return None


EnergyModel = Union[Box2D, StarkHydrogen, Polynomial]


def energy(model: EnergyModel, n1, n2):
    """Exact model energy (no Taylor truncation); array-friendly."""
    e = model.energy(n1, n2)
    return float(e) if np.ndim(e) == 0 else e


def validate_point(model: EnergyModel, n1: int, n2: int) -> List[str]:
    warnings: List[str] = []
    if isinstance(model, StarkHydrogen):
        if n1 < 1:
            warnings.append(f"Stark n={n1} < 1")
        elif abs(n2) > n1 - 1:
            warnings.append(f"Stark |k|={abs(n2)} exceeds n-1={n1 - 1}")
    return warnings


def validate_window(model: EnergyModel, lattice: Lattice) -> List[str]:
    """Advisory check over the whole index window, not just the center."""
    if not isinstance(model, StarkHydrogen):
        return []
    k1, k2 = np.meshgrid(lattice.kappa1(), lattice.kappa2(), indexing="ij")
    n, k = lattice.quantum_numbers(k1, k2)
    total = n.size
    warnings: List[str] = []
    low = n < 1
    if low.any():
        warnings.append(f"Stark window reaches n={int(n.min())} < 1 ({int(low.sum())} of {total} points)")
    wide = ~low & (np.abs(k) > n - 1)
    if wide.any():
        warnings.append(f"Stark window has |k| > n-1 at {int(wide.sum())} of {total} points")
    return warnings


# ---------- derivatives ----------
@dataclass(frozen=True)
class DerivativeSet:
    E0: float
    d1: float
    d2: float
    d11: float
    d22: float
    d12: float
    analytic: bool = True

    def as_dict(self) -> Dict[str, float]:
        return {"E0": self.E0, "d1": self.d1, "d2": self.d2,
                "d11": self.d11, "d22": self.d22, "d12": self.d12}


def _richardson(estimates: List[float]) -> float:
    # estimates at h, h/2, h/4, ... with even error expansion in h
    table = list(estimates)
    for j in range(1, len(table)):
        factor = 4.0 ** j
        table = [(factor * table[i + 1] - table[i]) / (factor - 1.0) for i in range(len(table) - 1)]
    return table[0]


def finite_difference_derivatives(model: EnergyModel, n1: float, n2: float,
                                  h0: float = 1.0, levels: int = 4) -> DerivativeSet:
    """Central differences at h0, h0/2, ... refined by a Richardson table."""
    f = lambda a, b: float(model.energy(a, b))
    e0 = f(n1, n2)
    d1s, d2s, d11s, d22s, d12s = [], [], [], [], []
    for j in range(levels):
        h = h0 / 2 ** j
        fp1, fm1 = f(n1 + h, n2), f(n1 - h, n2)
        fp2, fm2 = f(n1, n2 + h), f(n1, n2 - h)
        d1s.append((fp1 - fm1) / (2 * h))
        d2s.append((fp2 - fm2) / (2 * h))
        d11s.append((fp1 - 2 * e0 + fm1) / h ** 2)
        d22s.append((fp2 - 2 * e0 + fm2) / h ** 2)
        d12s.append((f(n1 + h, n2 + h) - f(n1 + h, n2 - h) - f(n1 - h, n2 + h) + f(n1 - h, n2 - h)) / (4 * h * h))
    out = DerivativeSet(E0=e0, d1=_richardson(d1s), d2=_richardson(d2s), d11=_richardson(d11s),
                        d22=_richardson(d22s), d12=_richardson(d12s), analytic=False)
    if not all(math.isfinite(v) for v in out.as_dict().values()):
        raise NumericError(f"non-finite finite-difference derivatives at ({n1}, {n2}): {out.as_dict()}")
    return out


def derivatives(model: EnergyModel, lattice: Lattice) -> DerivativeSet:
    """Partials at (nbar1, nbar2): analytic where the model has them, numeric otherwise."""
    ds = model.analytic(lattice.nbar1, lattice.nbar2)
    if ds is None:
        ds = finite_difference_derivatives(model, lattice.nbar1, lattice.nbar2)
    if not all(math.isfinite(v) for v in ds.as_dict().values()):
        raise NumericError(f"non-finite derivatives at center: {ds.as_dict()}")
    return ds


def taylor_residual(model: EnergyModel, lattice: Lattice, derivs: Optional[DerivativeSet] = None) -> float:
    """Max relative gap between the exact energy and its second-order expansion over the window."""
    d = derivs or derivatives(model, lattice)
    k1, k2 = np.meshgrid(lattice.kappa1(), lattice.kappa2(), indexing="ij")
    n1, n2 = lattice.quantum_numbers(k1, k2)
    x1 = (n1 - lattice.nbar1).astype(float); x2 = (n2 - lattice.nbar2).astype(float)
    exact = model.energy(n1, n2)
    taylor = (d.E0 + d.d1 * x1 + d.d2 * x2 + 0.5 * d.d11 * x1 ** 2 + 0.5 * d.d22 * x2 ** 2
              + d.d12 * x1 * x2)
    return float(np.max(np.abs(exact - taylor) / np.maximum(np.abs(exact), 1.0)))


# ---------- time scales ----------
@dataclass(frozen=True)
class TimeScales:
    """Signed time scales on the effective lattice; None marks an absent scale."""
    Tcl1: Optional[float]
    Tcl2: Optional[float]
    trev1: Optional[float]
    trev2: Optional[float]
    trev12: Optional[float]

    def get(self, name: str) -> Optional[float]:
        if name not in ("Tcl1", "Tcl2", "trev1", "trev2", "trev12"):
            raise KeyError(f"unknown time scale {name!r}")
        return getattr(self, name)

    def as_dict(self) -> Dict[str, Optional[float]]:
        return {"Tcl1": self.Tcl1, "Tcl2": self.Tcl2, "trev1": self.trev1,
                "trev2": self.trev2, "trev12": self.trev12}


def _scale(rate: float, absent: bool) -> Optional[float]:
    if absent:
        return None
    t = TWO_PI / rate
    if not math.isfinite(t):
        raise NumericError(f"non-finite time scale from rate {rate!r}")
    return t


def timescales(derivs: DerivativeSet, lattice: Lattice) -> TimeScales:
    s1, s2 = lattice.step1, lattice.step2
    r1, r2 = s1 * derivs.d1, s2 * derivs.d2
    q1, q2 = 0.5 * s1 ** 2 * derivs.d11, 0.5 * s2 ** 2 * derivs.d22
    q12 = s1 * s2 * derivs.d12
    if derivs.analytic:
        zero = lambda v, scale: v == 0.0
    else:
        zero = lambda v, scale: abs(v) <= 1e-12 * scale
    first_scale = max(abs(r1), abs(r2))
    second_scale = max(abs(derivs.d11), abs(derivs.d22))
    return TimeScales(
        Tcl1=_scale(r1, zero(r1, first_scale)),
        Tcl2=_scale(r2, zero(r2, first_scale)),
        trev1=_scale(q1, zero(q1, second_scale * s1 ** 2)),
        trev2=_scale(q2, zero(q2, second_scale * s2 ** 2)),
        trev12=_scale(q12, zero(derivs.d12, second_scale)),
    )


def exact_trev_ratio(model: EnergyModel, lattice: Lattice) -> Optional[Fraction]:
    """trev2/trev1 as an exact rational for boxes built from exact squared lengths."""
    if isinstance(model, Box2D) and model.exact_sq is not None:
        L1_sq, L2_sq = model.exact_sq
        return (L2_sq * lattice.step1 ** 2) / (L1_sq * lattice.step2 ** 2)
    return None


# ---------- one-parameter families ----------
@dataclass(frozen=True)
class ModelFamily:
    model: EnergyModel
    param: str

    def __post_init__(self):
        allowed = {Box2D: ("L1", "L2"), StarkHydrogen: ("F",)}.get(type(self.model), ())
        if self.param not in allowed:
            raise ValueError(f"{type(self.model).__name__} has no tunable parameter {self.param!r} (allowed: {allowed})")

    def at(self, value: float) -> EnergyModel:
        if isinstance(self.model, Box2D):
            return replace(self.model, exact_sq=None, **{self.param: float(value)})
        return replace(self.model, **{self.param: float(value)})

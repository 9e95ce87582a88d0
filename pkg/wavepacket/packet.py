# packet.py
# Gaussian-weighted superposition on the lattice, its phase evolution
# (exact energies, second-order expansion, or classical terms only), the
# autocorrelation A(t) = <Psi(0)|Psi(t)> and the doubly-periodic overlap
# <Psi(0)|psi_cl(t1, t2)>. Orthonormal eigenstates: no position-space integrals.

from __future__ import annotations
import json, math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from models import TWO_PI, DerivativeSet, EnergyModel, Lattice, NumericError, TimeScales

MODES = ("exact", "second_order", "first_order")
CHUNK = 512
SERIES_FIELDS = ["t", "re_A", "im_A", "abs2"]


class ParameterError(ValueError):
    pass


# ---------- packet spec + coefficients ----------
@dataclass(frozen=True)
class PacketSpec:
    lattice: Lattice
    sigma1: float = 2.5
    sigma2: float = 2.5

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ParameterError(f"Gaussian widths must be positive (got sigma1={self.sigma1}, sigma2={self.sigma2})")
        for hw, sigma, tag in ((self.lattice.halfwidth1, self.sigma1, "1"), (self.lattice.halfwidth2, self.sigma2, "2")):
            if hw < math.ceil(4 * sigma):
                raise ParameterError(f"halfwidth{tag}={hw} < ceil(4*sigma{tag})={math.ceil(4 * sigma)}; truncated weight would exceed 1e-6")


@dataclass(frozen=True, eq=False)
class CoefficientGrid:
    """Normalized amplitudes c[i, j] at kappa1[i], kappa2[j]; norm is the pre-normalization 2-norm."""
    kappa1: np.ndarray
    kappa2: np.ndarray
    amplitudes: np.ndarray
    norm: float

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def weight(self, k1: int, k2: int) -> complex:
        i = int(k1 - self.kappa1[0]); j = int(k2 - self.kappa2[0])
        if not (0 <= i < len(self.kappa1) and 0 <= j < len(self.kappa2)):
            return 0j
        return complex(self.amplitudes[i, j])


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


def build_coefficients(spec: PacketSpec) -> CoefficientGrid:
    """|c_k|^2 proportional to exp(-k^2 / 2 sigma^2) per index, product form, real positive."""
    k1, k2 = spec.lattice.kappa1(), spec.lattice.kappa2()
    c1 = np.exp(-k1.astype(float) ** 2 / (4.0 * spec.sigma1 ** 2))
    c2 = np.exp(-k2.astype(float) ** 2 / (4.0 * spec.sigma2 ** 2))
    c = np.outer(c1, c2).astype(complex)
    norm = float(np.sqrt(np.sum(np.abs(c) ** 2)))
    return CoefficientGrid(kappa1=_frozen(k1), kappa2=_frozen(k2), amplitudes=_frozen(c / norm), norm=norm)


# ---------- phases ----------
def angular_frequencies(model: EnergyModel, derivs: DerivativeSet, ts: TimeScales, lattice: Lattice,
                        mode: str, k1, k2) -> np.ndarray:
    """Phase rate per lattice point so that phase(t) = omega * t."""
    if mode not in MODES:
        raise ValueError(f"unknown evolution mode {mode!r} (expected one of {MODES})")
    k1 = np.asarray(k1, dtype=float); k2 = np.asarray(k2, dtype=float)
    if mode == "exact":
        n1, n2 = lattice.quantum_numbers(k1, k2)
        return np.asarray(model.energy(n1, n2), dtype=float) - derivs.E0
    terms = [(ts.Tcl1, k1), (ts.Tcl2, k2)]
    if mode == "second_order":
        terms += [(ts.trev1, k1 ** 2), (ts.trev2, k2 ** 2), (ts.trev12, k1 * k2)]
    omega = np.zeros(np.broadcast(k1, k2).shape)
    for scale, k in terms:
        if scale is not None:
            omega = omega + k / scale
    return TWO_PI * omega


def phase(derivs: DerivativeSet, model: EnergyModel, mode: str, lattice: Lattice, ts: TimeScales,
          k1: int, k2: int, t: float) -> float:
    """Phase of component (k1, k2) at time t, reduced to [0, 2 pi); Psi carries exp(-i * phase)."""
    omega = angular_frequencies(model, derivs, ts, lattice, mode, k1, k2)
    return float(np.mod(omega * t, TWO_PI))


@dataclass(frozen=True, eq=False)
class PhaseProvider:
    mode: str
    omega: np.ndarray

    def phases(self, t: float) -> np.ndarray:
        return np.mod(self.omega * t, TWO_PI)


def phase_provider(grid: CoefficientGrid, model: EnergyModel, derivs: DerivativeSet, ts: TimeScales,
                   lattice: Lattice, mode: str) -> PhaseProvider:
    k1, k2 = np.meshgrid(grid.kappa1, grid.kappa2, indexing="ij")
    return PhaseProvider(mode=mode, omega=_frozen(angular_frequencies(model, derivs, ts, lattice, mode, k1, k2)))


# ---------- autocorrelation ----------
def _autocorr_many(weights: np.ndarray, omega: np.ndarray, times: np.ndarray) -> np.ndarray:
    return np.exp(-1j * np.multiply.outer(times, omega)) @ weights


def autocorrelation(grid: CoefficientGrid, phases: PhaseProvider, t: float) -> complex:
    """A(t) = sum |c_k|^2 exp(-i omega_k t)."""
    w = grid.probabilities.ravel()
    return complex(_autocorr_many(w, phases.omega.ravel(), np.array([float(t)]))[0])


def classical_overlap(grid: CoefficientGrid, ts: TimeScales, t1: float, t2: float) -> complex:
    """<Psi(0)|psi_cl(t1, t2)>; periodic in t1 with Tcl1 and in t2 with Tcl2."""
    f1 = 0.0 if ts.Tcl1 is None else t1 / ts.Tcl1
    f2 = 0.0 if ts.Tcl2 is None else t2 / ts.Tcl2
    e1 = np.exp(-2j * np.pi * np.mod(grid.kappa1 * f1, 1.0))
    e2 = np.exp(-2j * np.pi * np.mod(grid.kappa2 * f2, 1.0))
    return complex(e1 @ grid.probabilities @ e2)


@dataclass(frozen=True, eq=False)
class AutocorrelationSeries:
    times: np.ndarray
    values: np.ndarray
    abs2: np.ndarray

    def __post_init__(self):
        if len(self.abs2) and float(np.max(self.abs2)) > 1.0 + 1e-12:
            raise NumericError(f"|A(t)|^2 reached {float(np.max(self.abs2))!r} > 1")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.times, "re_A": self.values.real,
                             "im_A": self.values.imag, "abs2": self.abs2}, columns=SERIES_FIELDS)

    def to_csv(self, path) -> str:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.15g", lineterminator="\n")
        return str(path)

    def to_records(self) -> List[Dict[str, float]]:
        return [{"t": _g15(t), "re_A": _g15(v.real), "im_A": _g15(v.imag), "abs2": _g15(a)}
                for t, v, a in zip(self.times, self.values, self.abs2)]

    def to_json(self, path) -> str:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(self.to_records(), f, separators=(",", ":"))
        return str(path)


def _g15(x) -> float:
    return float(f"{float(x):.15g}")


def sample_series(grid: CoefficientGrid, phases: PhaseProvider, t_grid: Sequence[float],
                  workers: int = 1) -> AutocorrelationSeries:
    """Element-wise A(t); chunks write disjoint slices so the result is order-stable."""
    times = np.asarray(t_grid, dtype=float)
    w = grid.probabilities.ravel()
    omega = phases.omega.ravel()
    values = np.empty(len(times), dtype=complex)

    def run(start: int) -> None:
        stop = min(start + CHUNK, len(times))
        values[start:stop] = _autocorr_many(w, omega, times[start:stop])

    starts = range(0, len(times), CHUNK)
    if workers > 1 and len(times) > CHUNK:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, starts))
    else:
        for s in starts:
            run(s)
    return AutocorrelationSeries(times=_frozen(times), values=_frozen(values), abs2=_frozen(np.abs(values) ** 2))

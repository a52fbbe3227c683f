"""Residual checks and bound-state search for first-order Dirac models.

The kinetic matrix ``S1`` has an empty third row, so the third component
of ``H psi = E psi`` is algebraic.  Eliminating it,

    psi_C = (V31 psi_A + V32 psi_B) / (E - V33),

leaves a 2x2 first-order system for ``(psi_A, psi_B)``.  Bound states are
found by shooting that system from both asymptotic regions to ``x = 0`` and
locating zeros of the normalised matching Wronskian.  Energies where
``E = V33`` (the flat band) cannot be reduced; they are reported
separately and confirmed from the missing states instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from . import _closed_forms as cf
from . import kernels
from ._parallel import pmap
from ._pykernels import DEGENERACY_RTOL, reduced_rhs
from .algebra import S1
from .darboux import TransformedModel, l2_norm
from .errors import AlgebraicDegeneracy, NonAsymptoticPotential, Unsupported
from .free_model import DiracModel, SpinorFunction
from .ode import dopri45

__all__ = [
    "Grid",
    "SpectrumReport",
    "reduce_to_two_components",
    "eigen_residual",
    "default_length",
    "integrate_model",
    "matching_function",
    "shoot_bound_states",
    "case_spectrum",
    "norm_growth",
]

RTOL = 1e-11
ATOL = 1e-13
ASYMPTOTIC_TOL = 1e-8
ROOT_ACCEPT = 1e-6


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if int(self.n) < 3:
            raise ValueError("grid needs n >= 3")
        if not self.x_max > self.x_min:
            raise ValueError("grid needs x_max > x_min")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, int(self.n))


@dataclass
class SpectrumReport:
    found_energies: list
    residuals: list
    expected: list = field(default_factory=list)
    shot: list = field(default_factory=list)
    confirmed: list = field(default_factory=list)
    degenerate: list = field(default_factory=list)
    length: float = float("nan")

    def matches(self, tol: float = 1e-8) -> bool:
        """Found energies equal the expected ones one-to-one within ``tol``."""
        if len(self.found_energies) != len(self.expected):
            return False
        return all(abs(a - b) <= tol
                   for a, b in zip(sorted(self.found_energies), sorted(self.expected)))


def _require_s1(model: DiracModel):
    if not np.array_equal(np.asarray(model.gamma), S1):
        raise Unsupported("reduction assumes the kinetic matrix S1")


def reduce_to_two_components(model: DiracModel, e: float, x: float) -> np.ndarray:
    """Coefficient matrix ``A`` of ``(psi_A, psi_B)' = A (psi_A, psi_B)``."""
    _require_s1(model)
    v = np.asarray(model.potential(float(x)), dtype=np.complex128).reshape(9)
    try:
        a = reduced_rhs([complex(t) for t in v], float(e), model.hv)
    except AlgebraicDegeneracy as exc:
        raise AlgebraicDegeneracy(e, x) from exc
    return np.array(a, dtype=np.complex128).reshape(2, 2)


def eliminated_component(model: DiracModel, e: float, x: float, psi_ab) -> complex:
    """``psi_C`` reconstructed from ``(psi_A, psi_B)``."""
    v = np.asarray(model.potential(float(x)), dtype=np.complex128)
    den = e - v[2, 2]
    if abs(den) <= DEGENERACY_RTOL * max(1.0, abs(e)):
        raise AlgebraicDegeneracy(e, x)
    return (v[2, 0] * psi_ab[0] + v[2, 1] * psi_ab[1]) / den


def eigen_residual(model: DiracModel, psi: SpinorFunction, e: float, grid: Grid) -> float:
    """``sup ||(H - e) psi||_inf / max(1, sup ||psi||_inf)`` on the grid."""
    xs = grid.points()
    val = np.asarray(psi.value(xs), dtype=np.complex128)
    r = model.apply(psi, xs) - e * val
    return float(np.abs(r).max()) / max(1.0, float(np.abs(val).max()))


def _rates(model: DiracModel) -> Optional[list]:
    if model.kernel is None:
        return None
    code, p = model.kernel
    if code == cf.FREE:
        return [abs(p[0]) / p[1]]
    m, e, hv = p[0], p[1], p[2]
    nu = math.sqrt(max(m * m - e * e, 0.0)) / hv
    if code == cf.CASE1 or code == cf.CASE4:
        return [nu]
    if code in (cf.CASE2, cf.CASE2_MIRROR):
        ee = e if code == cf.CASE2 else -e
        return [nu, math.sqrt(m * (m + ee)) / hv]
    if code == cf.CASE3:
        return [math.sqrt(m * m + e * e) / hv]
    return None


def default_length(model: DiracModel) -> float:
    """``30 / rate`` for the slowest exponential in the potential, else 40."""
    rates = _rates(model)
    if not rates or min(rates) <= 0:
        return 40.0
    return 30.0 / min(rates)


def check_asymptotic(model: DiracModel, length: float, tol: float = ASYMPTOTIC_TOL):
    for side in (-1.0, 1.0):
        a = np.asarray(model.potential(side * length), dtype=np.complex128)
        b = np.asarray(model.potential(2 * side * length), dtype=np.complex128)
        gap = float(np.abs(a - b).max())
        if not gap < tol:
            raise NonAsymptoticPotential(
                f"potential still varies at x={side * length:+g} (change {gap:.3g})")


def integrate_model(model: DiracModel, e: float, x0: float, x1: float, y0,
                    rtol: float = RTOL, atol: float = ATOL) -> np.ndarray:
    """Integrate the reduced system; compiled when the model has a kernel."""
    if model.kernel is not None:
        code, params = model.kernel
        return kernels.integrate_reduced(code, params, e, x0, x1, y0, rtol, atol)[0]
    _require_s1(model)

    def f(x, y):
        a = reduce_to_two_components(model, e, x)
        return [a[0, 0] * y[0] + a[0, 1] * y[1], a[1, 0] * y[0] + a[1, 1] * y[1]]

    return np.array(dopri45(f, x0, x1, list(y0), rtol, atol).y, dtype=np.complex128)


def _phase_fixed(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    k = 0 if abs(v[0]) >= 1e-8 else 1
    return v * (np.conj(v[k]) / abs(v[k]))


def decaying_vector(model: DiracModel, e: float, x: float, side: int) -> Optional[np.ndarray]:
    """Eigenvector of ``A(x)`` decaying towards ``side * inf``; None if propagating."""
    a = reduce_to_two_components(model, e, x)
    lam, vec = np.linalg.eig(a)
    k = int(np.argmin(lam.real)) if side > 0 else int(np.argmax(lam.real))
    if abs(lam[k].real) < 1e-10 or side * lam[k].real >= 0:
        return None
    return _phase_fixed(vec[:, k])


def matching_function(model: DiracModel, e: float, length: float) -> complex:
    """``det[y_L, y_R] / (|y_L| |y_R|)`` at ``x = 0``; NaN where not bound-like."""
    vl = decaying_vector(model, e, -length, -1)
    vr = decaying_vector(model, e, length, 1)
    if vl is None or vr is None:
        return complex("nan")
    yl = integrate_model(model, e, -length, 0.0, vl)
    yr = integrate_model(model, e, length, 0.0, vr)
    det = yl[0] * yr[1] - yl[1] * yr[0]
    return complex(det / (np.linalg.norm(yl) * np.linalg.norm(yr)))


def _degenerate_energies(model: DiracModel, length: float):
    xs = np.linspace(-length, length, 201)
    v33 = np.array([complex(np.asarray(model.potential(float(x)))[2, 2]) for x in xs])
    lo, hi = float(v33.real.min()), float(v33.real.max())
    if hi - lo < 1e-12:
        return [0.5 * (lo + hi) + 0.0], (lo, hi)
    return [lo, hi], (lo, hi)


def _subintervals(e_lo, e_hi, band, pad):
    lo, hi = band
    out = []
    if e_lo < lo - pad:
        out.append((e_lo, min(e_hi, lo - pad)))
    if e_hi > hi + pad:
        out.append((max(e_lo, hi + pad), e_hi))
    return out


def shoot_bound_states(model: DiracModel, e_range: Sequence[float], n_scan: int = 400,
                       length: Optional[float] = None) -> SpectrumReport:
    """Bound energies inside ``e_range`` by shooting.

    Energies where the reduction degenerates are excluded from the scan and
    listed in ``degenerate``; they are not claimed as bound states here.
    """
    _require_s1(model)
    e_lo, e_hi = float(e_range[0]), float(e_range[1])
    if not e_hi > e_lo:
        raise ValueError("empty energy range")
    if n_scan < 2:
        raise ValueError("n_scan must be at least 2")
    length = default_length(model) if length is None else float(length)
    check_asymptotic(model, length)

    degenerate, band = _degenerate_energies(model, length)
    pad = max(1e-6, DEGENERACY_RTOL * 10)
    pieces = _subintervals(e_lo, e_hi, band, pad)
    total = sum(b - a for a, b in pieces)

    roots, residuals = [], []
    for a, b in pieces:
        n = max(2, int(round(n_scan * (b - a) / total)))
        es = np.linspace(a, b, n)
        ws = np.array(pmap(lambda e: matching_function(model, float(e), length), es))
        finite = np.isfinite(ws)
        if not finite.any():
            continue
        k = int(np.argmax(np.where(finite, np.abs(ws), -1.0)))
        rot = np.exp(-1j * np.angle(ws[k]))

        def g(e):
            w = matching_function(model, e, length)
            return (w * rot).real if np.isfinite(w) else float("nan")

        vals = (ws * rot).real
        for i in range(n - 1):
            fa, fb = vals[i], vals[i + 1]
            if not (np.isfinite(fa) and np.isfinite(fb)):
                continue
            if fa == 0.0:
                cand = float(es[i])
            elif fa * fb < 0:
                cand = optimize.brentq(g, float(es[i]), float(es[i + 1]), xtol=1e-13,
                                       rtol=4 * np.finfo(float).eps)
            else:
                continue
            w = abs(matching_function(model, cand, length))
            if w < ROOT_ACCEPT and not any(abs(cand - r) < 1e-9 for r in roots):
                roots.append(cand)
                residuals.append(w)
        if vals[-1] == 0.0 and abs(ws[-1]) < ROOT_ACCEPT:
            roots.append(float(es[-1]))
            residuals.append(abs(ws[-1]))

    order = np.argsort(roots)
    roots = [float(roots[i]) for i in order]
    residuals = [float(residuals[i]) for i in order]
    degenerate = [d for d in degenerate if e_lo <= d <= e_hi]
    return SpectrumReport(found_energies=list(roots), residuals=list(residuals), shot=list(roots),
                          degenerate=degenerate, length=length)


def norm_growth(psi: SpinorFunction, lengths=(10.0, 20.0, 40.0)) -> list[float]:
    """L2 norms of ``psi`` on ``[-L, L]`` for each ``L``."""
    return [l2_norm(psi, -L, L) for L in lengths]


def _confirm_missing(tm: TransformedModel, energy: float, grid: Grid,
                     residual_tol: float, norm_rtol: float):
    best = None
    for j, lam in enumerate(tm.seed.energies):
        if abs(lam - energy) > 1e-12:
            continue
        psi = tm.missing_states[j]
        res = eigen_residual(tm.model, psi, energy, grid)
        norms = norm_growth(psi)
        change = abs(norms[2] - norms[1]) / norms[2]
        ok = res < residual_tol and change < norm_rtol
        if ok and (best is None or res < best):
            best = res
    return best


def case_spectrum(tm: TransformedModel, n_scan: int = 400, margin: float = 0.01,
                  length: Optional[float] = None, grid: Grid = Grid(-10.0, 10.0, 2001),
                  residual_tol: float = 1e-10, norm_rtol: float = 1e-8) -> SpectrumReport:
    """Discrete spectrum of a case model inside the gap ``(-m, m)``.

    Shooting covers the non-degenerate energies; each degenerate energy is
    accepted only if a missing state with that label solves the model to
    ``residual_tol`` and has a convergent norm.
    """
    from .cases import expected_spectrum

    p = tm.case
    if p is None:
        raise ValueError("case_spectrum needs a model built by cases.case_model")
    rep = shoot_bound_states(tm.model, (-p.m + margin, p.m - margin), n_scan, length)
    confirmed, conf_res = [], []
    for d in rep.degenerate:
        r = _confirm_missing(tm, d, grid, residual_tol, norm_rtol)
        if r is not None:
            confirmed.append(d)
            conf_res.append(r)
    pairs = sorted(zip(rep.shot + confirmed, rep.residuals + conf_res))
    rep.found_energies = [e for e, _ in pairs]
    rep.residuals = [r for _, r in pairs]
    rep.confirmed = confirmed
    rep.expected = expected_spectrum(p)
    return rep

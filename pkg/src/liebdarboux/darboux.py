"""Generic matrix Darboux transformation of a first-order Dirac operator.

Given three eigensolutions ``U = (psi_1, psi_2, psi_3)`` of ``H`` the
intertwiner ``L = d/dx - U' U^{-1}`` maps ``H`` to

    H~ = H + i hv [U' U^{-1}, gamma],

and the columns of ``(U^{-1})^dagger`` solve ``H~`` at the seed energies
(the missing states).  ``W = U' U^{-1}`` is formed from analytic
derivatives with the adjugate and division carried in double-double, see
:mod:`liebdarboux.kernels`.

Regularity is judged by the Hadamard-normalised determinant
``|det U| / prod_j |U e_j|``, which lies in ``[0, 1]`` and is insensitive to
columns growing at different exponential rates.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import mpmath as mp
import numpy as np
from scipy import integrate, optimize

from . import kernels
from .algebra import HermiticityCheck, adjugate3, det3, is_hermitian
from .errors import InconsistentLabels, SingularSeed
from .free_model import DiracModel, SpinorFunction

__all__ = [
    "SeedMatrix",
    "TransformedModel",
    "RegularityReport",
    "HermiticityReport",
    "REGULARITY_THRESHOLD",
    "seed_matrix",
    "seed_determinant",
    "normalized_determinant",
    "regularity_scan",
    "log_derivative",
    "log_derivative_mp",
    "inverse_mp",
    "apply_intertwiner",
    "transformed_potential",
    "darboux_transform",
    "missing_states",
    "mapped_state",
    "intertwining_residual",
    "hermiticity_report",
    "l2_norm",
    "normalized",
]

REGULARITY_THRESHOLD = 1e-10
LABEL_TOL = 1e-12


@dataclass(frozen=True)
class SeedMatrix:
    """Three seed solutions and their factorization energies."""

    columns: tuple[SpinorFunction, SpinorFunction, SpinorFunction]
    energies: tuple[float, float, float]

    def _stack(self, attr: str, x):
        cols = [getattr(c, attr)(x) for c in self.columns]
        return np.stack(cols, axis=-1)

    def value(self, x) -> np.ndarray:
        return self._stack("value", x)

    def derivative(self, x) -> np.ndarray:
        return self._stack("derivative", x)

    @property
    def has_second_derivative(self) -> bool:
        return all(c.second_derivative is not None for c in self.columns)

    def second_derivative(self, x) -> np.ndarray:
        if not self.has_second_derivative:
            raise ValueError("a seed column has no second derivative")
        return self._stack("second_derivative", x)


def _label_matches(psi: SpinorFunction, lam) -> bool:
    if lam == "flat-band":
        return psi.flat_band
    lam = float(lam)
    if psi.flat_band:
        return lam == 0.0
    return abs(psi.energy - lam) <= LABEL_TOL * max(1.0, abs(lam))


def seed_matrix(psi1: SpinorFunction, psi2: SpinorFunction, psi3: SpinorFunction,
                energies: Optional[Sequence] = None) -> SeedMatrix:
    """Assemble ``U = (psi1, psi2, psi3)``.

    ``energies`` defaults to the columns' own labels; when given, each entry
    must match its column (``"flat-band"`` or ``0`` for flat-band columns).
    """
    cols = (psi1, psi2, psi3)
    if energies is None:
        energies = [c.energy for c in cols]
    if len(energies) != 3:
        raise ValueError("need exactly three factorization energies")
    for j, (c, lam) in enumerate(zip(cols, energies)):
        if not _label_matches(c, lam):
            raise InconsistentLabels(
                f"column {j} solves E={c.energy_label!r} but was labelled {lam!r}")
    lams = tuple(0.0 if lam == "flat-band" else float(lam) for lam in energies)
    return SeedMatrix(cols, lams)


def seed_determinant(u: SeedMatrix, x):
    """``det U(x)`` by cofactor expansion."""
    d = det3(u.value(x))
    return complex(d) if np.ndim(d) == 0 else d


def _column_norm_product(mat):
    return np.prod(np.linalg.norm(mat, axis=-2), axis=-1)


def normalized_determinant(u: SeedMatrix, x):
    """``|det U| / prod_j ||U e_j||``; 1 for orthogonal columns, 0 if singular."""
    mat = np.asarray(u.value(x), dtype=np.complex128)
    _, det = kernels.inverse_det(mat)
    return np.abs(det) / _column_norm_product(mat)


@dataclass(frozen=True)
class RegularityReport:
    min_abs_det: float
    argmin_abs_det: float
    min_ratio: float
    argmin_ratio: float
    threshold: float
    passed: bool

    def __bool__(self) -> bool:
        return self.passed


def _polish_zero(u: SeedMatrix, x: float, lo: float, hi: float, iters: int = 8) -> float:
    """Gauss-Newton steps towards the point minimising ``|det U|`` on the line.

    ``d/dx det U = tr(adj(U) U')`` (Jacobi), which stays well defined at a
    zero of the determinant.
    """
    for _ in range(iters):
        mat = u.value(x)
        d = det3(mat)
        dd = np.trace(adjugate3(mat) @ u.derivative(x))
        g = abs(dd) ** 2
        if g == 0 or d == 0:
            break
        step = (np.conj(dd) * d).real / g
        x_new = min(max(x - step, lo), hi)
        if x_new == x:
            break
        x = x_new
    return float(x)


def _refine_min(u: SeedMatrix, f: Callable[[float], float], xs, vals, i):
    lo = float(xs[max(i - 1, 0)])
    hi = float(xs[min(i + 1, len(xs) - 1)])
    best_x, best_v = float(xs[i]), float(vals[i])
    if hi <= lo:
        return best_x, best_v
    res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-12 * max(1.0, abs(best_x))})
    if res.fun < best_v:
        best_x, best_v = float(res.x), float(res.fun)
    xp = _polish_zero(u, best_x, lo, hi)
    vp = float(f(xp))
    if vp < best_v:
        best_x, best_v = xp, vp
    return best_x, best_v


def regularity_scan(u: SeedMatrix, domain=(-10.0, 10.0), n: int = 4001,
                    threshold: float = REGULARITY_THRESHOLD, refine: bool = True
                    ) -> RegularityReport:
    """Sample the determinant on a uniform grid and refine around its minimum.

    Passes iff the normalised determinant stays above ``threshold``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    xs = np.linspace(float(domain[0]), float(domain[1]), int(n))
    mat = np.asarray(u.value(xs), dtype=np.complex128)
    _, det = kernels.inverse_det(mat)
    absdet = np.abs(det)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = absdet / _column_norm_product(mat)
    ratio = np.where(np.isfinite(ratio), ratio, 0.0)
    i_det = int(np.argmin(absdet))
    i_rat = int(np.argmin(ratio))
    x_det, v_det = float(xs[i_det]), float(absdet[i_det])
    x_rat, v_rat = float(xs[i_rat]), float(ratio[i_rat])
    if refine:
        x_det, v_det = _refine_min(u, lambda t: abs(seed_determinant(u, t)), xs, absdet, i_det)
        x_rat, v_rat = _refine_min(u, lambda t: float(normalized_determinant(u, t)), xs, ratio,
                                   i_rat)
    return RegularityReport(v_det, x_det, v_rat, x_rat, threshold, bool(v_rat > threshold))


def _check_regular(mat, det, x, threshold=REGULARITY_THRESHOLD):
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.abs(det) / _column_norm_product(mat)
    bad = ~(ratio > threshold)
    if np.any(bad):
        k = int(np.flatnonzero(np.ravel(bad))[0])
        xk = float(np.ravel(np.asarray(x, dtype=float) + np.zeros(np.shape(bad)))[k])
        raise SingularSeed(xk, complex(np.ravel(det)[k]), float(np.ravel(ratio)[k]))


def log_derivative(u: SeedMatrix, x, second: bool = False):
    """``W = U' U^{-1}`` (and ``U'' U^{-1}`` if ``second``) at ``x``.

    Raises :class:`SingularSeed` where the seed fails the regularity test.
    """
    mat = np.asarray(u.value(x), dtype=np.complex128)
    d1 = np.asarray(u.derivative(x), dtype=np.complex128)
    d2 = np.asarray(u.second_derivative(x), dtype=np.complex128) if second else None
    w, w2, det = kernels.log_derivative(mat, d1, d2)
    _check_regular(mat, det, x)
    return (w, w2) if second else w


def _mp_matrices(u: SeedMatrix, x: float, derivative: bool):
    xm = mp.mpf(x)
    um = mp.matrix(3, 3)
    dm = mp.matrix(3, 3) if derivative else None
    for j, col in enumerate(u.columns):
        v = col.value(xm)
        dv = col.derivative(xm) if derivative else None
        for i in range(3):
            um[i, j] = mp.mpc(v[i])
            if derivative:
                dm[i, j] = mp.mpc(dv[i])
    return um, dm


def _adaptive_mp(u: SeedMatrix, x: float, build, dps: int, tol: float, max_dps: int):
    prev = None
    while dps <= max_dps:
        with mp.workdps(dps):
            try:
                out = build(*_mp_matrices(u, x, True))
            except (ZeroDivisionError, TypeError):
                # mpmath's LU pivoting fails with TypeError on a numerically
                # singular matrix; more digits are needed
                out = None
            cur = None if out is None else np.array(
                [[complex(out[i, j]) for j in range(3)] for i in range(3)])
        if cur is not None and prev is not None:
            scale = max(1.0, float(np.abs(cur).max()))
            if float(np.abs(cur - prev).max()) <= tol * scale:
                return cur
        prev = cur
        dps *= 2
    raise SingularSeed(x, 0.0, None)


def log_derivative_mp(u: SeedMatrix, x: float, dps: int = 30, tol: float = 1e-14,
                      max_dps: int = 480) -> np.ndarray:
    """``U' U^{-1}`` at a single point in arbitrary precision.

    Precision is doubled until two successive results agree to ``tol``
    (relative, max norm).  Needed far out where the seed columns coincide in
    double precision.
    """
    return _adaptive_mp(u, float(x), lambda um, dm: dm * mp.inverse(um), dps, tol, max_dps)


def inverse_mp(u: SeedMatrix, x: float, dps: int = 30, tol: float = 1e-14,
               max_dps: int = 480) -> np.ndarray:
    """``U^{-1}`` at a single point in arbitrary precision."""
    return _adaptive_mp(u, float(x), lambda um, dm: mp.inverse(um), dps, tol, max_dps)


def apply_intertwiner(u: SeedMatrix, psi: SpinorFunction, x) -> np.ndarray:
    """``(L psi)(x) = psi'(x) - W(x) psi(x)``."""
    w = log_derivative(u, x)
    val = np.asarray(psi.value(x), dtype=np.complex128)
    return np.asarray(psi.derivative(x), dtype=np.complex128) - np.einsum("...ij,...j->...i", w, val)


def _bracket(w, gamma):
    return w @ gamma - gamma @ w


def transformed_potential(u: SeedMatrix, base: DiracModel, x) -> np.ndarray:
    """``V(x) + i hv [W(x), gamma]``."""
    w = log_derivative(u, x)
    v = np.asarray(base.potential(x), dtype=np.complex128)
    return v + 1j * base.hv * _bracket(w, np.asarray(base.gamma))


def _transformed_potential_derivative(u: SeedMatrix, base: DiracModel, x) -> np.ndarray:
    w, w2 = log_derivative(u, x, second=True)
    wp = w2 - w @ w
    dv = base.potential_derivative(x) if base.potential_derivative is not None else 0
    return np.asarray(dv, dtype=np.complex128) + 1j * base.hv * _bracket(wp, np.asarray(base.gamma))


@dataclass(frozen=True)
class TransformedModel:
    model: DiracModel
    seed: SeedMatrix
    base: DiracModel
    missing_states: tuple[SpinorFunction, SpinorFunction, SpinorFunction] = field(repr=False)
    case: object = None

    @property
    def potential(self):
        return self.model.potential


def missing_states(u: SeedMatrix) -> tuple[SpinorFunction, SpinorFunction, SpinorFunction]:
    """Columns of ``(U^{-1})^dagger``, unnormalised.

    Their derivative is ``-W^dagger (U^{-1})^dagger`` column-wise.  Points
    where the seed is too ill-conditioned for double precision are
    recomputed with :func:`inverse_mp` / :func:`log_derivative_mp`; only a
    seed that is singular at high precision raises :class:`SingularSeed`.
    """

    def fields(x):
        xs = np.asarray(x, dtype=float)
        flat = xs.reshape(-1)
        mat = np.asarray(u.value(flat), dtype=np.complex128)
        d1 = np.asarray(u.derivative(flat), dtype=np.complex128)
        w, _, det = kernels.log_derivative(mat, d1)
        inv, _ = kernels.inverse_det(mat)
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.abs(det) / _column_norm_product(mat)
        for k in np.flatnonzero(~(ratio > REGULARITY_THRESHOLD)):
            inv[k] = inverse_mp(u, float(flat[k]))
            w[k] = log_derivative_mp(u, float(flat[k]))
        dag = np.conj(np.swapaxes(inv, -1, -2))
        return dag.reshape(xs.shape + (3, 3)), w.reshape(xs.shape + (3, 3))

    def make(j):
        def value(x):
            return fields(x)[0][..., :, j]

        def derivative(x):
            dag, w = fields(x)
            return -np.einsum("...ki,...k->...i", np.conj(w), dag[..., :, j])

        return SpinorFunction(value, derivative, None, energy=u.energies[j],
                              name=f"missing[{j}]")

    return tuple(make(j) for j in range(3))


def mapped_state(u: SeedMatrix, psi: SpinorFunction) -> SpinorFunction:
    """``L psi`` as a spinor function with analytic derivative.

    The derivative ``psi'' - W' psi - W psi'`` uses ``W' = U'' U^{-1} - W^2``
    and so needs second derivatives of ``psi`` and of the seed columns.
    """

    def value(x):
        return apply_intertwiner(u, psi, x)

    def derivative(x):
        if psi.second_derivative is None:
            raise ValueError(f"{psi.name} has no second derivative")
        w, w2 = log_derivative(u, x, second=True)
        wp = w2 - w @ w
        p0 = np.asarray(psi.value(x), dtype=np.complex128)
        p1 = np.asarray(psi.derivative(x), dtype=np.complex128)
        p2 = np.asarray(psi.second_derivative(x), dtype=np.complex128)
        mv = lambda a, b: np.einsum("...ij,...j->...i", a, b)  # noqa: E731
        return p2 - mv(wp, p0) - mv(w, p1)

    return SpinorFunction(value, derivative, None, energy=psi.energy, flat_band=psi.flat_band,
                          name=f"L*{psi.name}")


def darboux_transform(base: DiracModel, u: SeedMatrix, name: str = "",
                      kernel=None) -> TransformedModel:
    """Build ``H~`` from ``base`` and the seed ``u``."""
    def pot_d(x):
        return _transformed_potential_derivative(u, base, x)

    model = DiracModel(
        gamma=base.gamma,
        hv=base.hv,
        potential=lambda x: transformed_potential(u, base, x),
        potential_derivative=pot_d if u.has_second_derivative else None,
        hermitian=False,
        kernel=kernel,
        name=name or f"darboux({base.name})",
    )
    return TransformedModel(model, u, base, missing_states(u))


def intertwining_residual(base: DiracModel, u: SeedMatrix, psi: SpinorFunction,
                          domain=(-10.0, 10.0), n: int = 2001, relative: bool = False) -> float:
    """``sup_x || L(H psi) - H~(L psi) ||_inf`` on a uniform grid.

    Every derivative is analytic.  With ``relative=True`` the residual is
    divided by ``max(1, sup ||psi||_inf)``.
    """
    xs = np.linspace(float(domain[0]), float(domain[1]), int(n))
    if psi.second_derivative is None:
        raise ValueError(f"{psi.name} has no second derivative")
    w, w2 = log_derivative(u, xs, second=True)
    wp = w2 - w @ w
    gamma = np.asarray(base.gamma)
    mv = lambda a, b: np.einsum("...ij,...j->...i", a, b)  # noqa: E731

    p0 = np.asarray(psi.value(xs), dtype=np.complex128)
    p1 = np.asarray(psi.derivative(xs), dtype=np.complex128)
    p2 = np.asarray(psi.second_derivative(xs), dtype=np.complex128)

    # L (H psi)
    h_psi = base.apply(psi, xs)
    dh_psi = base.apply_derivative(psi, xs)
    lhs = dh_psi - mv(w, h_psi)

    # H~ (L psi)
    l_psi = p1 - mv(w, p0)
    dl_psi = p2 - mv(wp, p0) - mv(w, p1)
    v = np.asarray(base.potential(xs), dtype=np.complex128) + 1j * base.hv * _bracket(w, gamma)
    rhs = -1j * base.hv * (dl_psi @ gamma.T) + mv(v, l_psi)

    res = float(np.abs(lhs - rhs).max())
    if relative:
        res /= max(1.0, float(np.abs(p0).max()))
    return res


@dataclass(frozen=True)
class HermiticityReport:
    max_defect: float
    location: float
    index: tuple[int, int]
    tol: float
    passed: bool

    def __bool__(self) -> bool:
        return self.passed


def hermiticity_report(u: SeedMatrix, base: DiracModel, domain=(-10.0, 10.0), n: int = 2001,
                       tol: float = 1e-12) -> HermiticityReport:
    """Largest hermiticity defect of the transformed potential on a grid."""
    xs = np.linspace(float(domain[0]), float(domain[1]), int(n))
    v = transformed_potential(u, base, xs)
    return potential_hermiticity(v, xs, tol)


def potential_hermiticity(v, xs, tol: float = 1e-12) -> HermiticityReport:
    """Hermiticity report for a sampled ``(n, 3, 3)`` potential."""
    diff = np.abs(v - np.conj(np.swapaxes(v, -1, -2)))
    per_x = diff.reshape(len(xs), 9).max(axis=1)
    k = int(np.argmax(per_x))
    check: HermiticityCheck = is_hermitian(v[k], tol)
    return HermiticityReport(check.defect, float(xs[k]), check.index, tol, check.defect <= tol)


def l2_norm(psi: SpinorFunction, a: float, b: float, points=None) -> float:
    """``sqrt(int_a^b ||psi||^2 dx)`` by adaptive quadrature."""

    def dens(x):
        v = np.asarray(psi.value(x), dtype=np.complex128)
        return float(np.sum(np.abs(v) ** 2))

    with warnings.catch_warnings():
        # the requested tolerance is near rounding; quad warns but converges
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(dens, a, b, points=points, limit=400, epsabs=0.0,
                                epsrel=1e-12)
    return math.sqrt(val)


def normalized(psi: SpinorFunction, a: float, b: float) -> SpinorFunction:
    """``psi`` scaled to unit L2 norm on the finite interval ``[a, b]``."""
    nrm = l2_norm(psi, a, b)
    if nrm == 0 or not math.isfinite(nrm):
        raise ValueError("state cannot be normalised on the given interval")
    return psi.scaled(1.0 / nrm)

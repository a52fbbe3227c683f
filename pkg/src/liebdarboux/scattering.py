"""Reflection and transmission through a transformed potential.

A scattering state is built from the right: a pure right-moving wave at
``x = +L`` is integrated back to ``x = -L`` and decomposed into incoming
and reflected plane waves there.  Plane waves on each side are eigenvectors
of the (constant) reduced coefficient matrix, normalised to unit probability
flux ``j = 2 hv Re(conj(psi_A) psi_B)``, so asymmetric asymptotics need no
separate group-velocity correction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .darboux import SeedMatrix, TransformedModel, log_derivative_mp
from .errors import DarbouxError, EvanescentEnergy, NoAsymptote
from .free_model import DiracModel
from ._parallel import pmap
from .spectral import (check_asymptotic, default_length, integrate_model,
                       reduce_to_two_components)

__all__ = [
    "ScatterResult",
    "asymptotic_w",
    "band_edge",
    "plane_waves",
    "reflection_coefficient",
    "scatter_scan",
]

REFLECTION_FLOOR = 1e-14
W_TOL = 1e-8


@dataclass
class ScatterResult:
    energy: float
    reflection: float
    transmission: float
    w_plus: Optional[np.ndarray] = None
    w_minus: Optional[np.ndarray] = None
    k_left: float = float("nan")
    k_right: float = float("nan")
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def flux_defect(self) -> float:
        return abs(self.reflection + self.transmission - 1.0)


def asymptotic_w(u: SeedMatrix, length: float, tol: float = W_TOL):
    """``U'U^-1`` at ``-L`` and ``+L``, checked against ``-2L`` and ``+2L``."""
    if not length > 0:
        raise ValueError("length must be positive")
    out = []
    for side in (-1.0, 1.0):
        w1 = np.asarray(log_derivative_mp(u, side * length), dtype=np.complex128)
        w2 = np.asarray(log_derivative_mp(u, 2 * side * length), dtype=np.complex128)
        gap = float(np.abs(w1 - w2).max())
        if not gap < tol:
            raise NoAsymptote(f"U'U^-1 still varies at x={side * length:+g} (change {gap:.3g})")
        out.append(w1)
    return out[0], out[1]


def band_edge(model: DiracModel, side: int, length: float, kmax: Optional[float] = None,
              nk: int = 4001) -> float:
    """Lowest ``|E|`` of the dispersive bands of the asymptotic potential on ``side``.

    Bands of ``hv k S1 + V(side * L)`` that do not move with ``k`` are flat and
    ignored.
    """
    v = np.asarray(model.potential(side * length), dtype=np.complex128)
    v = 0.5 * (v + v.conj().T)
    scale = max(1.0, float(np.abs(v).max()))
    kmax = 10.0 * scale / model.hv if kmax is None else kmax
    ks = np.linspace(-kmax, kmax, nk)
    h = model.hv * ks[:, None, None] * np.asarray(model.gamma) + v
    bands = np.linalg.eigvalsh(h)
    edge = np.inf
    for b in bands.T:
        if b.max() - b.min() < 1e-9 * scale:
            continue
        edge = min(edge, float(np.abs(b).min()))
    return edge


def _flux(v, hv):
    return 2.0 * hv * float(np.real(np.conj(v[0]) * v[1]))


def plane_waves(model: DiracModel, e: float, x: float):
    """Unit-flux right- and left-moving plane waves ``(v_plus, v_minus, k)`` at ``x``."""
    a = reduce_to_two_components(model, e, x)
    lam, vec = np.linalg.eig(a)
    if np.abs(lam.real).max() > 1e-9 * max(1.0, float(np.abs(lam).max())):
        raise EvanescentEnergy(f"energy {e!r} is not propagating at x={x:+g}")
    fl = [_flux(vec[:, j], model.hv) for j in range(2)]
    if min(abs(f) for f in fl) < 1e-300:
        raise EvanescentEnergy(f"zero flux at energy {e!r} (band edge)")
    j_plus = 0 if fl[0] > 0 else 1
    j_minus = 1 - j_plus
    if not fl[j_minus] < 0:
        raise EvanescentEnergy(f"no counter-propagating pair at energy {e!r}")
    v_plus = vec[:, j_plus] / np.sqrt(fl[j_plus])
    v_minus = vec[:, j_minus] / np.sqrt(-fl[j_minus])
    return v_plus, v_minus, float(abs(lam[j_plus].imag))


def reflection_coefficient(model: Union[DiracModel, TransformedModel], e: float,
                           length: Optional[float] = None) -> ScatterResult:
    """``|r|^2`` and flux-weighted ``|t|^2`` at energy ``e``."""
    seed = None
    if isinstance(model, TransformedModel):
        seed = model.seed
        model = model.model
    e = float(e)
    length = default_length(model) if length is None else float(length)
    check_asymptotic(model, length)

    vp_r, _, k_right = plane_waves(model, e, length)
    vp_l, vm_l, k_left = plane_waves(model, e, -length)
    y = integrate_model(model, e, length, -length, vp_r)
    alpha, beta = np.linalg.solve(np.column_stack([vp_l, vm_l]), y)
    na = abs(alpha) ** 2
    refl = max(abs(beta) ** 2 / na, REFLECTION_FLOOR)
    trans = 1.0 / na

    w_minus = w_plus = None
    if seed is not None:
        w_minus, w_plus = asymptotic_w(seed, length)
    return ScatterResult(energy=e, reflection=float(refl), transmission=float(trans),
                         w_plus=w_plus, w_minus=w_minus, k_left=k_left, k_right=k_right)


def scatter_scan(model: Union[DiracModel, TransformedModel], energies: Sequence[float],
                 length: Optional[float] = None) -> list[ScatterResult]:
    """``reflection_coefficient`` over ``energies``; failures are recorded, not raised."""

    def one(e):
        try:
            return reflection_coefficient(model, e, length)
        except DarbouxError as exc:
            nan = float("nan")
            return ScatterResult(energy=float(e), reflection=nan, transmission=nan,
                                 error=f"{type(exc).__name__}: {exc}")

    return pmap(one, list(energies))

"""Tight-binding Lieb lattice with anisotropic hopping.

Sites ``A``, ``B`` and ``C`` per cell; ``tau1``/``tau3`` couple ``A`` and ``B``
along x, ``tau2``/``tau4`` couple ``A`` and ``C`` along y, and ``t3`` is a
Haldane-like ``B``-``C`` hopping with phase ``pi/2``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import kernels
from ._parallel import pmap
from .algebra import S1, S1T, S2, S2T, S3
from .errors import InvalidParameters, RegimeViolation, Unsupported

__all__ = [
    "TBParams",
    "BandSurface",
    "bloch_hamiltonian",
    "dispersion_regime1",
    "dispersion_regime2",
    "expanded_hamiltonian",
    "band_scan",
    "dirac_point",
    "bands_at",
    "EXPANSION_WARN",
]

EXPANSION_WARN = 0.3


@dataclass(frozen=True)
class TBParams:
    tau1: float = 1.0
    tau2: float = 1.0
    tau3: float = 1.0
    tau4: float = 1.0
    t3: float = 0.0
    muA: float = 0.0
    muB: float = 0.0
    muC: float = 0.0
    a: float = 1.0
    lambda_phase: float = math.pi / 2

    def __post_init__(self):
        for name, val in asdict(self).items():
            if not math.isfinite(val):
                raise InvalidParameters(f"{name} must be finite")
        if not self.a > 0:
            raise InvalidParameters("lattice constant a must be positive")

    @property
    def taus(self) -> tuple[float, float, float, float]:
        return (self.tau1, self.tau2, self.tau3, self.tau4)

    @property
    def mus(self) -> tuple[float, float, float]:
        return (self.muA, self.muB, self.muC)


def _check_phase(p: TBParams):
    if abs(p.lambda_phase - math.pi / 2) > 1e-15:
        raise Unsupported("only the NNN phase pi/2 is implemented")


def bloch_hamiltonian(k, p: TBParams) -> np.ndarray:
    """Bloch matrix at ``k = (kx, ky)``; arrays of k give a stack ``(..., 3, 3)``."""
    _check_phase(p)
    kx, ky = np.asarray(k[0], dtype=float), np.asarray(k[1], dtype=float)
    ax, ay = p.a * kx, p.a * ky
    ex, ey = np.exp(1j * ax), np.exp(1j * ay)
    nnn = 4j * p.t3 * np.sin(ax) * np.sin(ay)
    shape = np.broadcast(ax, ay).shape
    h = np.zeros(shape + (3, 3), dtype=np.complex128)
    h[..., 0, 0] = -p.muA
    h[..., 1, 1] = -p.muB
    h[..., 2, 2] = -p.muC
    h[..., 0, 1] = p.tau1 * ex + p.tau3 * np.conj(ex)
    h[..., 0, 2] = p.tau2 * ey + p.tau4 * np.conj(ey)
    h[..., 1, 0] = p.tau1 * np.conj(ex) + p.tau3 * ex
    h[..., 2, 0] = p.tau2 * np.conj(ey) + p.tau4 * ey
    h[..., 1, 2] = nnn
    h[..., 2, 1] = -nnn
    return -h


def dispersion_regime1(k, p: TBParams):
    """``(0, E+, E-)`` for ``tau1 = tau3``, ``tau2 = tau4`` and zero on-site terms."""
    if p.tau1 != p.tau3 or p.tau2 != p.tau4 or any(p.mus):
        raise RegimeViolation("regime 1 needs tau1=tau3, tau2=tau4 and all mu = 0")
    ax, ay = p.a * np.asarray(k[0], dtype=float), p.a * np.asarray(k[1], dtype=float)
    e = 2 * np.sqrt(p.tau1 ** 2 * np.cos(ax) ** 2 + p.tau2 ** 2 * np.cos(ay) ** 2
                    + 4 * p.t3 ** 2 * np.sin(ax) ** 2 * np.sin(ay) ** 2)
    return np.zeros_like(e), e, -e


def dispersion_regime2(k, p: TBParams):
    """``(0, E+, E-)`` for ``t3 = 0`` and zero on-site terms, arbitrary hoppings.

    The cosine arguments are ``2 a k``: the distance between equivalent ``B``
    (or ``C``) sites.
    """
    if p.t3 != 0 or any(p.mus):
        raise RegimeViolation("regime 2 needs t3=0 and all mu = 0")
    ax, ay = p.a * np.asarray(k[0], dtype=float), p.a * np.asarray(k[1], dtype=float)
    t1, t2, t3, t4 = p.taus
    arg = (t1 * t1 + t2 * t2 + t3 * t3 + t4 * t4
           + 2 * t1 * t3 * np.cos(2 * ax) + 2 * t2 * t4 * np.cos(2 * ay))
    e = np.sqrt(np.maximum(arg, 0.0))
    return np.zeros_like(e), e, -e


def dirac_point(p: TBParams) -> tuple[float, float]:
    return (math.pi / (2 * p.a), math.pi / (2 * p.a))


def expanded_hamiltonian(dk, p: TBParams) -> np.ndarray:
    """First-order expansion of the Bloch matrix around ``(pi/2a, pi/2a)``."""
    _check_phase(p)
    dkx, dky = float(dk[0]), float(dk[1])
    if math.hypot(dkx, dky) * p.a > EXPANSION_WARN:
        warnings.warn(f"|dk| a = {math.hypot(dkx, dky) * p.a:.3g} is outside the "
                      "small-momentum regime", RuntimeWarning, stacklevel=2)
    return (p.a * (p.tau1 + p.tau3) * dkx * S1 + p.a * (p.tau2 + p.tau4) * dky * S2
            + np.diag(np.array(p.mus, dtype=np.complex128))
            + (p.tau1 - p.tau3) * S1T + (p.tau2 - p.tau4) * S2T + 4 * p.t3 * S3)


@dataclass
class BandSurface:
    """Bands on a square k-grid; ``bands[i, j]`` is sorted and belongs to ``(kx[i], ky[j])``."""

    kx: np.ndarray
    ky: np.ndarray
    bands: np.ndarray
    params: TBParams

    @property
    def nk(self) -> int:
        return len(self.kx)

    @property
    def k_grid(self) -> np.ndarray:
        gx, gy = np.meshgrid(self.kx, self.ky, indexing="ij")
        return np.stack([gx, gy], axis=-1)

    def middle_band_range(self) -> tuple[float, float]:
        mid = self.bands[..., 1]
        return float(mid.min()), float(mid.max())

    def to_csv(self) -> str:
        """Columns ``kx, ky, E0, E+, E-``; ``E0`` is the middle band."""
        lines = ["kx,ky,E0,E+,E-"]
        fmt = "{:.16e}"
        for i, kx in enumerate(self.kx):
            for j, ky in enumerate(self.ky):
                lo, mid, hi = self.bands[i, j]
                lines.append(",".join(fmt.format(float(v)) for v in (kx, ky, mid, hi, lo)))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "schema": 1,
            "kind": "bands",
            "params": asdict(self.params),
            "grid": {"nk": self.nk, "kx": [float(v) for v in self.kx],
                     "ky": [float(v) for v in self.ky]},
            "band_order": ["E0", "E+", "E-"],
            "bands": [[[float(v) for v in self.bands[i, :, b]] for i in range(self.nk)]
                      for b in (1, 2, 0)],
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def band_scan(p: TBParams, nk: int = 100) -> BandSurface:
    """Diagonalise the Bloch matrix on ``nk x nk`` points of ``[-pi/2a, pi/2a]^2``."""
    if int(nk) < 2:
        raise ValueError("nk must be at least 2")
    nk = int(nk)
    half = math.pi / (2 * p.a)
    kx = np.linspace(-half, half, nk)
    ky = kx.copy()

    def row(i):
        h = bloch_hamiltonian((np.full(nk, kx[i]), ky), p)
        return kernels.eigvalsh3(h)

    bands = np.stack(pmap(row, range(nk)))
    return BandSurface(kx=kx, ky=ky, bands=bands, params=p)


def bands_at(k: Sequence[float], p: TBParams) -> np.ndarray:
    return kernels.eigvalsh3(bloch_hamiltonian(k, p))

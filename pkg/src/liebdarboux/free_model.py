"""Free pseudospin-1 Dirac Hamiltonian and its eigensolution catalog.

The free model is ``H = -i hv S1 d/dx + m S3``.  Its eigensolutions come in
three families: gapped solutions for ``|eps| < |m|``, threshold solutions at
``eps = +-m`` and the zero-energy flat-band family built from an arbitrary
profile ``chi``.

Every solution carries closed-form first and second derivatives so that
downstream Darboux formulas never rely on numerical differentiation.
Closures accept a float, a float array (vectorised, trailing axis of length
3) or an ``mpmath.mpf`` for high-precision evaluation.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field, replace
from typing import Callable, Literal, Optional, Sequence

import numpy as np

from . import _mathfn as fn
from .algebra import S1, S3
from .errors import DegenerateSeed, EnergyOutOfRange

__all__ = [
    "DiracModel",
    "SpinorFunction",
    "FlatBandProfile",
    "free_hamiltonian",
    "gap_solution",
    "threshold_solution",
    "exponential_solution",
    "flat_band_solution",
    "chiral_partner",
    "cosh_profile",
    "sinh_profile",
    "exp_profile",
    "plane_wave_profile",
    "poly_exp_profile",
    "gaussian_wave_profile",
    "linear_profile",
    "probe_solutions",
]

Parity = Literal["odd_A", "even_A"]
FLAT_BAND = "flat-band"


@dataclass(frozen=True)
class SpinorFunction:
    """Analytic map ``x -> C^3`` with analytic derivatives.

    ``energy`` is the eigenvalue the function solves the free model for;
    flat-band solutions have ``energy == 0`` and ``flat_band == True``.
    """

    value: Callable
    derivative: Callable
    second_derivative: Optional[Callable] = None
    energy: float = 0.0
    flat_band: bool = False
    name: str = ""

    def __call__(self, x):
        return self.value(x)

    @property
    def energy_label(self):
        return FLAT_BAND if self.flat_band else self.energy

    def scaled(self, c: complex) -> "SpinorFunction":
        """Multiply by a constant (derivatives follow)."""
        d2 = self.second_derivative
        return replace(
            self,
            value=lambda x: c * self.value(x),
            derivative=lambda x: c * self.derivative(x),
            second_derivative=None if d2 is None else (lambda x: c * d2(x)),
        )


@dataclass(frozen=True)
class FlatBandProfile:
    """Profile ``chi`` of a flat-band state with its derivatives.

    ``chi_triple_prime`` is optional; it is only needed when the second
    derivative of the flat-band spinor is requested.
    """

    chi: Callable
    chi_prime: Callable
    chi_double_prime: Callable
    chi_triple_prime: Optional[Callable] = None
    name: str = ""
    real: bool = True


@dataclass(frozen=True)
class DiracModel:
    """``H = -i hv gamma d/dx + V(x)`` on the real line.

    ``kernel`` optionally names a closed-form potential known to the compiled
    integrator, as ``(code, params)``; generic models leave it ``None``.
    """

    gamma: np.ndarray
    hv: float
    potential: Callable
    potential_derivative: Optional[Callable] = None
    hermitian: bool = True
    kernel: Optional[tuple[int, tuple[float, ...]]] = field(default=None, compare=False)
    name: str = ""

    def apply(self, psi: SpinorFunction, x) -> np.ndarray:
        """Evaluate ``(H psi)(x)`` using the analytic derivative of ``psi``."""
        dpsi = np.asarray(psi.derivative(x), dtype=np.complex128)
        val = np.asarray(psi.value(x), dtype=np.complex128)
        v = np.asarray(self.potential(x), dtype=np.complex128)
        kinetic = -1j * self.hv * (dpsi @ np.asarray(self.gamma).T)
        return kinetic + np.einsum("...ij,...j->...i", v, val)

    def apply_derivative(self, psi: SpinorFunction, x) -> np.ndarray:
        """Evaluate ``d/dx (H psi)(x)``; needs ``psi.second_derivative``."""
        if psi.second_derivative is None:
            raise ValueError(f"{psi.name or 'spinor'} has no second derivative")
        d2 = np.asarray(psi.second_derivative(x), dtype=np.complex128)
        d1 = np.asarray(psi.derivative(x), dtype=np.complex128)
        val = np.asarray(psi.value(x), dtype=np.complex128)
        v = np.asarray(self.potential(x), dtype=np.complex128)
        out = -1j * self.hv * (d2 @ np.asarray(self.gamma).T)
        out = out + np.einsum("...ij,...j->...i", v, d1)
        if self.potential_derivative is not None:
            dv = np.asarray(self.potential_derivative(x), dtype=np.complex128)
            out = out + np.einsum("...ij,...j->...i", dv, val)
        return out


def _constant_matrix(mat: np.ndarray) -> Callable:
    mat = np.array(mat, dtype=np.complex128)

    def potential(x):
        shape = np.shape(x) if not fn.is_mp(x) else ()
        return np.broadcast_to(mat, shape + (3, 3)).copy()

    return potential


def free_hamiltonian(m: float, hv: float) -> DiracModel:
    if not hv > 0:
        raise ValueError("hv must be positive")
    m = float(m)
    hv = float(hv)
    return DiracModel(
        gamma=S1,
        hv=hv,
        potential=_constant_matrix(m * S3),
        potential_derivative=_constant_matrix(np.zeros((3, 3))),
        hermitian=True,
        kernel=(0, (m, hv)),
        name=f"free(m={m!r}, hv={hv!r})",
    )


def gap_solution(eps: float, m: float, hv: float, parity: Parity = "odd_A") -> SpinorFunction:
    """Gapped solution for ``|eps| < |m|``.

    ``odd_A`` is ``(hv nu sinh(nu x), i eps cosh(nu x), -m cosh(nu x))``;
    ``even_A`` swaps sinh and cosh.  ``nu = sqrt(m^2 - eps^2) / hv``.
    """
    eps, m, hv = float(eps), float(m), float(hv)
    if not abs(eps) < abs(m):
        raise EnergyOutOfRange(f"gap solution needs |eps| < |m|, got eps={eps}, m={m}")
    nu = float(np.sqrt(m * m - eps * eps) / hv)
    a, b, c = hv * nu, 1j * eps, -m

    if parity == "odd_A":
        f, g = fn.sinh, fn.cosh
    elif parity == "even_A":
        f, g = fn.cosh, fn.sinh
    else:
        raise ValueError(f"unknown parity {parity!r}")

    def value(x):
        return fn.vec3(a * f(nu * x), b * g(nu * x), c * g(nu * x))

    def derivative(x):
        # d/dx sinh = cosh and vice versa, so f and g swap roles
        return fn.vec3(a * nu * g(nu * x), b * nu * f(nu * x), c * nu * f(nu * x))

    def second(x):
        return nu * nu * value(x)

    return SpinorFunction(value, derivative, second, energy=eps,
                          name=f"gap(eps={eps!r}, {parity})")


def threshold_solution(sign: int, l0: complex, l1: complex, m: float, hv: float) -> SpinorFunction:
    """Solution at ``eps = sign * m``: ``(l1 hv, +-i l1 m x + l0, -l1 m x +- i l0)``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if l0 == 0 and l1 == 0:
        raise DegenerateSeed("threshold solution needs (l0, l1) != (0, 0)")
    m, hv = float(m), float(hv)
    l0, l1 = complex(l0), complex(l1)
    si = sign * 1j

    def value(x):
        return fn.vec3(l1 * hv + 0 * x, si * l1 * m * x + l0, -l1 * m * x + si * l0)

    def derivative(x):
        zero = fn.zeros_like(x)
        return fn.vec3(zero, si * l1 * m + zero, -l1 * m + zero)

    def second(x):
        zero = fn.zeros_like(x)
        return fn.vec3(zero, zero, zero)

    return SpinorFunction(value, derivative, second, energy=sign * m,
                          name=f"threshold({sign:+d}, l0={l0}, l1={l1})")


def exponential_solution(eps: float, m: float, hv: float, sign: int = 1) -> SpinorFunction:
    """``exp(s nu x) (s hv nu, i eps, -m)`` with ``nu = sqrt(m^2 - eps^2) / hv``.

    Valid for any ``eps != +-m``; for ``|eps| > |m|`` the root is imaginary
    and the function is a plane wave ``exp(+-i k x)``.
    """
    eps, m, hv = float(eps), float(m), float(hv)
    if abs(abs(eps) - abs(m)) == 0:
        raise EnergyOutOfRange("exponential solution is undefined at eps = +-m")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    nu = cmath.sqrt(m * m - eps * eps) / hv
    rate = sign * nu
    comps = (sign * hv * nu, 1j * eps, -m)

    def value(x):
        e = fn.exp(rate * x)
        return fn.vec3(comps[0] * e, comps[1] * e, comps[2] * e)

    def derivative(x):
        return rate * value(x)

    def second(x):
        return rate * rate * value(x)

    return SpinorFunction(value, derivative, second, energy=eps,
                          name=f"exp(eps={eps!r}, sign={sign:+d})")


def flat_band_solution(profile: FlatBandProfile, m: float, hv: float) -> SpinorFunction:
    """Zero-energy state ``(m chi, 0, -hv chi')`` for an arbitrary profile."""
    m, hv = float(m), float(hv)
    p = profile

    def value(x):
        return fn.vec3(m * p.chi(x), fn.zeros_like(x), -hv * p.chi_prime(x))

    def derivative(x):
        return fn.vec3(m * p.chi_prime(x), fn.zeros_like(x), -hv * p.chi_double_prime(x))

    def second(x):
        return fn.vec3(m * p.chi_double_prime(x), fn.zeros_like(x),
                       -hv * p.chi_triple_prime(x))

    has_second = p.chi_triple_prime is not None
    return SpinorFunction(value, derivative, second if has_second else None, energy=0.0, flat_band=True,
                          name=f"flat_band({p.name})")


def chiral_partner(psi: SpinorFunction) -> SpinorFunction:
    """``S psi``, which solves the free model at the negated energy."""
    sign = np.array([1, -1, 1])

    def flip(f):
        return None if f is None else (lambda x: f(x) * sign)

    return SpinorFunction(
        flip(psi.value), flip(psi.derivative), flip(psi.second_derivative),
        energy=-psi.energy if psi.energy else 0.0,
        flat_band=psi.flat_band,
        name=f"S*{psi.name}",
    )


# ---------------------------------------------------------------------------
# flat-band profiles

def cosh_profile(k: float, scale: float = 1.0) -> FlatBandProfile:
    k, c = float(k), float(scale)
    return FlatBandProfile(
        chi=lambda x: c * fn.cosh(k * x),
        chi_prime=lambda x: c * k * fn.sinh(k * x),
        chi_double_prime=lambda x: c * k * k * fn.cosh(k * x),
        chi_triple_prime=lambda x: c * k ** 3 * fn.sinh(k * x),
        name=f"cosh({k!r}x)" if c == 1 else f"{c!r}*cosh({k!r}x)",
    )


def sinh_profile(k: float, scale: float = 1.0) -> FlatBandProfile:
    k, c = float(k), float(scale)
    return FlatBandProfile(
        chi=lambda x: c * fn.sinh(k * x),
        chi_prime=lambda x: c * k * fn.cosh(k * x),
        chi_double_prime=lambda x: c * k * k * fn.sinh(k * x),
        chi_triple_prime=lambda x: c * k ** 3 * fn.cosh(k * x),
        name=f"sinh({k!r}x)" if c == 1 else f"{c!r}*sinh({k!r}x)",
    )


def exp_profile(k: complex) -> FlatBandProfile:
    k = complex(k)
    return FlatBandProfile(
        chi=lambda x: fn.exp(k * x),
        chi_prime=lambda x: k * fn.exp(k * x),
        chi_double_prime=lambda x: k * k * fn.exp(k * x),
        chi_triple_prime=lambda x: k ** 3 * fn.exp(k * x),
        name=f"exp({k!r}x)",
        real=k.imag == 0,
    )


def plane_wave_profile(kappa: float) -> FlatBandProfile:
    """``exp(i kappa x)``: the degenerate Bloch wave."""
    p = exp_profile(1j * float(kappa))
    return replace(p, name=f"exp(i{kappa!r}x)")


def linear_profile(a: float, b: float) -> FlatBandProfile:
    a, b = float(a), float(b)
    return FlatBandProfile(
        chi=lambda x: a + b * x,
        chi_prime=lambda x: b + 0 * x,
        chi_double_prime=lambda x: 0 * x,
        chi_triple_prime=lambda x: 0 * x,
        name=f"{a!r}+{b!r}x",
    )


def _horner(coeffs: Sequence[float], x):
    out = 0 * x
    for c in reversed(coeffs):
        out = out * x + c
    return out


def poly_exp_profile(coeffs: Sequence[float], k: float) -> FlatBandProfile:
    """``p(x) exp(k x)`` with ``p`` given by ascending coefficients."""
    p0 = np.asarray(coeffs, dtype=float)
    p1 = np.polynomial.polynomial.polyder(p0, 1) if p0.size > 1 else np.zeros(1)
    p2 = np.polynomial.polynomial.polyder(p0, 2) if p0.size > 2 else np.zeros(1)
    p3 = np.polynomial.polynomial.polyder(p0, 3) if p0.size > 3 else np.zeros(1)
    c0, c1, c2, c3 = ([float(v) for v in q] for q in (p0, p1, p2, p3))
    k = float(k)

    def ev(c, x):
        return _horner(c, x)

    return FlatBandProfile(
        chi=lambda x: ev(c0, x) * fn.exp(k * x),
        chi_prime=lambda x: (ev(c1, x) + k * ev(c0, x)) * fn.exp(k * x),
        chi_double_prime=lambda x: (ev(c2, x) + 2 * k * ev(c1, x) + k * k * ev(c0, x))
        * fn.exp(k * x),
        chi_triple_prime=lambda x: (ev(c3, x) + 3 * k * ev(c2, x) + 3 * k * k * ev(c1, x)
                                    + k ** 3 * ev(c0, x)) * fn.exp(k * x),
        name=f"poly{tuple(c0)}*exp({k!r}x)",
    )


def gaussian_wave_profile(kappa: float, width: float, center: float = 0.0) -> FlatBandProfile:
    """Gaussian-windowed plane wave ``exp(-(x-c)^2 / 2w^2 + i kappa x)``."""
    kappa, w, c = float(kappa), float(width), float(center)
    inv = 1.0 / (w * w)

    def chi(x):
        return fn.exp(-0.5 * inv * (x - c) ** 2 + 1j * kappa * x)

    def g(x):
        return -inv * (x - c) + 1j * kappa

    return FlatBandProfile(
        chi=chi,
        chi_prime=lambda x: g(x) * chi(x),
        chi_double_prime=lambda x: (g(x) ** 2 - inv) * chi(x),
        chi_triple_prime=lambda x: (g(x) ** 3 - 3 * inv * g(x)) * chi(x),
        name=f"gauss(kappa={kappa!r}, w={w!r})",
        real=kappa == 0,
    )


def probe_solutions(m: float, hv: float) -> list[SpinorFunction]:
    """A fixed mix of free solutions from every energy regime, for identity checks."""
    out = [
        gap_solution(0.3 * m, m, hv, "odd_A"),
        gap_solution(-0.6 * m, m, hv, "even_A"),
        exponential_solution(0.45 * m, m, hv, -1),
        exponential_solution(1.5 * m, m, hv, 1),
        exponential_solution(-2.2 * m, m, hv, -1),
        threshold_solution(1, 1.0, 0.0, m, hv),
        threshold_solution(-1, 0.5, 0.25j, m, hv),
        flat_band_solution(plane_wave_profile(1.3), m, hv),
        flat_band_solution(gaussian_wave_profile(0.7, 1.5), m, hv),
        flat_band_solution(poly_exp_profile([1.0, 0.5], -0.2), m, hv),
        flat_band_solution(linear_profile(0.4, -1.0), m, hv),
        flat_band_solution(cosh_profile(0.35), m, hv),
    ]
    return out

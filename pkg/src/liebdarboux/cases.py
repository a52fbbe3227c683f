"""The four flat-band-seeded transformations and their closed forms.

Each case fixes a seed built from free solutions, which the generic
pipeline in :mod:`liebdarboux.darboux` turns into a transformed model.  The
closed-form potentials (in :mod:`liebdarboux._closed_forms`) serve both as
the model's potential and as an independent oracle for the pipeline.

Gapped seed columns are divided by ``hv nu`` so that their first component
is ``sinh(nu x)`` (or ``cosh``), matching the usual form of the seed matrices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Literal, Optional

import numpy as np

from . import _closed_forms as cf
from . import _mathfn as fn
from .algebra import S1T, S2, S3, S3T
from .darboux import (SeedMatrix, TransformedModel, darboux_transform,
                      regularity_scan, seed_determinant, seed_matrix,
                      transformed_potential)
from .errors import InvalidParameters, SingularSeed
from .free_model import (DiracModel, chiral_partner, cosh_profile, flat_band_solution,
                         free_hamiltonian, gap_solution, sinh_profile, threshold_solution)

__all__ = [
    "CaseModel",
    "case_seed",
    "case1_model",
    "case2_model",
    "case3_model",
    "case4_model",
    "case_model",
    "oracle_crosscheck",
    "expected_spectrum",
    "bound_state_indices",
    "named_profiles",
    "closed_missing_states",
    "asymptotic_potential",
    "DEFAULT_EPS",
]

Tag = Literal["I", "II", "III", "IV"]
TAGS = ("I", "II", "III", "IV")
DEFAULT_EPS = {"I": 0.75, "II": -0.25, "III": 0.75, "IV": 0.5}


@dataclass(frozen=True)
class CaseModel:
    """Parameters of one case.

    ``mirror`` selects the sign-mirrored Case II (seed at ``-m``, ``eps > 0``).
    ``nonflat`` replaces the Case I flat-band column by the ``eps = 0`` gapped
    solution; that construction is not Hermitian and exists to show it.
    """

    tag: Tag
    m: float = 1.0
    eps: float = 0.75
    hv: float = 1.0
    ell: float = 1.0
    mirror: bool = False
    nonflat: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tag", str(self.tag).upper())
        for name in ("m", "eps", "hv", "ell"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.tag not in TAGS:
            raise InvalidParameters(f"unknown case tag {self.tag!r}")

    # derived rates --------------------------------------------------------
    @property
    def nu(self) -> float:
        return math.sqrt(self.m ** 2 - self.eps ** 2) / self.hv

    @property
    def nu0(self) -> float:
        return self.m / self.hv

    @property
    def sigma(self) -> float:
        e = -self.eps if self.mirror else self.eps
        return math.sqrt(self.m * (self.m + e)) / self.hv

    @property
    def xi(self) -> float:
        return math.sqrt(self.m ** 2 + self.eps ** 2) / self.hv

    # validation -----------------------------------------------------------
    def check_defined(self) -> None:
        """Formulas are well defined (real rates, nonzero scales)."""
        m, e, hv = self.m, self.eps, self.hv
        if not (math.isfinite(m) and math.isfinite(e) and math.isfinite(hv)):
            raise InvalidParameters("parameters must be finite")
        if not hv > 0:
            raise InvalidParameters("hv must be positive")
        if not m > 0:
            raise InvalidParameters("m must be positive")
        if not abs(e) < m:
            raise InvalidParameters(f"case {self.tag} needs |eps| < m, got eps={e}, m={m}")
        if self.mirror and self.tag != "II":
            raise InvalidParameters("mirror applies to case II only")
        if self.nonflat and self.tag != "I":
            raise InvalidParameters("nonflat seed applies to case I only")
        if self.tag == "IV" and not (self.ell != 0 and math.isfinite(self.ell)):
            raise InvalidParameters("case IV needs a finite nonzero ell")

    def validate(self) -> "CaseModel":
        """Full validity domain of the case; returns ``self``."""
        self.check_defined()
        e = self.eps
        if self.tag == "II":
            if self.mirror and not 0 < e:
                raise InvalidParameters(f"mirrored case II needs 0 < eps < m, got {e}")
            if not self.mirror and not e < 0:
                raise InvalidParameters(f"case II needs -m < eps < 0, got {e}")
        elif e == 0:
            raise InvalidParameters(f"case {self.tag} needs eps != 0")
        return self

    @property
    def code(self) -> Optional[int]:
        if self.nonflat:
            return None
        return {"I": cf.CASE1, "II": cf.CASE2_MIRROR if self.mirror else cf.CASE2,
                "III": cf.CASE3, "IV": cf.CASE4}[self.tag]

    @property
    def kernel_params(self) -> tuple[float, ...]:
        base = (self.m, self.eps, self.hv)
        return base + (self.ell,) if self.tag == "IV" else base

    def with_eps(self, eps: float) -> "CaseModel":
        return replace(self, eps=eps)


def _gap(p: CaseModel, eps: float, parity="odd_A"):
    nu = math.sqrt(p.m ** 2 - eps ** 2) / p.hv
    return gap_solution(eps, p.m, p.hv, parity).scaled(1.0 / (p.hv * nu))


def case_seed(p: CaseModel) -> SeedMatrix:
    """Seed matrix of the case, built from free solutions."""
    p.check_defined()
    m, e, hv = p.m, p.eps, p.hv
    if p.tag == "I":
        first = _gap(p, e)
        if p.nonflat:
            mid = gap_solution(0.0, m, hv, "even_A").scaled(1.0 / (hv * p.nu0))
        else:
            mid = flat_band_solution(cosh_profile(p.nu), m, hv)
        return seed_matrix(first, mid, chiral_partner(first), (e, 0.0, -e))
    if p.tag == "II":
        if p.mirror:
            thr = threshold_solution(-1, 1.0, 0.0, m, hv)
            lams = (-m, 0.0, e)
        else:
            thr = threshold_solution(+1, 1.0, 0.0, m, hv)
            lams = (m, 0.0, e)
        fb = flat_band_solution(cosh_profile(p.sigma), m, hv)
        return seed_matrix(thr, fb, _gap(p, e), lams)
    if p.tag == "III":
        fb = flat_band_solution(sinh_profile(p.xi), m, hv)
        return seed_matrix(_gap(p, e), _gap(p, e, "even_A"), fb, (e, e, 0.0))
    n0 = p.nu0
    chi1 = flat_band_solution(sinh_profile(n0), m, hv)
    chi2 = flat_band_solution(cosh_profile(n0, p.ell / n0), m, hv)
    return seed_matrix(_gap(p, e), chi1, chi2, (e, 0.0, 0.0))


def _closed_potential(p: CaseModel) -> Callable:
    code, params = p.code, p.kernel_params

    def potential(x):
        return cf.potential_matrix(code, params, x)

    return potential


def case_model(p: CaseModel, validate: bool = True) -> TransformedModel:
    """Transformed model for any tag.

    The potential is the closed form when one exists (every flat-band case)
    and the generic pipeline otherwise; seed and missing states always come
    from the generic pipeline.
    """
    if validate:
        p.validate()
    else:
        p.check_defined()
    seed = case_seed(p)
    base = free_hamiltonian(p.m, p.hv)
    name = f"case {p.tag}" + (" mirror" if p.mirror else "") + (" nonflat" if p.nonflat else "")
    tm = darboux_transform(base, seed, name=name)
    if p.code is None:
        return replace(tm, case=p)
    model = DiracModel(gamma=base.gamma, hv=base.hv, potential=_closed_potential(p),
                       potential_derivative=None, hermitian=True,
                       kernel=(p.code, p.kernel_params), name=name)
    return TransformedModel(model, seed, base, tm.missing_states, case=p)


def case1_model(p: CaseModel) -> TransformedModel:
    if p.tag != "I":
        raise InvalidParameters("case1_model needs tag I")
    return case_model(p)


def case2_model(p: CaseModel) -> TransformedModel:
    if p.tag != "II":
        raise InvalidParameters("case2_model needs tag II")
    return case_model(p)


def case3_model(p: CaseModel) -> TransformedModel:
    if p.tag != "III":
        raise InvalidParameters("case3_model needs tag III")
    return case_model(p)


def case4_model(p: CaseModel) -> TransformedModel:
    if p.tag != "IV":
        raise InvalidParameters("case4_model needs tag IV")
    return case_model(p)


def oracle_crosscheck(p: CaseModel, domain=(-8.0, 8.0), n: int = 1601) -> float:
    """Sup-norm gap between the generic pipeline and the closed form.

    Only well-definedness is checked, not the case's validity domain, so an
    out-of-domain energy surfaces as :class:`SingularSeed` from the scan.
    """
    p.check_defined()
    if p.code is None:
        raise InvalidParameters("the non-flat case I seed has no closed form")
    seed = case_seed(p)
    rep = regularity_scan(seed, domain, n)
    if not rep.passed:
        raise SingularSeed(rep.argmin_ratio, seed_determinant(seed, rep.argmin_ratio), rep.min_ratio)
    xs = np.linspace(float(domain[0]), float(domain[1]), int(n))
    generic = transformed_potential(seed, free_hamiltonian(p.m, p.hv), xs)
    closed = cf.potential_matrix(p.code, p.kernel_params, xs)
    return float(np.abs(generic - closed).max())


def expected_spectrum(p: CaseModel) -> list[float]:
    """Discrete spectrum of the transformed model, ascending."""
    e = p.eps
    return {"I": sorted([-e, 0.0, e]), "II": sorted([0.0, e]), "III": [0.0],
            "IV": [e]}[p.tag]


def bound_state_indices(p: CaseModel) -> tuple[int, ...]:
    """Which missing states (seed-column order) are square-integrable."""
    return {"I": (0, 1, 2), "II": (1, 2), "III": (2,), "IV": (0,)}[p.tag]


def named_profiles(p: CaseModel, x) -> dict[str, np.ndarray]:
    """Scalar coefficient functions of the closed-form potential."""
    m, e, hv = p.m, p.eps, p.hv
    if p.nonflat:
        return {}
    if p.tag == "I":
        f, mm = cf.case1_profiles(m, e, hv, x)
        return {"F": f, "M": mm}
    if p.tag == "II":
        f, mm, d, g = cf.case2_profiles(m, -e if p.mirror else e, hv, x)
        if p.mirror:
            # -S V S flips the signs of the S2 and S3t coefficients only
            return {"F~": f, "M~": mm, "D~": -d, "G~": -g}
        return {"F~": f, "M~": mm, "D~": d, "G~": g}
    if p.tag == "III":
        c = cf.case3_coefficient(m, e, hv, x)
        return {"S1t": m * m * c, "S2": e * m * c}
    a = cf.case4_coefficient(m, e, hv, x)
    return {"A": a, "S3t": -e + 0 * a}


def asymptotic_potential(p: CaseModel, side: int) -> np.ndarray:
    """Limit of the closed-form potential as ``x -> side * inf``."""
    m, e, hv = p.m, p.eps, p.hv
    if p.tag == "I":
        return m * S3
    if p.tag == "III":
        return side * (m * m * S1T + e * m * S2) / (hv * p.xi)
    if p.tag == "IV":
        return side * hv * p.nu * S1T - e * S3T
    # case II: far enough out every tanh is +-1
    return cf.potential_matrix(p.code, p.kernel_params, side * 1e3)


def closed_missing_states(p: CaseModel) -> dict[int, Callable]:
    """Closed-form missing states, keyed by seed-column index.

    Only the values are provided; they agree with the generic missing states
    up to a constant factor.
    """
    m, e, hv = p.m, p.eps, p.hv
    if p.tag == "I":
        nu = p.nu

        def parts(x):
            t = fn.tanh(nu * x)
            s = 1 / fn.cosh(nu * x)
            den = -(m * m) / (hv * hv * nu * nu) + t * t
            return t, s, den

        def psi_e(x):
            t, s, den = parts(x)
            return fn.vec3(t * s / den, 1j * hv * nu / e * s, m / (hv * nu) * s / den)

        def psi_0(x):
            t, s, den = parts(x)
            return fn.vec3(-(m / (hv * hv * nu * nu)) * s / den, 0 * s,
                           -(1 / (hv * nu)) * t * s / den)

        return {0: psi_e, 1: psi_0, 2: lambda x: psi_e(x) * np.array([1, -1, 1])}
    if p.tag == "II":
        ee = -e if p.mirror else e
        nu = math.sqrt(m * m - ee * ee) / hv
        sg = math.sqrt(m * (m + ee)) / hv
        sign = np.array([1, -1, 1]) if p.mirror else np.ones(3)

        def bracket(x):
            # Delta / (cosh(sigma x) cosh(nu x))
            return hv * sg * cf.case2_bracket(m, ee, hv, x)

        def psi_0(x):
            b = bracket(x)
            tn = fn.tanh(nu * x)
            sech_s = 1 / fn.cosh(sg * x)
            v = fn.vec3(-math.sqrt((m - ee) / (m + ee)) * sech_s / b, -1j * tn * sech_s / b,
                        -tn * sech_s / b)
            return v * sign

        def psi_e(x):
            b = bracket(x)
            ts = fn.tanh(sg * x)
            sech_n = 1 / fn.cosh(nu * x)
            v = fn.vec3(math.sqrt(m * (m + ee)) * ts * sech_n / b, 1j * m * sech_n / b,
                        m * sech_n / b)
            return v * sign

        return {1: psi_0, 2: psi_e}
    if p.tag == "III":
        xi = p.xi
        return {2: lambda x: fn.vec3(0 * x, 1j * m / fn.cosh(xi * x), e / fn.cosh(xi * x))}
    nu = p.nu
    return {0: lambda x: math.sqrt(nu / 2) * fn.vec3(0 * x, 1 / fn.cosh(nu * x), 0 * x)}

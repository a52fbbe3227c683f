"""Closed-form transformed potentials, shared by ``cases`` and the integrators.

Each case is identified by an integer code so the compiled integrator can
evaluate the same formulas without calling back into Python:

====  ==========================  ======================
code  model                       params
====  ==========================  ======================
0     free                        (m, hv)
1     Case I                      (m, eps, hv)
2     Case II, eps < 0            (m, eps, hv)
3     Case II mirror, eps > 0     (m, eps, hv)
4     Case III                    (m, eps, hv)
5     Case IV                     (m, eps, hv, ell)
====  ==========================  ======================

Formulas are written in a form that cannot overflow for large ``|x|``
(ratios of hyperbolic functions are reduced to tanh/sech).
"""
from __future__ import annotations

import math

import numpy as np

from . import _mathfn as fn

FREE, CASE1, CASE2, CASE2_MIRROR, CASE3, CASE4 = range(6)
CODES = (FREE, CASE1, CASE2, CASE2_MIRROR, CASE3, CASE4)


def _nu(m, eps, hv):
    return math.sqrt(m * m - eps * eps) / hv


def case1_profiles(m, eps, hv, x):
    """``(F, M)`` of the Case I potential ``(m + M) S3 + F S1t``."""
    nu = _nu(m, eps, hv)
    t = fn.tanh(nu * x)
    s2 = 1 - t * t
    den = -(m * m) / (hv * hv * nu * nu) + t * t
    return -hv * nu * t * s2 / den, m * s2 / den


def case2_bracket(m, eps, hv, x):
    """``Delta / (hv sigma cosh(sigma x) cosh(nu x))`` for Case II."""
    nu = _nu(m, eps, hv)
    sg = math.sqrt(m * (m + eps)) / hv
    return -math.sqrt(m * (m - eps)) / (m + eps) + fn.tanh(sg * x) * fn.tanh(nu * x)


def case2_profiles(m, eps, hv, x):
    """``(F~, M~, D~, G~)`` for Case II with ``-m < eps < 0``."""
    nu = _nu(m, eps, hv)
    sg = math.sqrt(m * (m + eps)) / hv
    ts, tn = fn.tanh(sg * x), fn.tanh(nu * x)
    b = -math.sqrt(m * (m - eps)) / (m + eps) + ts * tn
    hs = hv * sg
    f = eps * (-math.sqrt(m * (m - eps)) * ts + m * tn) / (hs * b)
    mm = m * (math.sqrt((m - eps) / m) - ts * tn) / b
    d = (m - eps) * (math.sqrt(m / (m - eps)) - ts * tn) / b
    g = m * eps * tn / (hs * b)
    return f, mm, d, g


def case3_coefficient(m, eps, hv, x):
    xi = math.sqrt(m * m + eps * eps) / hv
    return fn.tanh(xi * x) / (hv * xi)


def case4_coefficient(m, eps, hv, x):
    nu = _nu(m, eps, hv)
    return hv * nu * fn.tanh(nu * x)


def potential_entries(code: int, params, x):
    """The nine row-major entries ``V_ij(x)`` (scalars or arrays)."""
    z = fn.zeros_like(x)
    if code == FREE:
        m = params[0]
        return (z, z, z, z, z, -1j * m + z, z, 1j * m + z, z)
    m, eps, hv = params[0], params[1], params[2]
    if code == CASE1:
        f, mm = case1_profiles(m, eps, hv, x)
        return (z, -1j * f, z, 1j * f, z, -1j * (m + mm), z, 1j * (m + mm), z)
    if code in (CASE2, CASE2_MIRROR):
        e = eps if code == CASE2 else -eps
        f, mm, d, g = case2_profiles(m, e, hv, x)
        v = (d + 0j, -1j * f, g + 0j, 1j * f, -d + 0j, -1j * (m + mm), g + 0j, 1j * (m + mm), z)
        if code == CASE2:
            return v
        # -S V S with S = diag(1, -1, 1)
        sgn = (1, -1, 1)
        return tuple(-sgn[k // 3] * sgn[k % 3] * v[k] for k in range(9))
    if code == CASE3:
        c = case3_coefficient(m, eps, hv, x)
        a = m * m * c
        b = eps * m * c
        return (z, -1j * a, b + 0j, 1j * a, z, z, b + 0j, z, z)
    if code == CASE4:
        a = case4_coefficient(m, eps, hv, x)
        return (-eps + z, -1j * a, z, 1j * a, eps + z, z, z, z, z)
    raise ValueError(f"unknown potential code {code!r}")


def potential_matrix(code: int, params, x) -> np.ndarray:
    """Potential as a ``(..., 3, 3)`` complex array."""
    e = potential_entries(code, params, x)
    if fn.is_mp(x):
        return np.array(e, dtype=object).reshape(3, 3)
    arrs = np.broadcast_arrays(*[np.asarray(v, dtype=np.complex128) for v in e])
    return np.stack(arrs, axis=-1).reshape(np.shape(arrs[0]) + (3, 3))

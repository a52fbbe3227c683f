"""Pure-Python/numpy implementations of the hot kernels.

Used when the compiled extension is unavailable or when
``LIEBDARBOUX_PURE=1`` is set.  Signatures and results match
``_ckernels`` to rounding.
"""
from __future__ import annotations

import math

import numpy as np

from . import _dd
from ._closed_forms import potential_entries
from .errors import AlgebraicDegeneracy
from .ode import dopri45

BACKEND = "python"

DEGENERACY_RTOL = 1e-8


def _stack(a):
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.shape[-2:] != (3, 3):
        raise ValueError(f"expected (..., 3, 3) array, got {a.shape}")
    return a


def log_derivative(u, du, d2u=None):
    """``(du @ inv(u), d2u @ inv(u) or None, det(u))`` in double-double."""
    u = _stack(u)
    du = _stack(du)
    adj, det = _dd.adjugate_det(u)
    w = _dd.times_adjugate(du, adj, det)
    w2 = None if d2u is None else _dd.times_adjugate(_stack(d2u), adj, det)
    return w, w2, det.to_complex()


def inverse_det(u):
    """``(inv(u), det(u))`` with the adjugate and division in double-double."""
    u = _stack(u)
    adj, det = _dd.adjugate_det(u)
    eye = np.broadcast_to(np.eye(3, dtype=np.complex128), u.shape)
    return _dd.times_adjugate(eye, adj, det), det.to_complex()


def _charpoly(d0, d1, d2, p01, p02, p12, cross):
    f = d0 * d1 * d2 + 2 * cross - d0 * p12 - d1 * p02 - d2 * p01
    df = -(d1 * d2 + d0 * d2 + d0 * d1) + p12 + p02 + p01
    return f, df


def eigvalsh3(a):
    """Sorted eigenvalues of Hermitian ``(..., 3, 3)`` matrices.

    Trigonometric solution of the characteristic cubic followed by up to
    three safeguarded Newton steps on the cubic itself.
    """
    a = _stack(a)
    a00, a11, a22 = a[..., 0, 0].real, a[..., 1, 1].real, a[..., 2, 2].real
    a01, a02, a12 = a[..., 0, 1], a[..., 0, 2], a[..., 1, 2]
    p01, p02, p12 = np.abs(a01) ** 2, np.abs(a02) ** 2, np.abs(a12) ** 2
    cross = (a01 * a12 * np.conj(a02)).real
    q = (a00 + a11 + a22) / 3
    d0, d1, d2 = a00 - q, a11 - q, a22 - q
    p = np.sqrt((d0 * d0 + d1 * d1 + d2 * d2 + 2 * (p01 + p02 + p12)) / 6)
    safe = np.where(p > 0, p, 1.0)
    detb, _ = _charpoly(d0, d1, d2, p01, p02, p12, cross)
    r = np.clip(detb / (2 * safe ** 3), -1.0, 1.0)
    phi = np.arccos(r) / 3
    e_hi = q + 2 * p * np.cos(phi)
    e_lo = q + 2 * p * np.cos(phi + 2 * math.pi / 3)
    e_mid = 3 * q - e_hi - e_lo
    out = np.stack([e_lo, e_mid, e_hi], axis=-1)
    for _ in range(3):
        lam = out
        f, df = _charpoly(a00[..., None] - lam, a11[..., None] - lam, a22[..., None] - lam,
                          p01[..., None], p02[..., None], p12[..., None], cross[..., None])
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(df != 0, f / df, 0.0)
        cand = lam + step
        fc, _ = _charpoly(a00[..., None] - cand, a11[..., None] - cand, a22[..., None] - cand,
                          p01[..., None], p02[..., None], p12[..., None], cross[..., None])
        ok = np.isfinite(cand) & (np.abs(fc) < np.abs(f))
        out = np.where(ok, cand, lam)
    return np.sort(out, axis=-1)


def reduced_rhs(v, e, hv):
    """Coefficient matrix of the reduced system from nine potential entries."""
    v00, v01, v02, v10, v11, v12, v20, v21, v22 = v
    den = e - v22
    if abs(den) <= DEGENERACY_RTOL * max(1.0, abs(e)):
        raise AlgebraicDegeneracy(e)
    ca = v20 / den
    cb = v21 / den
    k = 1j / hv
    return (
        -k * (v10 + v12 * ca), k * (e - v11 - v12 * cb),
        k * (e - v00 - v02 * ca), -k * (v01 + v02 * cb),
    )


def _hv_of(code, params):
    return params[1] if code == 0 else params[2]


def integrate_reduced(code, params, e, x0, x1, y0, rtol=1e-11, atol=1e-13,
                      h0=0.0, max_steps=200_000):
    """Integrate the reduced system of a closed-form model.

    Returns ``(y(x1), accepted_steps, rejected_steps)``.
    """
    params = tuple(float(p) for p in params)
    hv = _hv_of(code, params)
    e = float(e)

    def f(x, y):
        v = [complex(t) for t in potential_entries(code, params, x)]
        try:
            a00, a01, a10, a11 = reduced_rhs(v, e, hv)
        except AlgebraicDegeneracy as exc:
            raise AlgebraicDegeneracy(e, x) from exc
        return [a00 * y[0] + a01 * y[1], a10 * y[0] + a11 * y[1]]

    res = dopri45(f, float(x0), float(x1), list(y0), rtol, atol, h0 or None, max_steps)
    return np.array(res.y, dtype=np.complex128), res.steps, res.rejected

"""Elementary functions that dispatch between numpy and mpmath.

Spinor closures are written against these so the same closed form can be
evaluated on float grids (vectorised) or at a single high-precision point
(``mpmath.mpf`` argument).
"""
from __future__ import annotations

import mpmath as mp
import numpy as np

_MP_TYPES = (mp.mpf, mp.mpc)


def is_mp(x) -> bool:
    return isinstance(x, _MP_TYPES)


def _dispatch(np_fn, mp_fn):
    def fn(x):
        return mp_fn(x) if isinstance(x, _MP_TYPES) else np_fn(x)

    fn.__name__ = np_fn.__name__
    return fn


sinh = _dispatch(np.sinh, mp.sinh)
cosh = _dispatch(np.cosh, mp.cosh)
tanh = _dispatch(np.tanh, mp.tanh)
exp = _dispatch(np.exp, mp.exp)


def sech(x):
    return 1 / cosh(x)


def zeros_like(x):
    if isinstance(x, _MP_TYPES):
        return mp.mpf(0)
    return np.zeros(np.shape(x))


def vec3(a, b, c):
    """Stack three components into a trailing axis of length 3.

    Scalars give shape ``(3,)``, arrays of shape ``s`` give ``s + (3,)``.
    mpmath inputs produce an object array.
    """
    if any(isinstance(v, _MP_TYPES) for v in (a, b, c)):
        return np.array([mp.mpc(a), mp.mpc(b), mp.mpc(c)], dtype=object)
    a, b, c = np.broadcast_arrays(
        np.asarray(a, dtype=np.complex128),
        np.asarray(b, dtype=np.complex128),
        np.asarray(c, dtype=np.complex128),
    )
    return np.stack([a, b, c], axis=-1)

"""Spin-1 matrix constants and small dense 3x3 complex operations.

All matrices are ``(3, 3)`` complex128 arrays; most functions also accept
stacks of shape ``(..., 3, 3)``.  The constants returned by
:func:`spin_generators` are read-only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrix

__all__ = [
    "SpinGenerators",
    "HermiticityCheck",
    "spin_generators",
    "commutator",
    "anticommutator",
    "det3",
    "adjugate3",
    "invert3",
    "is_hermitian",
    "SINGULAR_RTOL",
]

# |det| <= SINGULAR_RTOL * ||A||_inf**3 is treated as singular
SINGULAR_RTOL = 1e-13


def _frozen(rows) -> np.ndarray:
    a = np.array(rows, dtype=np.complex128)
    a.setflags(write=False)
    return a


_I = 1j
S1 = _frozen([[0, 1, 0], [1, 0, 0], [0, 0, 0]])
S2 = _frozen([[0, 0, 1], [0, 0, 0], [1, 0, 0]])
S3 = _frozen([[0, 0, 0], [0, 0, -_I], [0, _I, 0]])
S1T = _frozen([[0, -_I, 0], [_I, 0, 0], [0, 0, 0]])
S2T = _frozen([[0, 0, -_I], [0, 0, 0], [_I, 0, 0]])
S = _frozen(np.diag([1, -1, 1]))
S3T = _frozen(np.diag([1, -1, 0]))
IDENTITY = _frozen(np.eye(3))
ZERO = _frozen(np.zeros((3, 3)))


@dataclass(frozen=True)
class SpinGenerators:
    """The seven constant matrices used throughout.

    ``s1, s2, s3`` are the spin-1 kinetic/mass generators, ``s1t, s2t``
    the hopping-anisotropy generators, ``s`` the chiral operator and
    ``s3t`` the truncated sublattice-imbalance matrix.
    """

    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    s1t: np.ndarray
    s2t: np.ndarray
    s: np.ndarray
    s3t: np.ndarray

    def as_dict(self) -> dict[str, np.ndarray]:
        return {
            "s1": self.s1, "s2": self.s2, "s3": self.s3,
            "s1t": self.s1t, "s2t": self.s2t, "s": self.s, "s3t": self.s3t,
        }


_GENERATORS = SpinGenerators(S1, S2, S3, S1T, S2T, S, S3T)


def spin_generators() -> SpinGenerators:
    return _GENERATORS


def commutator(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    return a @ b + b @ a


def adjugate3(a) -> np.ndarray:
    """Adjugate (transposed cofactor matrix) of a stack of 3x3 matrices."""
    a = np.asarray(a)
    adj = np.empty(a.shape, dtype=np.result_type(a, np.complex128))
    for i in range(3):
        for j in range(3):
            r = [k for k in range(3) if k != j]
            c = [k for k in range(3) if k != i]
            minor = (a[..., r[0], c[0]] * a[..., r[1], c[1]]
                     - a[..., r[0], c[1]] * a[..., r[1], c[0]])
            adj[..., i, j] = minor if (i + j) % 2 == 0 else -minor
    return adj


def det3(a):
    """Determinant by cofactor expansion along the first row."""
    a = np.asarray(a)
    return (a[..., 0, 0] * (a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1])
            - a[..., 0, 1] * (a[..., 1, 0] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 0])
            + a[..., 0, 2] * (a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0]))


def invert3(a) -> np.ndarray:
    """Inverse via the adjugate.

    Raises
    ------
    SingularMatrix
        If ``|det(a)| <= 1e-13 * ||a||_inf**3`` for any matrix in the stack.
    """
    a = np.asarray(a, dtype=np.complex128)
    det = det3(a)
    norm = np.abs(a).sum(axis=-1).max(axis=-1)
    bad = np.abs(det) <= SINGULAR_RTOL * norm**3
    if np.any(bad):
        d = det if np.ndim(det) == 0 else det[bad].ravel()[0]
        raise SingularMatrix(complex(d))
    return adjugate3(a) / np.asarray(det)[..., None, None]


@dataclass(frozen=True)
class HermiticityCheck:
    hermitian: bool
    defect: float
    index: tuple[int, int]

    def __bool__(self) -> bool:
        return self.hermitian


def is_hermitian(a, tol: float = 1e-12) -> HermiticityCheck:
    """Check ``max_ij |a_ij - conj(a_ji)| <= tol``.

    For a stack the defect is maximised over the stack as well; ``index``
    always refers to the matrix position ``(i, j)``.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    a = np.asarray(a)
    diff = np.abs(a - np.conj(np.swapaxes(a, -1, -2)))
    per_entry = diff.reshape(-1, 3, 3).max(axis=0)
    i, j = np.unravel_index(int(np.argmax(per_entry)), (3, 3))
    defect = float(per_entry[i, j])
    return HermiticityCheck(defect <= tol, defect, (int(i), int(j)))

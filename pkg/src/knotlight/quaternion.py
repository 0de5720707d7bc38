"""Real quaternions and the decomposition H = C + jC.

Coefficients are always stored in basis order (e0, e1, e2, e3).  The
module-level array helpers (:func:`qmul`, :func:`qconj`) operate on
arrays whose last axis has length 4 and are what the vectorised code in
the rest of the package uses; :class:`Quaternion` wraps a single element
for interactive use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Quaternion",
    "UnitQuaternion",
    "ComplexPair",
    "multiply",
    "conjugate",
    "norm",
    "inverse",
    "normalize",
    "from_polar",
    "to_complex_pair",
    "from_complex_pair",
    "qmul",
    "qconj",
    "basis",
]

_CONJ_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])

# renormalise silently below this drift, reject above it
_UNIT_DRIFT = 1e-9


def qmul(a, b):
    """Hamilton product of quaternion arrays of shape ``(..., 4)``."""
    a = np.asarray(a)
    b = np.asarray(b)
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def qconj(q):
    return np.asarray(q) * _CONJ_SIGNS


def basis(mu: int) -> "Quaternion":
    """Canonical basis element e_mu."""
    c = [0.0, 0.0, 0.0, 0.0]
    c[mu] = 1.0
    return Quaternion(*c)


@dataclass(frozen=True)
class Quaternion:
    c0: float
    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        for name in ("c0", "c1", "c2", "c3"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"quaternion coefficient {name} is not finite: {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, arr) -> "Quaternion":
        arr = np.asarray(arr, dtype=float).reshape(4)
        return cls(*arr)

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([self.c0, self.c1, self.c2, self.c3])

    def __array__(self, dtype=None, copy=None):
        return self.coeffs if dtype is None else self.coeffs.astype(dtype)

    def __iter__(self):
        return iter((self.c0, self.c1, self.c2, self.c3))

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return multiply(self, other)
        return Quaternion.from_array(self.coeffs * float(other))

    def __rmul__(self, other):
        return Quaternion.from_array(self.coeffs * float(other))

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion.from_array(self.coeffs + other.coeffs)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion.from_array(self.coeffs - other.coeffs)

    def __neg__(self) -> "Quaternion":
        return Quaternion.from_array(-self.coeffs)

    def conj(self) -> "Quaternion":
        return conjugate(self)

    def norm(self) -> float:
        return norm(self)

    def inv(self) -> "Quaternion":
        return inverse(self)

    def isclose(self, other, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.coeffs, np.asarray(other, dtype=float), rtol=0.0, atol=atol))


class UnitQuaternion(Quaternion):
    """Element of Sp(1).

    Small drift (below 1e-9) is renormalised away at construction; larger
    deviations raise ``ValueError``.
    """

    def __post_init__(self):
        super().__post_init__()
        n = float(np.linalg.norm(self.coeffs))
        if abs(n - 1.0) > _UNIT_DRIFT:
            raise ValueError(f"not a unit quaternion: norm = {n!r}")
        if n != 1.0:
            for name in ("c0", "c1", "c2", "c3"):
                object.__setattr__(self, name, getattr(self, name) / n)

    @classmethod
    def from_array(cls, arr) -> "UnitQuaternion":
        arr = np.asarray(arr, dtype=float).reshape(4)
        return cls(*arr)

    @classmethod
    def normalized(cls, arr) -> "UnitQuaternion":
        """Project an arbitrary nonzero 4-vector onto S^3."""
        arr = np.asarray(arr, dtype=float).reshape(4)
        n = np.linalg.norm(arr)
        if n == 0.0:
            raise ZeroDivisionError("cannot normalise the zero quaternion")
        return cls(*(arr / n))


@dataclass(frozen=True)
class ComplexPair:
    """q = z1 + j z2 with z1 = q0 + i q1 and z2 = q2 - i q3."""

    z1: complex
    z2: complex


def multiply(a, b) -> Quaternion:
    return Quaternion.from_array(qmul(np.asarray(a, dtype=float), np.asarray(b, dtype=float)))


def conjugate(q) -> Quaternion:
    return Quaternion.from_array(qconj(np.asarray(q, dtype=float)))


def norm(q) -> float:
    return float(np.linalg.norm(np.asarray(q, dtype=float)))


def inverse(q) -> Quaternion:
    arr = np.asarray(q, dtype=float)
    n2 = float(arr @ arr)
    if n2 == 0.0:
        raise ZeroDivisionError("the zero quaternion has no inverse")
    return Quaternion.from_array(qconj(arr) / n2)


def normalize(q) -> tuple[float, UnitQuaternion]:
    """Split q = |q| u into the radial factor and a unit quaternion."""
    arr = np.asarray(q, dtype=float)
    n = float(np.linalg.norm(arr))
    if n == 0.0:
        raise ZeroDivisionError("the zero quaternion is not in H*")
    return n, UnitQuaternion(*(arr / n))


def from_polar(radius: float, u) -> Quaternion:
    return Quaternion.from_array(float(radius) * np.asarray(u, dtype=float))


def to_complex_pair(q) -> ComplexPair:
    c0, c1, c2, c3 = np.asarray(q, dtype=float)
    return ComplexPair(complex(c0, c1), complex(c2, -c3))


def from_complex_pair(p: ComplexPair) -> Quaternion:
    z1, z2 = complex(p.z1), complex(p.z2)
    return Quaternion(z1.real, z1.imag, z2.real, -z2.imag)


def complex_coords(q):
    """Array version of :func:`to_complex_pair`: returns ``(v1, v2)``."""
    q = np.asarray(q, dtype=float)
    return q[..., 0] + 1j * q[..., 1], q[..., 2] - 1j * q[..., 3]

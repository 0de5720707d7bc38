"""Second-order forward-mode jets in four real variables.

A :class:`Jet2` carries a complex value together with its four first
partials and the 4x4 matrix of second partials.  All three arrays may
carry an arbitrary leading batch shape, so one jet can describe a field
sampled at many points at once.  Setting ``hess`` to ``None`` drops to a
first-order jet, which is what grid quadrature uses to save memory.

Differentiation is with respect to real coordinates, so complex
conjugation commutes with it and ``conj`` of a jet is the jet of the
conjugate.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Jet2", "variables", "constant", "JetDomainError"]


class JetDomainError(ArithmeticError):
    """Division by zero or a non-finite intermediate inside jet arithmetic."""


def _outer(a, b):
    return a[..., :, None] * b[..., None, :]


class Jet2:
    __slots__ = ("value", "grad", "hess")
    __array_priority__ = 1000

    def __init__(self, value, grad, hess=None):
        self.value = np.asarray(value, dtype=complex)
        self.grad = np.asarray(grad, dtype=complex)
        self.hess = None if hess is None else np.asarray(hess, dtype=complex)

    @property
    def order(self) -> int:
        return 1 if self.hess is None else 2

    @property
    def shape(self):
        return self.value.shape

    def _lift(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return other
        return constant(other, self.shape, order=self.order)

    def __add__(self, other):
        o = self._lift(other)
        h = None if self.hess is None or o.hess is None else self.hess + o.hess
        return Jet2(self.value + o.value, self.grad + o.grad, h)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.grad, None if self.hess is None else -self.hess)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet2):
            c = np.asarray(other, dtype=complex)
            return Jet2(
                self.value * c,
                self.grad * c[..., None],
                None if self.hess is None else self.hess * c[..., None, None],
            )
        a, b = self, other
        value = a.value * b.value
        grad = a.grad * b.value[..., None] + a.value[..., None] * b.grad
        hess = None
        if a.hess is not None and b.hess is not None:
            hess = (
                a.hess * b.value[..., None, None]
                + a.value[..., None, None] * b.hess
                + _outer(a.grad, b.grad)
                + _outer(b.grad, a.grad)
            )
        return Jet2(value, grad, hess)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet2":
        v = self.value
        if np.any(v == 0):
            raise JetDomainError("division by zero")
        inv = 1.0 / v
        d1 = -inv * inv
        grad = d1[..., None] * self.grad
        hess = None
        if self.hess is not None:
            d2 = 2.0 * inv * inv * inv
            hess = d1[..., None, None] * self.hess + d2[..., None, None] * _outer(self.grad, self.grad)
        return Jet2(inv, grad, hess)

    def __truediv__(self, other):
        if isinstance(other, Jet2):
            return self * other.reciprocal()
        c = np.asarray(other, dtype=complex)
        if np.any(c == 0):
            raise JetDomainError("division by zero")
        return self * (1.0 / c)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("jets support integer exponents only")
        if n < 0:
            return (self ** (-n)).reciprocal()
        result = constant(1.0, self.shape, order=self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def conj(self) -> "Jet2":
        return Jet2(
            np.conj(self.value),
            np.conj(self.grad),
            None if self.hess is None else np.conj(self.hess),
        )

    @property
    def real(self) -> "Jet2":
        return Jet2(self.value.real, self.grad.real, None if self.hess is None else self.hess.real)

    @property
    def imag(self) -> "Jet2":
        return Jet2(self.value.imag, self.grad.imag, None if self.hess is None else self.hess.imag)

    def __getitem__(self, idx) -> "Jet2":
        return Jet2(self.value[idx], self.grad[idx], None if self.hess is None else self.hess[idx])

    def is_finite(self) -> np.ndarray:
        ok = np.isfinite(self.value) & np.all(np.isfinite(self.grad), axis=-1)
        if self.hess is not None:
            ok &= np.all(np.isfinite(self.hess), axis=(-2, -1))
        return ok

    def __repr__(self):
        return f"Jet2(value={self.value!r}, order={self.order})"


def constant(c, shape=(), order: int = 2) -> Jet2:
    value = np.broadcast_to(np.asarray(c, dtype=complex), shape).copy()
    grad = np.zeros(shape + (4,), dtype=complex)
    hess = np.zeros(shape + (4, 4), dtype=complex) if order == 2 else None
    return Jet2(value, grad, hess)


def variables(points, order: int = 2) -> tuple[Jet2, Jet2, Jet2, Jet2]:
    """Seed jets for the four coordinates at ``points`` of shape ``(..., 4)``."""
    points = np.asarray(points, dtype=float)
    if points.shape[-1] != 4:
        raise ValueError(f"points must have a trailing axis of length 4, got {points.shape}")
    shape = points.shape[:-1]
    eye = np.eye(4)
    out = []
    for k in range(4):
        grad = np.broadcast_to(eye[k], shape + (4,)).astype(complex)
        hess = np.zeros(shape + (4, 4), dtype=complex) if order == 2 else None
        out.append(Jet2(points[..., k], grad, hess))
    return tuple(out)

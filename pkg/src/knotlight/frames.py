"""Invariant framings of H*, the Maurer-Cartan form and the maps to S^2.

Conventions: eps_{123} = +1, so e1 e2 = e3.  A :data:`Rotation3` matrix is
row-major with ``Q[i, j]`` the i-th component of ``l_j = u e_j conj(u)``,
so column ``j`` is the point of S^2 that :func:`sphere_map` returns.

Functions that take a quaternion accept anything array-like with a
trailing axis of length 4 and broadcast over leading axes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .jet import Jet2, variables
from .quaternion import qconj, qmul

__all__ = [
    "FrameSide",
    "PoleError",
    "MCForm",
    "EPS",
    "invariant_field",
    "field_matrix",
    "bracket",
    "maurer_cartan",
    "dlambda_structure",
    "adjoint_rotation",
    "sphere_map",
    "sphere_map_differential",
    "stereographic",
    "zeta_map",
    "zeta_fraction",
    "zeta_jet",
    "dlambda_pullback",
    "area_pullback",
]


class FrameSide(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class PoleError(ArithmeticError):
    """The point maps to infinity of CP^1."""


EPS = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    EPS[_i, _j, _k] = 1.0
    EPS[_i, _k, _j] = -1.0

_CYCLIC = {1: (2, 3), 2: (3, 1), 3: (1, 2)}
POLE_EPS = 1e-300


def _quat(q) -> np.ndarray:
    return np.asarray(q, dtype=float)


def _unit(q) -> np.ndarray:
    q = _quat(q)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(n == 0):
        raise ZeroDivisionError("the zero quaternion is not in H*")
    return q / n


def _basis(alpha: int) -> np.ndarray:
    e = np.zeros(4)
    e[alpha] = 1.0
    return e


def invariant_field(side: FrameSide, alpha: int, q) -> np.ndarray:
    """L_alpha(q) = q e_alpha (left framing) or R_alpha(q) = e_alpha q."""
    q = _quat(q)
    e = np.broadcast_to(_basis(alpha), q.shape)
    return qmul(q, e) if side is FrameSide.LEFT else qmul(e, q)


def field_matrix(side: FrameSide, alpha: int) -> np.ndarray:
    """The invariant fields are linear in q; this is the matrix of q -> X_alpha(q)."""
    return np.stack([invariant_field(side, alpha, _basis(b)) for b in range(4)], axis=-1)


def bracket(side: FrameSide, alpha: int, beta: int, other: FrameSide | None = None) -> np.ndarray:
    """Lie bracket [X_alpha, Y_beta] expanded in the ``side`` framing.

    X belongs to ``side`` and Y to ``other`` (defaults to ``side``).  For
    linear fields X(q) = A q, Y(q) = B q the bracket is (BA - AB) q, which
    is then decomposed over the four matrices of the framing.
    """
    other = side if other is None else other
    a = field_matrix(side, alpha)
    b = field_matrix(other, beta)
    comm = b @ a - a @ b
    # the framing matrices are signed permutations, orthogonal under the trace
    # pairing with norm 4, so projection is exact in integer arithmetic
    basis = [field_matrix(side, g) for g in range(4)]
    coeffs = np.array([np.sum(m * comm) / 4.0 for m in basis])
    if not np.array_equal(sum(c * m for c, m in zip(coeffs, basis)), comm):
        raise ArithmeticError("bracket does not lie in the span of the framing")
    return coeffs + 0.0


@dataclass(frozen=True)
class MCForm:
    """Left Maurer-Cartan form at a base point.

    ``components[..., mu, :]`` is the covector lambda^mu on R^4.
    """

    base: np.ndarray
    components: np.ndarray

    def __call__(self, v) -> np.ndarray:
        """Evaluate lambda on tangent vectors: the e_mu coefficients of q^-1 v."""
        return np.einsum("...mb,...b->...m", self.components, np.asarray(v, dtype=float))

    def real_part(self) -> np.ndarray:
        return self.components[..., 0, :]


def maurer_cartan(q) -> MCForm:
    q = _quat(q)
    n2 = np.sum(q * q, axis=-1)
    if np.any(n2 == 0):
        raise ZeroDivisionError("the Maurer-Cartan form is undefined at q = 0")
    shape = q.shape[:-1]
    lam = np.zeros(shape + (4, 4))
    lam[..., 0, :] = q
    q0 = q[..., 0]
    qv = q[..., 1:]
    for i in range(3):
        lam[..., i + 1, 0] = -qv[..., i]
        lam[..., i + 1, i + 1] += q0
        # -eps_{ijk} q^j dq^k
        for j in range(3):
            for k in range(3):
                if EPS[i, j, k]:
                    lam[..., i + 1, k + 1] -= EPS[i, j, k] * qv[..., j]
    lam /= n2[..., None, None]
    return MCForm(q, lam)


def dlambda_structure(i: int, q) -> np.ndarray:
    """d(lambda^i) from the structure equations, as an antisymmetric 4x4 matrix.

    Returns -2 lambda^j ^ lambda^k for cyclic (i, j, k) and zero for i = 0.
    """
    lam = maurer_cartan(q).components
    if i == 0:
        return np.zeros(lam.shape)
    j, k = _CYCLIC[i]
    a, b = lam[..., j, :], lam[..., k, :]
    return -2.0 * (a[..., :, None] * b[..., None, :] - b[..., :, None] * a[..., None, :])


def adjoint_rotation(u) -> np.ndarray:
    """The SO(3) matrix of x -> u x conj(u) on Im(H)."""
    u = _quat(u)
    u0, u1, u2, u3 = np.moveaxis(u, -1, 0)
    rows = [
        [u0**2 + u1**2 - u2**2 - u3**2, 2 * (u1 * u2 - u0 * u3), 2 * (u1 * u3 + u0 * u2)],
        [2 * (u1 * u2 + u0 * u3), u0**2 - u1**2 + u2**2 - u3**2, 2 * (u2 * u3 - u0 * u1)],
        [2 * (u1 * u3 - u0 * u2), 2 * (u2 * u3 + u0 * u1), u0**2 - u1**2 - u2**2 + u3**2],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def sphere_map(i: int, u) -> np.ndarray:
    """l_i(u) = u e_i conj(u) as a unit 3-vector; ``u`` is normalised first."""
    u = _unit(u)
    e = np.broadcast_to(_basis(i), u.shape)
    return qmul(qmul(u, e), qconj(u))[..., 1:]


def sphere_map_differential(i: int, q) -> np.ndarray:
    """Jacobian d l_i = 2 lambda^j eps_{jik} l_k, shape ``(..., 3, 4)``.

    ``out[..., a, b]`` is the derivative of the a-th component of l_i along
    q^b.  Built from the Maurer-Cartan form rather than by differentiating
    :func:`sphere_map`, so the two can be checked against each other.
    """
    lam = maurer_cartan(q).components
    l_all = [sphere_map(k, q) for k in (1, 2, 3)]
    out = np.zeros(lam.shape[:-2] + (3, 4))
    for j in range(3):
        for k in range(3):
            c = EPS[j, i - 1, k]
            if c:
                out += 2.0 * c * l_all[k][..., :, None] * lam[..., j + 1, None, :]
    return out


def stereographic(n) -> complex:
    """sigma(n) = (n2 - i n3) / (1 + n1), defined off the point (-1, 0, 0)."""
    n = np.asarray(n, dtype=float)
    den = 1.0 + n[..., 0]
    if np.any(np.abs(den) < POLE_EPS):
        raise PoleError("stereographic projection is undefined at (-1, 0, 0)")
    return (n[..., 1] - 1j * n[..., 2]) / den


def _fraction(i: int, v1, v2, conj):
    if i == 1:
        return 1j * v2, v1
    if i == 2:
        return conj(v1) + 1j * v2, v1 + 1j * conj(v2)
    if i == 3:
        return 1j * (v2 - conj(v1)), conj(v2) + v1
    raise ValueError(f"zeta index must be 1, 2 or 3, got {i}")


def zeta_fraction(i: int, q) -> tuple[np.ndarray, np.ndarray]:
    """Numerator and denominator of zeta_i in homogeneous coordinates on CP^1."""
    q = _quat(q)
    v1 = q[..., 0] + 1j * q[..., 1]
    v2 = q[..., 2] - 1j * q[..., 3]
    return _fraction(i, v1, v2, np.conj)


def zeta_map(i: int, q):
    """zeta_i = sigma o l_i from the closed forms in (v1, v2).

    The closed forms are homogeneous of degree zero, so ``q`` need not be
    normalised.  Raises :class:`PoleError` where the denominator vanishes.
    """
    num, den = zeta_fraction(i, q)
    if np.any(np.abs(den) < POLE_EPS):
        raise PoleError(f"zeta_{i} has a pole at this point")
    return num / den


def zeta_jet(i: int, q, order: int = 1) -> Jet2:
    """zeta_i with exact derivatives with respect to (q0, q1, q2, q3)."""
    q0, q1, q2, q3 = variables(_quat(q), order)
    v1 = q0 + 1j * q1
    v2 = q2 - 1j * q3
    num, den = _fraction(i, v1, v2, lambda a: a.conj())
    if np.any(np.abs(den.value) < POLE_EPS):
        raise PoleError(f"zeta_{i} has a pole at this point")
    return num / den


def area_pullback(jet: Jet2) -> np.ndarray:
    """i dw ^ dw-bar / (1 + |w|^2)^2 as an antisymmetric matrix.

    This is -2 pi times the pullback of the normalised area form of S^2
    through the inverse of sigma; sigma reverses orientation, hence dw
    before dw-bar.
    """
    g = jet.grad
    wedge = g[..., :, None] * np.conj(g)[..., None, :] - np.conj(g)[..., :, None] * g[..., None, :]
    return 1j * wedge / ((1.0 + np.abs(jet.value) ** 2) ** 2)[..., None, None]


def dlambda_pullback(j: int, q) -> np.ndarray:
    """d(lambda^j) recovered from zeta_j alone (complex dtype, real up to rounding)."""
    return area_pullback(zeta_jet(j, q, order=1))

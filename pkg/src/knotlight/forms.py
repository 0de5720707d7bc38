"""Complex exterior algebra on Minkowski space, signature (+, -, -, -).

Covectors are arrays with a trailing axis of length 4 in coordinate order
(t, x, y, z).  Two-forms are arrays with a trailing axis of length 6 in the
basis order

    dt^dx, dt^dy, dt^dz, dy^dz, dz^dx, dx^dy

so the first three entries form the "electric" block and the last three
the "magnetic" block.  The orientation is fixed by eps_{txyz} = +1, under
which the Hodge star is the block swap ``(e, m) -> (m, -e)``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "METRIC",
    "PAIRS",
    "TWOFORM_LABELS",
    "wedge11",
    "wedge22",
    "hodge2",
    "flat",
    "sharp",
    "inner",
    "dot",
    "interior",
    "to_matrix",
    "from_matrix",
    "self_dual_part",
    "d_covector",
    "d_twoform",
    "omega_basis",
    "basis_covector",
    "basis_twoform",
]

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])

# (mu, nu) index pairs of the six basis two-forms
PAIRS = ((0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2))
TWOFORM_LABELS = ("dt^dx", "dt^dy", "dt^dz", "dy^dz", "dz^dx", "dx^dy")
_MU = np.array([p[0] for p in PAIRS])
_NU = np.array([p[1] for p in PAIRS])
_SIG = np.array([1.0, -1.0, -1.0, -1.0])

# index triples (lambda < mu < nu) of the four basis three-forms
TRIPLES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))


def basis_covector(mu: int) -> np.ndarray:
    e = np.zeros(4, dtype=complex)
    e[mu] = 1.0
    return e


def basis_twoform(label: str) -> np.ndarray:
    e = np.zeros(6, dtype=complex)
    e[TWOFORM_LABELS.index(label)] = 1.0
    return e


def to_matrix(a) -> np.ndarray:
    """Antisymmetric ``(..., 4, 4)`` matrix a_{mu nu} of a two-form."""
    a = np.asarray(a)
    out = np.zeros(a.shape[:-1] + (4, 4), dtype=np.result_type(a, float))
    out[..., _MU, _NU] = a
    out[..., _NU, _MU] = -a
    return out


def from_matrix(m) -> np.ndarray:
    """Six components of the antisymmetric part of ``m`` (rank-2, index down)."""
    m = np.asarray(m)
    return 0.5 * (m[..., _MU, _NU] - m[..., _NU, _MU])


def wedge11(a, b) -> np.ndarray:
    """(a^b)_{mu nu} = a_mu b_nu - a_nu b_mu."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a[..., _MU] * b[..., _NU] - a[..., _NU] * b[..., _MU]


def wedge22(a, b):
    """Coefficient of dt^dx^dy^dz in a^b.

    With this normalisation ``wedge22(F, F) = -F_{ab} (*F)^{ab} / 2`` for a
    real two-form, i.e. the pseudoscalar invariant up to the stated factor.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    return np.sum(a[..., :3] * b[..., 3:] + a[..., 3:] * b[..., :3], axis=-1)


def hodge2(a) -> np.ndarray:
    a = np.asarray(a)
    return np.concatenate([a[..., 3:], -a[..., :3]], axis=-1)


def self_dual_part(a) -> np.ndarray:
    """Projector (1 - i*)/2; its image satisfies *R = iR."""
    a = np.asarray(a)
    return 0.5 * (a - 1j * hodge2(a))


def flat(v) -> np.ndarray:
    return np.asarray(v) * _SIG


def sharp(a) -> np.ndarray:
    return np.asarray(a) * _SIG


def inner(a, b):
    """g^{mu nu} a_mu b_nu (bilinear, no conjugation)."""
    return np.sum(np.asarray(a) * np.asarray(b) * _SIG, axis=-1)


def dot(u, v):
    """g_{mu nu} u^mu v^nu for vectors (bilinear, no conjugation)."""
    return np.sum(np.asarray(u) * np.asarray(v) * _SIG, axis=-1)


def interior(v, a) -> np.ndarray:
    """(v _| a)_nu = v^mu a_{mu nu}."""
    return np.einsum("...m,...mn->...n", np.asarray(v), to_matrix(a))


def d_covector(jac) -> np.ndarray:
    """Exterior derivative of a covector field from ``jac[..., mu, nu] = d_mu c_nu``."""
    jac = np.asarray(jac)
    return jac[..., _MU, _NU] - jac[..., _NU, _MU]


def d_twoform(jac) -> np.ndarray:
    """Exterior derivative of a two-form field.

    ``jac[..., lam, k]`` is the partial derivative along coordinate ``lam``
    of the k-th basis component.  Returns the four components of dF on
    dt^dx^dy, dt^dx^dz, dt^dy^dz, dx^dy^dz.
    """
    full = to_matrix(np.asarray(jac))  # full[..., lam, mu, nu] = d_lam F_{mu nu}
    out = [
        full[..., lam, mu, nu] + full[..., mu, nu, lam] + full[..., nu, lam, mu]
        for lam, mu, nu in TRIPLES
    ]
    return np.stack(out, axis=-1)


def omega_basis() -> np.ndarray:
    """The self-dual basis dt^dx_k + i (dual spatial plane), k = x, y, z; shape (3, 6)."""
    w = np.zeros((3, 6), dtype=complex)
    for k in range(3):
        w[k, k] = 1.0
        w[k, 3 + k] = 1j
    return w

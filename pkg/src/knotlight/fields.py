"""Null Maxwell fields from Bateman pairs.

A :class:`BatemanField` is a pair of complex scalar fields (alpha, beta),
each given as a *jet provider*: a callable ``provider(points, order)``
returning a :class:`~knotlight.jet.Jet2`.  Everything else is derived
algebraically from first and second derivatives of the pair:

    R  = 2 d(alpha) ^ d(beta)
    k  = -i (conj(alpha) d(alpha) + conj(beta) d(beta))
    m  = 2i (alpha d(beta) - beta d(alpha))

Sign conventions used throughout: the observer is X = d/dt and
E + iB are the spatial components of X _| R, i.e. ``E_j = Re R_{tj}`` and
``B_j = Im R_{tj}``.  With R = F - i*F this is the usual
F_{tj} = E_j, F_{jk} = -eps_{jkl} B_l in signature (+, -, -, -).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import forms
from .exprlang import Expression
from .jet import Jet2, variables

__all__ = [
    "BatemanField",
    "FieldSample",
    "NullTetrad",
    "KMForms",
    "OpticalScalars",
    "DegenerateFieldError",
    "DegenerateFieldWarning",
    "POLE",
    "hopf_ranada",
    "rs_form",
    "eb_extract",
    "km_forms",
    "psi_maps",
    "psi_fractions",
    "psi_jets",
    "s_form",
    "null_tetrad",
    "poynting",
    "optical_scalars",
    "sample",
    "line_direction",
    "chordal_distance",
]

JetProvider = Callable[..., Jet2]

# psi maps take values in CP^1; infinity is represented by this marker
POLE = complex(np.inf, np.inf)
PSI_POLE_EPS = 1e-300


class DegenerateFieldError(ValueError):
    pass


class DegenerateFieldWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class BatemanField:
    alpha: JetProvider
    beta: JetProvider
    name: str = "custom"
    normalized: bool = False

    @classmethod
    def from_expressions(cls, alpha: str, beta: str, normalized: bool = False) -> "BatemanField":
        return cls(Expression(alpha), Expression(beta), name=f"alpha={alpha}; beta={beta}", normalized=normalized)

    def jets(self, points, order: int = 2) -> tuple[Jet2, Jet2]:
        return self.alpha(points, order), self.beta(points, order)

    def scaled(self, c_alpha: complex = 1.0, c_beta: complex = 1.0) -> "BatemanField":
        """Field with alpha and beta multiplied by constants (breaks normalisation)."""
        a, b = self.alpha, self.beta
        return BatemanField(
            lambda p, order=2: a(p, order) * c_alpha,
            lambda p, order=2: b(p, order) * c_beta,
            name=f"{self.name} scaled",
        )


def _hopf_ranada_pair(points, order):
    t, x, y, z = variables(points, order)
    r2 = x * x + y * y + z * z
    c = r2 - (t - 1j) ** 2
    inv_c = c.reciprocal()
    alpha = (r2 - t * t - 1.0 + 2j * z) * inv_c
    beta = 2.0 * (x - 1j * y) * inv_c
    return alpha, beta


def hopf_ranada() -> BatemanField:
    """The Hopf-Ranada knotted null field.

    alpha = (r^2 - t^2 - 1 + 2iz) / C,  beta = 2(x - iy) / C,  C = r^2 - (t - i)^2.
    |C|^2 = (r^2 - t^2 + 1)^2 + 4t^2 >= 1 on real points, so the pair is
    smooth everywhere and |alpha|^2 + |beta|^2 = 1 identically.
    """
    return BatemanField(
        lambda p, order=2: _hopf_ranada_pair(p, order)[0],
        lambda p, order=2: _hopf_ranada_pair(p, order)[1],
        name="hopf-ranada",
        normalized=True,
    )


def hopf_ranada_closed_form(points) -> np.ndarray:
    """Riemann-Silberstein form of the Hopf-Ranada field written out in the omega basis."""
    points = np.asarray(points, dtype=float)
    t, x, y, z = np.moveaxis(points, -1, 0)
    c = x**2 + y**2 + z**2 - (t - 1j) ** 2
    p = x - 1j * y
    s = t - z - 1j
    w = forms.omega_basis()
    coeff = 8j / c**3
    return coeff[..., None] * (
        ((p**2 - s**2))[..., None] * w[0]
        + (1j * (p**2 + s**2))[..., None] * w[1]
        - (2 * p * s)[..., None] * w[2]
    )


# -- local geometry -------------------------------------------------------------------


class _Local:
    """Everything derived from the jets of (alpha, beta) on a batch of points."""

    def __init__(self, f: BatemanField, points, order: int = 2):
        self.points = np.asarray(points, dtype=float)
        self.a, self.b = f.jets(self.points, order)
        a, b = self.a, self.b
        da, db = a.grad, b.grad
        av, bv = a.value[..., None], b.value[..., None]
        self.R = 2.0 * forms.wedge11(da, db)
        self.k = -1j * (np.conj(av) * da + np.conj(bv) * db)
        self.m = 2j * (av * db - bv * da)
        self.norm_defect = np.abs(a.value) ** 2 + np.abs(b.value) ** 2 - 1.0

    def _outer(self, u, v):
        return u[..., :, None] * v[..., None, :]

    @property
    def jac_k(self):
        """jac[..., mu, nu] = d_mu k_nu, exact from second derivatives."""
        a, b = self.a, self.b
        av, bv = a.value[..., None, None], b.value[..., None, None]
        return -1j * (
            self._outer(np.conj(a.grad), a.grad)
            + np.conj(av) * a.hess
            + self._outer(np.conj(b.grad), b.grad)
            + np.conj(bv) * b.hess
        )

    @property
    def jac_m(self):
        a, b = self.a, self.b
        av, bv = a.value[..., None, None], b.value[..., None, None]
        return 2j * (self._outer(a.grad, b.grad) + av * b.hess - self._outer(b.grad, a.grad) - bv * a.hess)

    @property
    def jac_R(self):
        """jac[..., lam, comp] = d_lam of the six basis components of R."""
        a, b = self.a, self.b
        mu, nu = np.array(forms.PAIRS).T
        ha, hb = a.hess, b.hess
        da, db = a.grad, b.grad
        return 2.0 * (
            ha[..., :, mu] * db[..., None, nu]
            + da[..., None, mu] * hb[..., :, nu]
            - ha[..., :, nu] * db[..., None, mu]
            - da[..., None, nu] * hb[..., :, mu]
        )

    @property
    def dk(self):
        return forms.d_covector(self.jac_k)

    @property
    def dm(self):
        return forms.d_covector(self.jac_m)

    @property
    def dR(self):
        return forms.d_twoform(self.jac_R)

    @property
    def S(self):
        return 1j * forms.wedge11(self.m, np.conj(self.m)) / 4.0


def psi_fractions(a, b):
    """Homogeneous (numerator, denominator) of psi_1..psi_3 from values or jets of the pair."""
    def conj(v):
        return v.conj() if isinstance(v, Jet2) else np.conj(v)

    return (
        (1j * b, a),
        (conj(a) + 1j * b, a + 1j * conj(b)),
        (1j * (b - conj(a)), conj(b) + a),
    )


def _ratio(num, den):
    num = np.asarray(num, dtype=complex)
    den = np.asarray(den, dtype=complex)
    pole = np.abs(den) < PSI_POLE_EPS
    with np.errstate(all="ignore"):
        out = np.where(pole, POLE, num / np.where(pole, 1.0, den))
    return out[()] if out.ndim == 0 else out


def psi_jets(f: BatemanField, points) -> tuple[Jet2, Jet2, Jet2]:
    """First-order jets of psi_1, psi_2, psi_3 (raises at poles)."""
    a, b = f.jets(points, order=1)
    return tuple(num / den for num, den in psi_fractions(a, b))


def chordal_distance(z, w):
    """Chordal distance on CP^1; either argument may be :data:`POLE`."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    zi, wi = np.isinf(z), np.isinf(w)
    with np.errstate(all="ignore"):
        d = 2.0 * np.abs(z - w) / np.sqrt((1 + np.abs(z) ** 2) * (1 + np.abs(w) ** 2))
        d = np.where(zi & ~wi, 2.0 / np.sqrt(1 + np.abs(w) ** 2), d)
        d = np.where(wi & ~zi, 2.0 / np.sqrt(1 + np.abs(z) ** 2), d)
        d = np.where(zi & wi, 0.0, d)
    return d


# -- public operations ----------------------------------------------------------------


def rs_form(f: BatemanField, p) -> np.ndarray:
    """R = 2 d(alpha) ^ d(beta); warns if R vanishes identically at ``p``."""
    R = _Local(f, p, order=1).R
    if np.any(np.all(R == 0, axis=-1)):
        warnings.warn("Riemann-Silberstein form vanishes (degenerate pair)", DegenerateFieldWarning, stacklevel=2)
    return R


def eb_extract(R) -> tuple[np.ndarray, np.ndarray]:
    """Electric and magnetic 3-vectors from a Riemann-Silberstein form."""
    R = np.asarray(R, dtype=complex)
    eb = forms.interior(forms.basis_covector(0), R)[..., 1:]
    return eb.real, eb.imag


@dataclass(frozen=True)
class KMForms:
    k: np.ndarray
    m: np.ndarray
    normalization_defect: np.ndarray

    @property
    def k_imag(self):
        return np.max(np.abs(self.k.imag), axis=-1)


def km_forms(f: BatemanField, p) -> KMForms:
    loc = _Local(f, p, order=1)
    return KMForms(loc.k, loc.m, loc.norm_defect)


def psi_maps(f: BatemanField, p) -> tuple:
    """(psi_1, psi_2, psi_3); a pole is reported as :data:`POLE`."""
    a, b = f.jets(p, order=1)
    return tuple(_ratio(n, d) for n, d in psi_fractions(a.value, b.value))


def s_form(f: BatemanField, p) -> np.ndarray:
    """S = i m ^ conj(m) / 4 (real)."""
    return _Local(f, p, order=1).S.real


@dataclass(frozen=True)
class NullTetrad:
    """Vectors (index up): k, l real null; m complex null with g(m, conj m) = -1."""

    k: np.ndarray
    l: np.ndarray
    m: np.ndarray
    m_raw: np.ndarray

    def products(self) -> dict:
        g = forms.dot
        k, l, m = self.k, self.l, self.m
        return {
            "kk": g(k, k),
            "ll": g(l, l),
            "kl": g(k, l),
            "lm": g(l, m),
            "km": g(k, m),
            "mm": g(m, m),
            "mmbar": g(m, np.conj(m)),
        }

    def metric_residual(self) -> np.ndarray:
        """max |k_a l_b + l_a k_b - m_a mbar_b - mbar_a m_b - g_ab|."""
        k, l, m = (forms.flat(v) for v in (self.k, self.l, self.m))
        o = lambda u, v: u[..., :, None] * v[..., None, :]
        g = o(k, l) + o(l, k) - o(m, np.conj(m)) - o(np.conj(m), m)
        return np.max(np.abs(g - forms.METRIC), axis=(-2, -1))


def _tetrad_from(k_cov, m_cov) -> NullTetrad:
    kv = forms.sharp(np.real(np.asarray(k_cov)))
    mv_raw = forms.sharp(np.asarray(m_cov, dtype=complex))
    scale_k = np.max(np.abs(kv), axis=-1)
    if np.any(scale_k == 0):
        raise DegenerateFieldError("k vanishes; no null tetrad")
    mm_bar = forms.dot(mv_raw, np.conj(mv_raw)).real
    if np.any(mm_bar >= 0) or np.any(np.max(np.abs(mv_raw), axis=-1) == 0):
        raise DegenerateFieldError("m is zero or not spacelike; no null tetrad")
    m = mv_raw / np.sqrt(-mm_bar)[..., None]
    # w = T + g(T, mbar) m + g(T, m) mbar is the part of T orthogonal to the screen
    T = np.zeros(kv.shape)
    T[..., 0] = 1.0
    gtm = forms.dot(T, m)
    w = (T + np.conj(gtm)[..., None] * m + gtm[..., None] * np.conj(m)).real
    y = forms.dot(w, kv)
    x = forms.dot(w, w) / (2.0 * y)
    l = (w - x[..., None] * kv) / y[..., None]
    return NullTetrad(kv, l, m, mv_raw)


def null_tetrad(f: BatemanField, p) -> NullTetrad:
    loc = _Local(f, p, order=1)
    return _tetrad_from(loc.k.real, loc.m)


def poynting(sample_or_E, B=None) -> np.ndarray:
    """E x B, from a :class:`FieldSample` or from explicit E and B."""
    if B is None:
        E, B = sample_or_E.E, sample_or_E.B
    else:
        E = sample_or_E
    return np.cross(E, B)


@dataclass(frozen=True)
class OpticalScalars:
    """Geodesic residual, expansion, twist and shear magnitude of k.

    With screen vector m (g(m, conj m) = -1) and rho = m^a conj(m)^b grad_b k_a:
    expansion = -Re(rho), twist = Im(rho), shear = |m^a m^b grad_b k_a|.
    The geodesic residual is |a - kappa k| / (|k| |grad k|) for the
    acceleration a = k . grad k with best-fit inaffinity kappa.
    """

    geodesic_residual: np.ndarray
    kappa: np.ndarray
    expansion: np.ndarray
    twist: np.ndarray
    shear: np.ndarray


def optical_scalars(f: BatemanField, p) -> OpticalScalars:
    loc = _Local(f, p, order=2)
    tet = _tetrad_from(loc.k.real, loc.m)
    jac = loc.jac_k.real  # d_mu k_nu
    kv = tet.k
    accel = forms.sharp(np.einsum("...m,...mn->...n", kv, jac))
    kappa = np.sum(accel * kv, axis=-1) / np.sum(kv * kv, axis=-1)
    resid = accel - kappa[..., None] * kv
    scale = np.linalg.norm(kv, axis=-1) * np.linalg.norm(jac, axis=(-2, -1))
    geo = np.linalg.norm(resid, axis=-1) / scale
    m = tet.m
    # grad_b k_a contracted as X^a Y^b jac[b, a]
    rho = np.einsum("...a,...b,...ba->...", m, np.conj(m), jac)
    sigma = np.einsum("...a,...b,...ba->...", m, m, jac)
    return OpticalScalars(geo, kappa, -rho.real, rho.imag, np.abs(sigma))


@dataclass(frozen=True)
class FieldSample:
    point: np.ndarray
    R: np.ndarray
    F: np.ndarray
    starF: np.ndarray
    E: np.ndarray
    B: np.ndarray
    k: np.ndarray
    m: np.ndarray
    psi1: complex
    psi2: complex
    psi3: complex
    S: np.ndarray
    poynting: np.ndarray


def sample(f: BatemanField, p) -> FieldSample:
    loc = _Local(f, p, order=1)
    E, B = eb_extract(loc.R)
    psi = tuple(_ratio(n, d) for n, d in psi_fractions(loc.a.value, loc.b.value))
    return FieldSample(
        point=loc.points,
        R=loc.R,
        F=loc.R.real,
        starF=-loc.R.imag,
        E=E,
        B=B,
        k=loc.k,
        m=loc.m,
        psi1=psi[0],
        psi2=psi[1],
        psi3=psi[2],
        S=loc.S.real,
        poynting=np.cross(E, B),
    )


LINE_FAMILIES = ("magnetic", "electric", "poynting")


def line_direction(f: BatemanField, family: str, t: float) -> Callable[[np.ndarray], np.ndarray]:
    """Spatial direction field at time ``t`` for one family of field lines."""
    if family not in LINE_FAMILIES:
        raise ValueError(f"unknown line family {family!r}; expected one of {LINE_FAMILIES}")

    def direction(xyz):
        xyz = np.asarray(xyz, dtype=float)
        p = np.concatenate([np.full(xyz.shape[:-1] + (1,), float(t)), xyz], axis=-1)
        a, b = f.jets(p, order=1)
        R = 2.0 * forms.wedge11(a.grad, b.grad)
        E, B = eb_extract(R)
        if family == "magnetic":
            return B
        if family == "electric":
            return E
        return np.cross(E, B)

    return direction


def psi_for_family(family: str) -> int:
    return {"magnetic": 2, "electric": 3, "poynting": 1}[family]

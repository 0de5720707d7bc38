"""Residual battery for Bateman pairs.

Every check maps the local geometry at a batch of points to one
nonnegative residual per point.  :func:`run_battery` samples a box with a
scrambled Sobol sequence, drops points that sit on a singularity or within
``pole_eps`` of a pole of the psi maps (drawing replacements), and reduces
the residuals to max/mean per check.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import qmc

from . import forms
from .exprlang import EvaluationError
from .fields import BatemanField, _Local, psi_fractions
from .frames import area_pullback
from .jet import Jet2, JetDomainError

__all__ = [
    "CHECKS",
    "DEFAULT_TOLERANCES",
    "CheckResult",
    "ResidualReport",
    "run_battery",
    "check_single",
    "parse_box",
    "SCHEMA",
]

SCHEMA = "knotlight.verify/1"

_ALGEBRAIC = 1e-10
_ANALYTIC = 1e-9


def _maxabs(a, axis=-1):
    return np.max(np.abs(a), axis=axis)


# -- residual kernels on plain arrays (usable directly as negative controls) ---------


def self_dual_residual(R):
    return _maxabs(forms.hodge2(R) - 1j * np.asarray(R))


def decomposable_residual(R):
    return np.abs(forms.wedge22(R, R))


def closed_residual(dR):
    return _maxabs(dR)


def null_residual(k, m):
    g = forms.inner
    return np.max(np.abs(np.stack([g(k, k), g(m, m), g(k, m)], axis=-1)), axis=-1)


def pullback_residual(target, psi: Jet2):
    return _maxabs(target - forms.from_matrix(area_pullback(psi)))


# -- checks wired to the local geometry of a Bateman pair ----------------------------


def _psi(loc: _Local, which: int) -> Jet2:
    a = Jet2(loc.a.value, loc.a.grad)
    b = Jet2(loc.b.value, loc.b.grad)
    num, den = psi_fractions(a, b)[which - 1]
    return num / den


@dataclass(frozen=True)
class Check:
    name: str
    description: str
    tolerance: float
    residual: Callable[[_Local], np.ndarray]


def _dadb(loc: _Local):
    return forms.wedge11(loc.a.grad, loc.b.grad)


CHECKS: dict[str, Check] = {
    c.name: c
    for c in [
        Check("self_dual", "|*R - iR|", _ANALYTIC, lambda L: self_dual_residual(L.R)),
        Check("decomposable", "|R ^ R| (dt^dx^dy^dz coefficient)", _ALGEBRAIC, lambda L: decomposable_residual(L.R)),
        Check("closed", "|dR| from second derivatives", _ANALYTIC, lambda L: closed_residual(L.dR)),
        Check("bateman", "|*(da^db) - i da^db|", _ANALYTIC, lambda L: self_dual_residual(_dadb(L))),
        Check("null", "max(|g(k,k)|, |g(m,m)|, |g(k,m)|)", _ALGEBRAIC, lambda L: null_residual(L.k, L.m)),
        Check("normalized", "| |a|^2 + |b|^2 - 1 |", _ALGEBRAIC, lambda L: np.abs(L.norm_defect)),
        Check("dk_relation", "|dk - i m^conj(m)/4|", _ANALYTIC, lambda L: _maxabs(L.dk - L.S)),
        Check(
            "dm_relation",
            "|dm - 2i k^m|",
            _ANALYTIC,
            lambda L: _maxabs(L.dm - 2j * forms.wedge11(L.k, L.m)),
        ),
        Check(
            "pullback_F",
            "|F - i dpsi2^conj(dpsi2)/(1+|psi2|^2)^2|",
            _ANALYTIC,
            lambda L: pullback_residual(L.R.real, _psi(L, 2)),
        ),
        Check(
            "pullback_starF",
            "|*F - i dpsi3^conj(dpsi3)/(1+|psi3|^2)^2|",
            _ANALYTIC,
            lambda L: pullback_residual(-L.R.imag, _psi(L, 3)),
        ),
        Check(
            "reconstruction",
            "|R - k^m|",
            _ALGEBRAIC,
            lambda L: _maxabs(L.R - forms.wedge11(L.k, L.m)),
        ),
    ]
}

DEFAULT_TOLERANCES = {name: c.tolerance for name, c in CHECKS.items()}


@dataclass
class CheckResult:
    name: str
    samples: int
    max_residual: float
    mean_residual: float
    tolerance: float
    passed: bool


@dataclass
class ResidualReport:
    field: str
    checks: list[CheckResult]
    passed: bool
    seed: int
    box: list[list[float]]
    samples_requested: int
    samples_used: int
    resampled: int
    schema: str = SCHEMA
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["checks"] = {c.name: {k: v for k, v in asdict(c).items() if k != "name"} for c in self.checks}
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]


def parse_box(box) -> np.ndarray:
    """Normalise a sampling box to shape ``(dim, 2)``.

    Accepts ``(a, b)`` applied to every axis or a sequence of per-axis
    ``(lo, hi)`` pairs.
    """
    arr = np.asarray(box, dtype=float)
    if arr.shape == (2,):
        arr = np.tile(arr, (4, 1))
    if arr.ndim != 2 or arr.shape[1] != 2 or np.any(arr[:, 1] <= arr[:, 0]):
        raise ValueError(f"invalid sampling box {box!r}")
    return arr


def _good_mask(f: BatemanField, pts: np.ndarray, pole_eps: float) -> np.ndarray:
    """Points where the pair evaluates finitely and every psi map is away from its pole."""

    def ok(batch):
        a, b = f.jets(batch, order=1)
        fin = a.is_finite() & b.is_finite()
        dens = [np.abs(d) for _, d in psi_fractions(a.value, b.value)]
        return fin & np.all(np.stack(dens) > pole_eps, axis=0)

    try:
        with np.errstate(all="ignore"):
            return ok(pts)
    except (EvaluationError, JetDomainError, ZeroDivisionError):
        mask = np.zeros(len(pts), dtype=bool)
        for n, p in enumerate(pts):
            try:
                with np.errstate(all="ignore"):
                    mask[n] = bool(ok(p[None])[0])
            except (EvaluationError, JetDomainError, ZeroDivisionError):
                mask[n] = False
        return mask


def _sample_points(f: BatemanField, box: np.ndarray, n: int, seed: int, pole_eps: float):
    sobol = qmc.Sobol(d=4, scramble=True, seed=seed)
    kept = []
    drawn = 0
    budget = 20 * n + 64
    while sum(len(k) for k in kept) < n and drawn < budget:
        want = n - sum(len(k) for k in kept)
        with warnings.catch_warnings():
            # non-power-of-two draws only lose the balance guarantee
            warnings.simplefilter("ignore", UserWarning)
            raw = sobol.random(max(want, 8))
        drawn += len(raw)
        pts = qmc.scale(raw, box[:, 0], box[:, 1])
        kept.append(pts[_good_mask(f, pts, pole_eps)])
    pts = np.concatenate(kept)[:n] if kept else np.empty((0, 4))
    return pts, drawn - len(pts)


def run_battery(
    f: BatemanField,
    box=(-2.0, 2.0),
    n: int = 1000,
    seed: int = 0,
    tolerances: dict | None = None,
    checks=None,
    pole_eps: float = 1e-8,
) -> ResidualReport:
    """Score ``f`` against every identity of a null Bateman field.

    ``tolerances`` overrides entries of :data:`DEFAULT_TOLERANCES`;
    ``checks`` restricts the battery to a subset of names.
    """
    if n < 1:
        raise ValueError("sample count must be at least 1")
    tol = dict(DEFAULT_TOLERANCES)
    for name, value in (tolerances or {}).items():
        if name not in CHECKS:
            raise KeyError(f"unknown check {name!r}")
        tol[name] = float(value)
    names = list(CHECKS) if checks is None else list(checks)
    for name in names:
        if name not in CHECKS:
            raise KeyError(f"unknown check {name!r}")
    box = parse_box(box)
    pts, resampled = _sample_points(f, box, n, seed, pole_eps)
    if len(pts) == 0:
        raise ValueError("every sample point was singular; nothing to verify")
    with np.errstate(all="ignore"):
        loc = _Local(f, pts, order=2)
        results = []
        for name in names:
            r = np.asarray(CHECKS[name].residual(loc), dtype=float)
            mx = float(np.max(r))
            results.append(
                CheckResult(
                    name=name,
                    samples=int(r.size),
                    max_residual=mx,
                    mean_residual=float(np.mean(r)),
                    tolerance=tol[name],
                    passed=bool(mx <= tol[name]),
                )
            )
    return ResidualReport(
        field=f.name,
        checks=results,
        passed=all(c.passed for c in results),
        seed=int(seed),
        box=box.tolist(),
        samples_requested=int(n),
        samples_used=int(len(pts)),
        resampled=int(resampled),
    )


def check_single(name: str, f: BatemanField, p) -> float:
    """One residual at one point."""
    if name not in CHECKS:
        raise KeyError(f"unknown check {name!r}; known: {', '.join(CHECKS)}")
    loc = _Local(f, np.asarray(p, dtype=float)[None, :], order=2)
    return float(CHECKS[name].residual(loc)[0])

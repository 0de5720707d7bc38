"""Field lines, linking, helicity and the Hopf fibrations of S^3."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import DOP853
from scipy.optimize import brentq

from . import frames
from .fields import BatemanField, _Local, chordal_distance, eb_extract, psi_maps
from .quaternion import qmul

__all__ = [
    "Curve",
    "TraceConfig",
    "GridSpec",
    "TraceError",
    "CloseCurvesWarning",
    "trace_line",
    "psi_constancy",
    "gauss_linking",
    "helicity",
    "volume_integral",
    "potentials",
    "HelicityResult",
    "hopf_density",
    "hopf_invariant",
    "hopf_fibers_s3",
    "fibration_seeds",
    "choose_projection_pole",
    "project_s3",
    "hopf_circles",
]


class TraceError(RuntimeError):
    pass


class CloseCurvesWarning(RuntimeWarning):
    pass


@dataclass
class Curve:
    """Oriented polyline in R^3.

    For a closed curve the last vertex is *not* repeated; the segment from
    the last vertex back to the first is implied.
    """

    points: np.ndarray
    arclength: np.ndarray = None
    closed: bool = False
    closure_gap: float = float("nan")
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] != 3:
            raise ValueError(f"curve points must have shape (N, 3), got {self.points.shape}")
        if self.arclength is None:
            seg = np.linalg.norm(np.diff(self.points, axis=0), axis=1)
            self.arclength = np.concatenate([[0.0], np.cumsum(seg)])
        self.arclength = np.asarray(self.arclength, dtype=float)

    def __len__(self):
        return len(self.points)

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        """Segment start points and displacement vectors (closing segment included)."""
        p = self.points
        q = np.roll(p, -1, axis=0) if self.closed else p[1:]
        start = p if self.closed else p[:-1]
        return start, q - start

    def length(self) -> float:
        return float(np.sum(np.linalg.norm(self.segments()[1], axis=1)))

    def max_segment(self) -> float:
        return float(np.max(np.linalg.norm(self.segments()[1], axis=1)))

    def transformed(self, rotation: np.ndarray, shift=0.0) -> "Curve":
        return Curve(self.points @ np.asarray(rotation).T + shift, None, self.closed, self.closure_gap)


@dataclass(frozen=True)
class TraceConfig:
    step: float = 1e-2
    rtol: float = 1e-10
    atol: float = 1e-12
    max_arclength: float = 60.0
    closure_tol: float = 1e-4
    min_arclength: float = 0.1
    max_segment: float = 1e-2
    align_cos: float = 0.999
    min_step: float = 1e-8

    def __post_init__(self):
        for name in ("step", "rtol", "atol", "max_arclength", "closure_tol", "min_arclength", "max_segment", "min_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"TraceConfig.{name} must be positive")
        if not self.min_arclength < self.max_arclength:
            raise ValueError("min_arclength must be below max_arclength")


@dataclass(frozen=True)
class GridSpec:
    bounds: tuple
    resolution: tuple

    def __post_init__(self):
        b = np.asarray(self.bounds, dtype=float)
        if b.shape == (2,):
            b = np.tile(b, (3, 1))
        res = np.broadcast_to(np.asarray(self.resolution, dtype=int), (3,))
        if b.shape != (3, 2) or np.any(b[:, 1] <= b[:, 0]):
            raise ValueError(f"invalid grid bounds {self.bounds!r}")
        if np.any(res < 2):
            raise ValueError("grid resolution must be at least 2 per axis")
        object.__setattr__(self, "bounds", tuple(map(tuple, b)))
        object.__setattr__(self, "resolution", tuple(int(r) for r in res))

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, n) for (lo, hi), n in zip(self.bounds, self.resolution)]

    @property
    def spacing(self) -> tuple:
        return tuple((hi - lo) / (n - 1) for (lo, hi), n in zip(self.bounds, self.resolution))

    @property
    def origin(self) -> tuple:
        return tuple(lo for lo, _ in self.bounds)


# -- field-line tracing ---------------------------------------------------------------


def trace_line(direction: Callable, seed, cfg: TraceConfig | None = None) -> Curve:
    """Follow the unit tangent of ``direction`` from ``seed`` by arclength.

    ``direction`` maps an ``(N, 3)`` array of points to ``(N, 3)`` vectors.
    Integration uses an adaptive 8th-order Dormand-Prince pair and stops
    when the line returns to within ``closure_tol`` of the seed (after
    ``min_arclength`` and with tangents aligned), or at ``max_arclength``.
    """
    cfg = cfg or TraceConfig()
    seed = np.asarray(seed, dtype=float).reshape(3)

    def unit(y):
        v = np.asarray(direction(np.atleast_2d(y)), dtype=float)
        n = np.linalg.norm(v, axis=-1, keepdims=True)
        if np.any(n == 0) or not np.all(np.isfinite(v)):
            raise _FieldZero()
        return v / n

    try:
        t0 = unit(seed)[0]
    except _FieldZero:
        raise TraceError(f"direction field vanishes at seed {_fmt(seed)}") from None

    solver = DOP853(
        lambda s, y: unit(y)[0],
        0.0,
        seed,
        t_bound=cfg.max_arclength,
        first_step=cfg.step,
        rtol=cfg.rtol,
        atol=cfg.atol,
    )
    pts = [seed]
    arc = [0.0]
    closed = False
    gap = float("nan")
    stop = "max_arclength"

    def g(s, dense):
        y = dense(s)
        return float(np.dot(y - seed, unit(y)[0]))

    while solver.status == "running":
        s_old = solver.t
        try:
            msg = solver.step()
        except _FieldZero:
            stop = "field_zero"
            break
        s_new = solver.t
        if solver.status == "failed" or (solver.status == "running" and s_new - s_old < cfg.min_step):
            raise TraceError(
                f"step size underflow at arclength {s_new:.6g} tracing from seed {_fmt(seed)}"
                + (f": {msg}" if msg else "")
            )
        dense = solver.dense_output()
        n_sub = max(2, int(math.ceil((s_new - s_old) / cfg.max_segment)))
        s_grid = np.linspace(s_old, s_new, n_sub + 1)[1:]
        y_grid = dense(s_grid).T

        if s_new > cfg.min_arclength:
            try:
                hit = _closest_return(dense, unit, g, seed, t0, s_old, s_grid, y_grid, cfg)
            except _FieldZero:
                hit = None
            if hit is not None:
                a, s_star, d = hit
                keep = s_grid < s_star - 0.5 * cfg.max_segment
                pts.extend(y_grid[keep])
                arc.extend(s_grid[keep])
                closed, gap, stop = True, d, "closed"
                break

        pts.extend(y_grid)
        arc.extend(s_grid)

    curve = Curve(np.array(pts), np.array(arc), closed, gap)
    curve.meta["stop"] = stop
    return curve


class _FieldZero(Exception):
    pass


def _closest_return(dense, unit, g, seed, t0, s_old, s_grid, y_grid, cfg):
    """First return to the seed inside one step, as (index, arclength, gap), or None.

    Closest approaches are the sign changes (- to +) of (y - seed) . tangent.
    """
    s_all = np.concatenate([[s_old], s_grid])
    y_all = np.vstack([dense(s_old), y_grid])
    gv = np.sum((y_all - seed) * unit(y_all), axis=1)
    for a in range(len(s_all) - 1):
        if s_all[a + 1] <= cfg.min_arclength:
            continue
        if gv[a] < 0.0 <= gv[a + 1]:
            s_star = brentq(g, s_all[a], s_all[a + 1], args=(dense,), xtol=1e-14)
            y_star = dense(s_star)
            d = float(np.linalg.norm(y_star - seed))
            if d < cfg.closure_tol and float(np.dot(unit(y_star)[0], t0)) > cfg.align_cos:
                return a, s_star, d
    return None


def _fmt(p):
    return "(" + ", ".join("%g" % v for v in p) + ")"


def psi_constancy(f: BatemanField, t: float, curve: Curve, which: int) -> float:
    """Largest chordal distance on CP^1 between values of psi_which on the curve."""
    p = np.column_stack([np.full(len(curve), float(t)), curve.points])
    psi = psi_maps(f, p)[which - 1]
    psi = np.atleast_1d(psi)
    worst = 0.0
    for start in range(0, len(psi), 512):
        block = psi[start : start + 512]
        worst = max(worst, float(np.max(chordal_distance(block[:, None], psi[None, :]))))
    return worst


# -- linking -------------------------------------------------------------------------


def gauss_linking(c1: Curve, c2: Curve, chunk: int = 2048) -> float:
    """Gauss linking integral of two closed polylines (midpoint rule per segment pair)."""
    if not (c1.closed and c2.closed):
        raise ValueError("linking number requires two closed curves")
    s1, d1 = c1.segments()
    s2, d2 = c2.segments()
    m1 = s1 + 0.5 * d1
    m2 = s2 + 0.5 * d2
    total = 0.0
    dmin = np.inf
    for a in range(0, len(m1), chunk):
        r = m1[a : a + chunk, None, :] - m2[None, :, :]
        dist = np.linalg.norm(r, axis=-1)
        dmin = min(dmin, float(dist.min()))
        cross = np.cross(d1[a : a + chunk, None, :], d2[None, :, :])
        total += float(np.sum(np.sum(r * cross, axis=-1) / dist**3))
    seg = max(c1.max_segment(), c2.max_segment())
    if dmin < 10.0 * seg:
        warnings.warn(
            f"curves come within {dmin:.3g} of each other (max segment {seg:.3g}); "
            "the linking integral may be inaccurate",
            CloseCurvesWarning,
            stacklevel=2,
        )
    return total / (4.0 * math.pi)


# -- helicity --------------------------------------------------------------------------


@dataclass(frozen=True)
class HelicityResult:
    magnetic: float
    electric: float
    grid: GridSpec


def _trapezoid_weights(axis: np.ndarray) -> np.ndarray:
    w = np.full(len(axis), axis[1] - axis[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def potentials(f: BatemanField, points) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(A, C, E, B) at spacetime ``points``; curl A = B and curl C = E.

    A and C are the index-raised spatial parts of Re and Im of m/2i.
    """
    loc = _Local(f, points, order=1)
    pot = loc.m / 2j
    A = -pot.real[..., 1:]
    C = pot.imag[..., 1:]
    E, B = eb_extract(loc.R)
    return A, C, E, B


def volume_integral(integrand: Callable, grid: GridSpec) -> np.ndarray:
    """Trapezoid-rule integral over ``grid`` of ``integrand(xyz) -> (..., k)``.

    The grid is swept one z-slab at a time to bound memory.
    """
    xs, ys, zs = grid.axes()
    wx, wy, wz = (_trapezoid_weights(a) for a in (xs, ys, zs))
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    wxy = np.outer(wx, wy)
    total = 0.0
    for z, w in zip(zs, wz):
        p = np.stack([X, Y, np.full(X.shape, z)], axis=-1)
        vals = np.asarray(integrand(p), dtype=float)
        total = total + w * np.einsum("ij,ij...->...", wxy, vals)
    return np.asarray(total)


def helicity(f: BatemanField, t: float, grid: GridSpec) -> HelicityResult:
    """Magnetic and electric helicity on a box by the trapezoid rule."""

    def density(xyz):
        p = np.concatenate([np.full(xyz.shape[:-1] + (1,), float(t)), xyz], axis=-1)
        A, C, E, B = potentials(f, p)
        return np.stack([np.sum(A * B, axis=-1), np.sum(C * E, axis=-1)], axis=-1)

    hm, he = volume_integral(density, grid)
    return HelicityResult(float(hm), float(he), grid)


# -- Hopf invariant ------------------------------------------------------------------


def _three_form(one, two, basis):
    """(a ^ beta)(X, Y, Z) for a 1-form row vector and a 2-form matrix."""
    X, Y, Z = basis
    a = lambda v: np.einsum("...b,...b->...", one, v)
    b = lambda u, v: np.einsum("...a,...ab,...b->...", u, two, v)
    return a(X) * b(Y, Z) - a(Y) * b(X, Z) + a(Z) * b(X, Y)


def _tangent_frames(u: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Random orthonormal bases of the tangent spaces of S^3 at ``u``; shape (N, 3, 4)."""
    n = len(u)
    raw = rng.standard_normal((n, 3, 4))
    raw -= np.einsum("nka,na->nk", raw, u)[..., None] * u[:, None, :]
    q, _ = np.linalg.qr(np.swapaxes(raw, 1, 2))
    return np.swapaxes(q, 1, 2)


def hopf_density(i: int, u, rng: np.random.Generator | None = None, path: str = "structure") -> np.ndarray:
    """Pointwise ratio (lambda^i ^ d lambda^i) / Omega_3 on S^3.

    ``path`` selects where d lambda^i comes from: the structure equations
    or the zeta_i pullback of the area form of S^2.
    """
    rng = rng or np.random.default_rng(0)
    u = np.atleast_2d(np.asarray(u, dtype=float))
    u = u / np.linalg.norm(u, axis=-1, keepdims=True)
    basis = _tangent_frames(u, rng)
    lam = frames.maurer_cartan(u).components
    if path == "structure":
        dlam = frames.dlambda_structure(i, u)
    elif path == "zeta":
        dlam = frames.dlambda_pullback(i, u).real
    else:
        raise ValueError(f"unknown path {path!r}")
    top = _three_form(lam[:, i, :], dlam, [basis[:, k, :] for k in range(3)])
    vol = np.linalg.det(np.einsum("nja,nka->njk", lam[:, 1:, :], basis))
    return top / vol


def hopf_invariant(i: int, n_samples: int = 10000, seed: int = 0, path: str = "structure") -> float:
    """Monte Carlo estimate of (1/4 pi^2) times the integral of lambda^i ^ d lambda^i over S^3."""
    if n_samples < 100:
        raise ValueError("hopf_invariant needs at least 100 samples")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((n_samples, 4))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    dens = hopf_density(i, u, rng, path=path)
    return float(np.mean(dens) * 2.0 * math.pi**2 / (4.0 * math.pi**2))


# -- Hopf circles ---------------------------------------------------------------------


def hopf_fibers_s3(i: int, seeds: Sequence, steps: int = 512) -> list[np.ndarray]:
    """Integral curves of L_i on S^3 through each seed, one full period.

    Classical RK4 with renormalisation after every step; returns arrays of
    shape ``(steps + 1, 4)`` whose last row should coincide with the first.
    """
    h = 2.0 * math.pi / steps
    e = np.zeros(4)
    e[i] = 1.0
    rhs = lambda q: qmul(q, np.broadcast_to(e, q.shape))
    out = []
    for s in seeds:
        q = np.asarray(s, dtype=float).reshape(4)
        if abs(np.linalg.norm(q) - 1.0) > 1e-9:
            raise ValueError("Hopf circle seeds must be unit quaternions")
        path = [q]
        for _ in range(steps):
            k1 = rhs(q)
            k2 = rhs(q + 0.5 * h * k1)
            k3 = rhs(q + 0.5 * h * k2)
            k4 = rhs(q + h * k3)
            q = q + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            q = q / np.linalg.norm(q)
            path.append(q)
        out.append(np.array(path))
    return out


def fibration_seeds(i: int, count: int) -> list[np.ndarray]:
    """``count`` seeds on a great circle meeting ``count`` distinct fibres of L_i."""
    j = i % 3 + 1
    seeds = []
    for n in range(count):
        th = math.pi * n / count
        q = np.zeros(4)
        q[0] = math.cos(th)
        q[j] = math.sin(th)
        seeds.append(q)
    return seeds


_POLE_CANDIDATES = [
    np.array([-1.0, 0.0, 0.0, 0.0]),
    np.array([-0.5, 0.5, 0.5, 0.5]),
    np.array([-0.5, -0.5, 0.5, -0.5]),
    np.array([0.5, -0.5, -0.5, 0.5]),
    np.array([-0.6, 0.0, 0.8, 0.0]),
    np.array([0.0, 0.6, 0.0, -0.8]),
]


def choose_projection_pole(paths: Sequence[np.ndarray], clearance: float = 0.2) -> np.ndarray:
    """Pick a projection point of S^3 away from every path.

    -e0 is used when it keeps ``clearance`` from all points; otherwise the
    first candidate that does, or failing that the candidate farthest away.
    """
    pts = np.vstack(paths)
    best, best_d = None, -1.0
    for cand in _POLE_CANDIDATES:
        d = float(np.min(np.linalg.norm(pts - cand, axis=1)))
        if d > clearance:
            return cand
        if d > best_d:
            best, best_d = cand, d
    return best


def project_s3(q, pole=None) -> np.ndarray:
    """Stereographic projection of S^3 to R^3 from ``pole`` (default -e0).

    The sphere is first rotated by left multiplication with -conj(pole),
    which sends the pole to -e0, preserves orientation and maps fibres of
    every L_i to fibres of the same L_i.
    """
    q = np.asarray(q, dtype=float)
    if pole is not None:
        pole = np.asarray(pole, dtype=float)
        rot = -pole * np.array([1.0, -1.0, -1.0, -1.0])
        q = qmul(np.broadcast_to(rot, q.shape), q)
    den = 1.0 + q[..., 0]
    if np.any(den < 1e-12):
        raise frames.PoleError("point at the projection pole")
    return q[..., 1:] / den[..., None]


def hopf_circles(i: int, seeds: Sequence, steps: int = 512, pole=None) -> list[Curve]:
    """Projected Hopf circles of L_i through ``seeds``."""
    paths = hopf_fibers_s3(i, seeds, steps)
    if pole is None:
        pole = choose_projection_pole(paths)
    return [_projected_curve(p, pole, i) for p in paths]


def _projected_curve(path: np.ndarray, pole, axis: int) -> Curve:
    x = project_s3(path, pole)
    gap = float(np.linalg.norm(x[-1] - x[0]))
    c = Curve(x[:-1], None, True, gap)
    c.meta.update(axis=axis, pole=np.asarray(pole).tolist(), s3=path[:-1])
    return c

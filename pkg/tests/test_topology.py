import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from knotlight import frames, topology
from knotlight.fields import line_direction, psi_for_family
from knotlight.frames import FrameSide
from knotlight.topology import (
    CloseCurvesWarning,
    Curve,
    GridSpec,
    TraceConfig,
    TraceError,
    gauss_linking,
    helicity,
    hopf_circles,
    hopf_density,
    hopf_invariant,
    psi_constancy,
    trace_line,
)

from conftest import central_jacobian, random_unit


def circle(center=(0, 0, 0), normal="z", radius=1.0, n=400):
    s = np.linspace(0, 2 * np.pi, n, endpoint=False)
    c, si = radius * np.cos(s), radius * np.sin(s)
    z = np.zeros_like(s)
    pts = {"z": (c, si, z), "y": (c, z, si), "x": (z, c, si)}[normal]
    return Curve(np.column_stack(pts) + np.asarray(center, float), None, True, 0.0)


@pytest.fixture(scope="module")
def magnetic_pair():
    from knotlight.fields import hopf_ranada

    d = line_direction(hopf_ranada(), "magnetic", 0.0)
    return trace_line(d, (0, 0.5, 0)), trace_line(d, (0, 0, 0.5))


# -- configuration types --------------------------------------------------------------


def test_trace_config_validation():
    with pytest.raises(ValueError):
        TraceConfig(rtol=0)
    with pytest.raises(ValueError):
        TraceConfig(min_arclength=5, max_arclength=1)


def test_grid_spec_validation():
    g = GridSpec((-1, 1), 5)
    assert g.resolution == (5, 5, 5) and g.spacing == (0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        GridSpec((-1, 1), 1)
    with pytest.raises(ValueError):
        GridSpec((1, -1), 4)


# -- tracing --------------------------------------------------------------------------


def test_uniform_field_gives_open_line():
    cfg = TraceConfig(max_arclength=3.0)
    c = trace_line(lambda p: np.tile([0.0, 0.0, 1.0], (len(p), 1)), (0, 0, 0), cfg)
    assert not c.closed
    assert c.arclength[-1] == pytest.approx(3.0)
    np.testing.assert_allclose(c.points[:, :2], 0, atol=1e-14)
    np.testing.assert_allclose(c.points[:, 2], c.arclength, atol=1e-12)


def test_zero_field_at_seed_raises():
    with pytest.raises(TraceError, match="seed"):
        trace_line(lambda p: np.zeros_like(p), (1, 2, 3))


def test_step_underflow_raises():
    flip = lambda p: np.column_stack([np.sign(0.5 - p[:, 0]), np.zeros(len(p)), np.zeros(len(p))])
    with pytest.raises(TraceError, match="underflow"):
        trace_line(flip, (0, 0, 0))


def test_field_zero_mid_line_is_a_hard_stop():
    d = lambda p: np.column_stack([np.where(p[:, 0] < 0.5, 1.0, 0.0), np.zeros(len(p)), np.zeros(len(p))])
    c = trace_line(d, (0, 0, 0))
    assert c.meta["stop"] == "field_zero" and not c.closed
    assert c.points[-1, 0] < 0.5


def test_rotation_field_closes_on_the_exact_circle():
    d = lambda p: np.column_stack([-p[:, 1], p[:, 0], np.zeros(len(p))])
    c = trace_line(d, (1.0, 0, 0))
    assert c.closed and c.closure_gap < 1e-8
    assert c.arclength[-1] + np.linalg.norm(c.points[-1] - c.points[0]) == pytest.approx(2 * np.pi, abs=1e-6)
    np.testing.assert_allclose(np.linalg.norm(c.points, axis=1), 1.0, atol=1e-9)


def test_hopfion_magnetic_lines_close(magnetic_pair):
    for c in magnetic_pair:
        assert c.closed and c.closure_gap < 1e-4
        seg = np.linalg.norm(np.diff(c.points, axis=0), axis=1)
        assert seg.min() > 0


def test_axis_seed_lies_on_the_line_through_infinity(hopf):
    # B is along x on the whole x-axis, so this seed's line never returns
    d = line_direction(hopf, "magnetic", 0.0)
    x = np.array([[0.5, 0, 0], [2.0, 0, 0], [-3.0, 0, 0]])
    B = d(x)
    np.testing.assert_allclose(B[:, 1:], 0, atol=1e-15)
    c = trace_line(d, (0.5, 0, 0), TraceConfig(max_arclength=10.0))
    assert not c.closed
    np.testing.assert_allclose(c.points[:, 1:], 0, atol=1e-12)


@pytest.mark.parametrize("family", ["magnetic", "electric", "poynting"])
def test_psi_constant_along_lines(hopf, family):
    d = line_direction(hopf, family, 0.0)
    c = trace_line(d, (0.3, 0.2, 0.1))
    assert c.closed
    assert psi_constancy(hopf, 0.0, c, psi_for_family(family)) < 1e-5


def test_psi_varies_across_lines_for_the_wrong_map(hopf, magnetic_pair):
    c = magnetic_pair[0]
    assert psi_constancy(hopf, 0.0, c, 3) > 1e-2


def test_tracer_converges_with_tolerance(hopf):
    d = line_direction(hopf, "magnetic", 0.0)
    for seed in [(0, 0.5, 0), (0.3, 0.2, 0.1)]:
        gaps, devs = [], []
        for tol in (1e-6, 1e-7, 1e-8):
            c = trace_line(d, seed, TraceConfig(rtol=tol, atol=tol * 1e-2))
            gaps.append(c.closure_gap)
            devs.append(psi_constancy(hopf, 0.0, c, 2))
        # each decade of tolerance buys at least a factor 2 in both diagnostics
        assert gaps[0] > 2 * gaps[1] > 4 * gaps[2]
        assert devs[0] > 2 * devs[1] > 4 * devs[2]


# -- linking --------------------------------------------------------------------------


def test_separated_circles_unlinked():
    assert abs(gauss_linking(circle(), circle(center=(10, 0, 0)))) < 0.01


def test_standard_hopf_link():
    assert abs(abs(gauss_linking(circle(), circle(center=(1, 0, 0), normal="y"))) - 1) < 0.02


def test_hopf_link_against_dense_quadrature():
    # the midpoint polyline rule against a fine continuous-parameter sum
    a, b = circle(n=200), circle(center=(1, 0, 0), normal="y", n=200)
    ref_a, ref_b = circle(n=3000), circle(center=(1, 0, 0), normal="y", n=3000)
    assert gauss_linking(a, b) == pytest.approx(gauss_linking(ref_a, ref_b), abs=2e-3)
    assert gauss_linking(ref_a, ref_b) == pytest.approx(round(gauss_linking(ref_a, ref_b)), abs=1e-4)


def test_linking_needs_closed_curves():
    c = circle()
    open_c = Curve(c.points, None, False)
    with pytest.raises(ValueError):
        gauss_linking(c, open_c)


def test_close_curves_warning():
    with pytest.warns(CloseCurvesWarning):
        gauss_linking(circle(n=50), circle(center=(0, 0, 0.05), n=50))


def test_hopfion_magnetic_lines_link_once(magnetic_pair):
    assert abs(abs(gauss_linking(*magnetic_pair)) - 1) < 0.05


def test_linking_symmetric(magnetic_pair):
    a, b = magnetic_pair
    assert abs(gauss_linking(a, b) - gauss_linking(b, a)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_linking_rotation_invariant(seed):
    R = Rotation.random(random_state=seed).as_matrix()
    a, b = circle(n=300), circle(center=(1, 0, 0), normal="y", n=300)
    assert abs(gauss_linking(a, b) - gauss_linking(a.transformed(R), b.transformed(R))) < 1e-10


# -- helicity -------------------------------------------------------------------------


def test_potentials_have_the_right_curls(hopf, rng):
    p = rng.uniform(-1.5, 1.5, (20, 4))

    def spatial(fn):
        return lambda q: central_jacobian(lambda r: fn(r), q)

    for idx_pot, idx_field in ((0, 3), (1, 2)):
        jac = central_jacobian(lambda q: topology.potentials(hopf, q)[idx_pot], p)[:, 1:, :]
        curl = np.stack(
            [jac[:, 1, 2] - jac[:, 2, 1], jac[:, 2, 0] - jac[:, 0, 2], jac[:, 0, 1] - jac[:, 1, 0]], axis=1
        )
        target = topology.potentials(hopf, p)[idx_field]
        assert np.max(np.abs(curl - target)) < 1e-6


def test_uniform_field_helicity_vanishes():
    # A = (y, z, x) has curl (-1, -1, -1); A . B is odd on a symmetric box
    def density(xyz):
        x, y, z = np.moveaxis(xyz, -1, 0)
        A = np.stack([y, z, x], axis=-1)
        return np.sum(A * -1.0, axis=-1)

    assert abs(topology.volume_integral(density, GridSpec((-2, 2), 17))) < 1e-12


def test_volume_integral_of_polynomial():
    val = topology.volume_integral(lambda p: p[..., 0] ** 2, GridSpec([(0, 1), (0, 2), (0, 3)], 201))
    assert val == pytest.approx(2.0, rel=1e-4)


def test_hopfion_helicity_converges(hopf):
    coarse = helicity(hopf, 0.0, GridSpec((-6, 6), 96))
    fine = helicity(hopf, 0.0, GridSpec((-6, 6), 128))
    delta = abs(fine.magnetic - coarse.magnetic)
    assert delta / abs(fine.magnetic) < 0.02
    assert abs(fine.magnetic) > 10 * delta
    assert fine.electric == pytest.approx(fine.magnetic, rel=1e-6)


# -- Hopf invariant ------------------------------------------------------------------


@pytest.mark.parametrize("i", [1, 2, 3])
def test_hopf_invariant(i):
    assert abs(hopf_invariant(i, 10000, 0) + 1) < 1e-6


def test_hopf_density_pointwise(rng):
    u = random_unit(rng, 200)
    for i in (1, 2, 3):
        assert np.max(np.abs(hopf_density(i, u, rng) + 2)) < 1e-10
        assert np.max(np.abs(hopf_density(i, u, rng, path="zeta") + 2)) < 1e-8


def test_hopf_invariant_seed_independent():
    vals = [hopf_invariant(2, 500, s) for s in range(5)]
    assert max(vals) - min(vals) < 1e-9


def test_hopf_invariant_sample_floor():
    with pytest.raises(ValueError):
        hopf_invariant(1, 50)


# -- Hopf circles --------------------------------------------------------------------


def test_circle_through_identity():
    e0 = np.array([1.0, 0, 0, 0])
    (path,) = topology.hopf_fibers_s3(3, [e0], 512)
    s = np.linspace(0, 2 * np.pi, 513)
    exact = np.column_stack([np.cos(s), 0 * s, 0 * s, np.sin(s)])
    assert np.max(np.abs(path - exact)) < 1e-8
    (c,) = hopf_circles(3, [e0], 512)
    assert c.closed and c.closure_gap < 1e-6


@pytest.mark.parametrize("i", [1, 2, 3])
def test_circles_pairwise_linked(i):
    cs = hopf_circles(i, topology.fibration_seeds(i, 6), 1024)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CloseCurvesWarning)
        links = [gauss_linking(a, b) for n, a in enumerate(cs) for b in cs[n + 1 :]]
    assert max(abs(abs(l) - 1) for l in links) < 0.02
    # sign produced by these orientation conventions (left framing)
    assert all(l < 0 for l in links)


def test_projection_pole_fallback():
    e0 = np.array([1.0, 0, 0, 0])
    (path,) = topology.hopf_fibers_s3(1, [e0], 256)
    # the fibre through e0 passes through -e0, the default projection point
    assert np.min(np.linalg.norm(path + e0, axis=1)) < 1e-7
    pole = topology.choose_projection_pole([path])
    assert np.min(np.linalg.norm(path - pole, axis=1)) > 0.2
    (c,) = hopf_circles(1, [e0], 256)
    assert np.all(np.isfinite(c.points))


def test_projection_rejects_pole():
    with pytest.raises(frames.PoleError):
        topology.project_s3(np.array([-1.0, 0, 0, 0]))


def test_frames_orthogonal_where_fibres_meet(rng):
    u = random_unit(rng, 100)
    T = np.stack([frames.invariant_field(FrameSide.LEFT, i, u) for i in (1, 2, 3)], axis=1)
    np.testing.assert_allclose(np.einsum("nia,nja->nij", T, T), np.broadcast_to(np.eye(3), (100, 3, 3)), atol=1e-12)


def test_projected_circles_are_round():
    cs = hopf_circles(2, topology.fibration_seeds(2, 3), 512)
    for c in cs:
        p = c.points
        mean = p.mean(axis=0)
        normal = np.linalg.svd(p - mean)[2][-1]
        scale = np.max(np.abs(p - mean))
        assert np.max(np.abs((p - mean) @ normal)) < 1e-9 * scale
        # least-squares sphere |p - c|^2 = r^2, linear in (c, r^2 - |c|^2)
        A = np.column_stack([2 * p, np.ones(len(p))])
        sol, *_ = np.linalg.lstsq(A, np.sum(p * p, axis=1), rcond=None)
        center = sol[:3]
        r = np.linalg.norm(p - center, axis=1)
        assert np.ptp(r) < 1e-8 * r.mean()

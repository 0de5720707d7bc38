import warnings

import numpy as np
import pytest

from knotlight import forms, frames
from knotlight.fields import (
    POLE,
    BatemanField,
    DegenerateFieldError,
    DegenerateFieldWarning,
    _tetrad_from,
    chordal_distance,
    eb_extract,
    hopf_ranada_closed_form,
    km_forms,
    null_tetrad,
    optical_scalars,
    poynting,
    psi_maps,
    rs_form,
    s_form,
    sample,
)
from knotlight.frames import area_pullback

from conftest import central_jacobian, random_points

ORIGIN = np.zeros(4)


def _quaternion_of(f, p):
    a, b = f.jets(p, order=1)
    return np.stack([a.value.real, a.value.imag, b.value.real, -b.value.imag], axis=-1)


def test_pair_at_origin(hopf):
    a, b = hopf.jets(ORIGIN)
    assert a.value == pytest.approx(-1) and b.value == pytest.approx(0)


def test_pair_normalized(hopf, rng):
    a, b = hopf.jets(random_points(rng, 1000), order=1)
    assert np.max(np.abs(np.abs(a.value) ** 2 + np.abs(b.value) ** 2 - 1)) < 1e-10


def test_pair_limit_at_spatial_infinity(hopf):
    a, b = hopf.jets(np.array([0.0, 1e6, 0.0, 0.0]), order=1)
    assert a.value == pytest.approx(1.0, abs=1e-9) and abs(b.value) < 1e-5


def test_parsed_pair_matches_builtin(hopf, rng):
    parsed = BatemanField.from_expressions(
        "(x^2+y^2+z^2-t^2-1+2*i*z)/(x^2+y^2+z^2-(t-i)^2)", "2*(x-i*y)/(x^2+y^2+z^2-(t-i)^2)"
    )
    p = random_points(rng, 50)
    for u, v in zip(parsed.jets(p), hopf.jets(p)):
        np.testing.assert_allclose(u.value, v.value, atol=1e-13)
        np.testing.assert_allclose(u.hess, v.hess, atol=1e-11)


def test_rs_form_at_origin(hopf):
    w = forms.omega_basis()
    np.testing.assert_allclose(rs_form(hopf, ORIGIN), 8j * w[0] + 8 * w[1], atol=1e-14)


def test_rs_form_matches_printed_closed_form(hopf, rng):
    p = random_points(rng, 200)
    R = rs_form(hopf, p)
    ref = hopf_ranada_closed_form(p)
    rel = np.max(np.abs(R - ref), axis=1) / np.max(np.abs(ref), axis=1)
    assert rel.max() < 1e-9


def test_constant_alpha_is_degenerate():
    f = BatemanField.from_expressions("1+i", "x")
    with pytest.warns(DegenerateFieldWarning):
        R = rs_form(f, np.array([0.1, 0.2, 0.3, 0.4]))
    assert np.all(R == 0)


def test_eb_extract_examples():
    E, B = eb_extract(8j * forms.omega_basis()[0] + 8 * forms.omega_basis()[1])
    np.testing.assert_allclose(E, [0, 8, 0])
    np.testing.assert_allclose(B, [8, 0, 0])
    # omega^1 alone: F = Re(omega^1) = dt^dx is purely electric, so the pair is not null
    E, B = eb_extract(forms.omega_basis()[0])
    np.testing.assert_allclose(E, [1, 0, 0])
    np.testing.assert_allclose(B, [0, 0, 0])
    assert np.sum(E**2) != np.sum(B**2)
    E, B = eb_extract(np.zeros(6))
    assert not E.any() and not B.any()


def test_electric_part_is_f_tj(hopf, rng):
    # F = Re R reproduces E through its dt^dx_j components
    p = random_points(rng, 20)
    s = sample(hopf, p)
    np.testing.assert_allclose(s.F[:, :3], s.E)
    np.testing.assert_allclose(s.starF, -s.R.imag)


def test_null_field_invariants(hopf, rng):
    s = sample(hopf, random_points(rng, 500))
    scale = np.sum(s.E**2, axis=1)
    assert np.max(np.abs(np.sum(s.E * s.B, axis=1)) / scale) < 1e-9
    assert np.max(np.abs(np.sum(s.E**2, axis=1) - np.sum(s.B**2, axis=1)) / scale) < 1e-9


def test_km_nullness_and_reconstruction(hopf, rng):
    p = random_points(rng, 500)
    km = km_forms(hopf, p)
    for a, b in ((km.k, km.k), (km.m, km.m), (km.k, km.m)):
        assert np.max(np.abs(forms.inner(a, b))) < 1e-10
    assert np.max(km.k_imag) < 1e-10
    np.testing.assert_allclose(forms.wedge11(km.k, km.m), rs_form(hopf, p), atol=1e-9)


def test_scaled_pair_reports_defect(hopf, rng):
    km = km_forms(hopf.scaled(2.0, 1.0), random_points(rng, 50))
    assert np.max(km.k_imag) > 1e-3
    assert np.max(np.abs(km.normalization_defect)) > 0.1


def _k_real(f):
    return lambda q: km_forms(f, q).k.real


def test_dk_equals_s_by_differences(hopf, rng):
    p = random_points(rng, 30)
    jac = central_jacobian(_k_real(hopf), p)  # [n, mu, nu] = d_mu k_nu
    dk = forms.d_covector(jac)
    S = s_form(hopf, p)
    assert np.max(np.abs(dk - S)) < 1e-6


def test_dm_relation_by_differences(hopf, rng):
    p = random_points(rng, 30)
    jac = central_jacobian(lambda q: km_forms(hopf, q).m, p)
    km = km_forms(hopf, p)
    assert np.max(np.abs(forms.d_covector(jac) - 2j * forms.wedge11(km.k, km.m))) < 1e-6


def test_potential_of_rs_form_by_differences(hopf, rng):
    p = random_points(rng, 30)
    jac = central_jacobian(lambda q: km_forms(hopf, q).m / 2j, p)
    assert np.max(np.abs(forms.d_covector(jac) - rs_form(hopf, p))) < 1e-6


def test_s_annihilates_k_and_l(hopf, rng):
    p = random_points(rng, 300)
    S = s_form(hopf, p)
    tet = null_tetrad(hopf, p)
    assert np.max(np.abs(forms.interior(tet.k, S))) < 1e-9
    assert np.max(np.abs(forms.interior(tet.l, S))) < 1e-9


def test_psi_at_origin(hopf):
    psi = psi_maps(hopf, ORIGIN)
    assert psi[0] == pytest.approx(0) and psi[1] == pytest.approx(1) and psi[2] == pytest.approx(-1j)


def test_psi_equals_zeta_of_section(hopf, rng):
    p = random_points(rng, 300)
    q = _quaternion_of(hopf, p)
    for i, psi in enumerate(psi_maps(hopf, p), start=1):
        assert np.max(np.abs(psi - frames.zeta_map(i, q))) < 1e-12


def test_psi_pole_marker():
    f = BatemanField.from_expressions("0*x", "1+0*x")
    psi1 = psi_maps(f, np.array([0.0, 0.3, 0.1, 0.0]))[0]
    assert psi1 == POLE
    assert chordal_distance(POLE, POLE) == 0
    assert chordal_distance(POLE, 0) == pytest.approx(2.0)


def test_rs_pullbacks(hopf, rng):
    from knotlight.fields import psi_jets

    p = random_points(rng, 300)
    R = rs_form(hopf, p)
    _, psi2, psi3 = psi_jets(hopf, p)
    F = forms.from_matrix(area_pullback(psi2))
    starF = forms.from_matrix(area_pullback(psi3))
    assert np.max(np.abs(F - R.real)) < 1e-8
    assert np.max(np.abs(starF + R.imag)) < 1e-8


def test_printed_f_pullback_ordering_has_opposite_sign(hopf, rng):
    from knotlight.fields import psi_jets

    p = random_points(rng, 50)
    _, psi2, _ = psi_jets(hopf, p)
    g = psi2.grad
    printed = 1j * forms.wedge11(np.conj(g), g) / ((1 + np.abs(psi2.value) ** 2) ** 2)[:, None]
    np.testing.assert_allclose(printed.real, -rs_form(hopf, p).real, atol=1e-9)


def test_null_tetrad(hopf, rng):
    tet = null_tetrad(hopf, random_points(rng, 200))
    pr = tet.products()
    targets = {"kk": 0, "ll": 0, "kl": 1, "lm": 0, "km": 0, "mm": 0, "mmbar": -1}
    for name, value in targets.items():
        assert np.max(np.abs(pr[name] - value)) < 1e-10, name
    assert np.max(tet.metric_residual()) < 1e-9


def test_null_tetrad_degenerate_k():
    with pytest.raises(DegenerateFieldError):
        _tetrad_from(np.zeros(4), np.array([0, 1, 1j, 0]))


def test_poynting():
    np.testing.assert_array_equal(poynting(np.array([1.0, 0, 0]), np.array([0, 1.0, 0])), [0, 0, 1])


def test_poynting_at_origin(hopf):
    S = sample(hopf, ORIGIN).poynting
    np.testing.assert_allclose(np.abs(S), [0, 0, 64], atol=1e-12)


def test_poynting_parallel_to_k(hopf, rng):
    p = random_points(rng, 300)
    s = sample(hopf, p)
    kv = forms.sharp(s.k.real)[:, 1:]
    cos = np.sum(kv * s.poynting, axis=1) / (np.linalg.norm(kv, axis=1) * np.linalg.norm(s.poynting, axis=1))
    angle = np.arccos(np.clip(np.abs(cos), -1, 1))
    assert angle.max() < 1e-6
    # orientation under the present conventions: E x B points against the spatial part of k
    assert np.all(cos < 0)


def test_congruence_is_geodesic_shear_free_and_twisting(hopf, rng):
    opt = optical_scalars(hopf, random_points(rng, 300))
    assert opt.shear.max() < 1e-6
    assert opt.geodesic_residual.max() < 1e-6
    assert np.min(np.abs(opt.twist)) > 1e-3


def test_generic_pair_has_shear():
    f = BatemanField.from_expressions("(x+i*y)/(2+t^2)", "(t-z+i*x*y)/(3+z^2)")
    p = np.random.default_rng(0).uniform(-1, 1, (50, 4))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            opt = optical_scalars(f, p)
        except DegenerateFieldError:
            return
    assert opt.shear.max() > 1e-3 or opt.geodesic_residual.max() > 1e-3

import math

import numpy as np
import pytest

from biflex.mechanics import (
    beam_stiffnesses,
    critical_module_load,
    effective_stiffness,
    module_response,
    oracle_solve,
    oracle_stiffness,
    reciprocal_keq_form,
    series_module_stiffness,
)
from biflex.types import HoneycombGeometry, Material
from biflex.wrist import assemble

from conftest import random_geometry, design_geometry


@pytest.fixture
def geom():
    return HoneycombGeometry(b=1e-3, b_c=1.5e-3, L=20e-3, h_c=3e-3, H=8e-3,
                             gamma=math.radians(20))


def test_beam_stiffnesses_formula(geom, tpu):
    k1, k2 = beam_stiffnesses(geom, tpu)
    E = tpu.young_modulus
    assert k1 == pytest.approx(2 * E * geom.b * geom.L * math.cos(geom.gamma) / geom.H, rel=1e-15)
    assert k2 == pytest.approx(E * geom.b_c * geom.L / geom.h_c, rel=1e-15)
    # axial stiffness E*A/h with the diagonal length
    assert k1 == pytest.approx(E * geom.area / geom.h, rel=1e-14)


def test_beam_stiffnesses_gamma_zero(geom, tpu):
    g0 = geom.replace(gamma=0.0)
    k1, _ = beam_stiffnesses(g0, tpu)
    assert k1 == 2 * tpu.young_modulus * g0.b * g0.L / g0.H


def test_doubling_b(geom, tpu):
    k1, k2 = beam_stiffnesses(geom, tpu)
    k1b, k2b = beam_stiffnesses(geom.replace(b=2 * geom.b), tpu)
    assert k1b == pytest.approx(2 * k1, rel=1e-15)
    assert k2b == k2


def test_k1_matches_oracle_assembly(geom, tpu):
    # E=26 MPa, b=1 mm, L=20 mm, H=8 mm, gamma=20 deg: a lone diagonal under
    # its own axial force shortens by f_a / k1 in the oracle state
    k1, _ = beam_stiffnesses(geom, tpu)
    s = oracle_solve(geom, tpu, 10.0)
    assert s.f_a / s.delta_h == pytest.approx(k1, rel=1e-12)
    assert k1 == pytest.approx(122160.0407, rel=1e-9)


def test_keq_gamma_zero(geom, tpu):
    g0 = geom.replace(gamma=0.0)
    E = tpu.young_modulus
    assert effective_stiffness(g0, tpu) == pytest.approx(4 * E * g0.L * g0.b / g0.H, rel=1e-15)


def test_keq_rigid_central_beam_limit(geom, tpu):
    k1, _ = beam_stiffnesses(geom, tpu)
    c = math.cos(geom.gamma)
    stiff = series_module_stiffness(k1, 1e18, geom.gamma)
    assert stiff == pytest.approx(2 * k1 * c * c, rel=1e-12)


def test_keq_geometric_form(geom, tpu):
    g, E = geom, tpu.young_modulus
    c, s = math.cos(g.gamma), math.sin(g.gamma)
    closed = 4 * E * g.L * g.b * g.b_c * c**3 / (g.H * g.b_c + 2 * g.b * g.h_c * c * s * s)
    assert effective_stiffness(g, tpu) == pytest.approx(closed, rel=1e-14)


def test_keq_matches_oracle_sweep(tpu, rng):
    for _ in range(1000):
        g = random_geometry(rng, gamma_range=(0.0, math.radians(85)))
        assert effective_stiffness(g, tpu) * (1 / oracle_stiffness(g, tpu)) == \
            pytest.approx(1.0, rel=1e-9)


def test_reciprocal_form_is_a_compliance(geom, tpu):
    """The reciprocal-style expression is not the stiffness.

    At gamma = 0 its reciprocal is k1, half the true 2*k1 (two diagonals in
    parallel); at gamma > 0 its sin(gamma) term also differs from the
    sin^2(gamma) that force balance gives.
    """
    g0 = geom.replace(gamma=0.0)
    assert oracle_stiffness(g0, tpu) * reciprocal_keq_form(g0, tpu) == pytest.approx(2.0, rel=1e-12)
    ratio = oracle_stiffness(geom, tpu) * reciprocal_keq_form(geom, tpu)
    assert abs(ratio - 2.0) > 1e-3
    # a sin(gamma) (not sin^2) series term disagrees with the oracle
    k1, k2 = beam_stiffnesses(geom, tpu)
    c, s = math.cos(geom.gamma), math.sin(geom.gamma)
    sin_variant = 2 * k1 * k2 * c * c / (k2 + k1 * s)
    assert abs(sin_variant / oracle_stiffness(geom, tpu) - 1) > 1e-2


def test_oracle_zero_load(geom, tpu):
    s = oracle_solve(geom, tpu, 0.0)
    assert (s.delta_y, s.delta_x, s.delta_h, s.f_a) == (0.0, 0.0, 0.0, 0.0)


def test_oracle_decoupled(geom, tpu):
    g0 = geom.replace(gamma=0.0)
    s = oracle_solve(g0, tpu, 1.0)
    assert s.delta_x == 0.0
    assert s.delta_y == pytest.approx(g0.H / (4 * tpu.young_modulus * g0.b * g0.L), rel=1e-14)


def test_oracle_identities(tpu, rng):
    for _ in range(200):
        g = random_geometry(rng)
        f = rng.uniform(0.0, 50.0)
        s = oracle_solve(g, tpu, f)
        k1, k2 = beam_stiffnesses(g, tpu)
        c, sn = math.cos(g.gamma), math.sin(g.gamma)
        scale = max(abs(s.delta_y), 1e-30)
        assert s.delta_h == pytest.approx(s.delta_y * c - s.delta_x * sn, abs=1e-12 * scale)
        assert s.f_a == pytest.approx(f / (2 * c), rel=1e-10, abs=1e-12)
        assert s.f_a == pytest.approx(k1 * s.delta_h, rel=1e-12, abs=1e-12)
        assert k2 * s.delta_x == pytest.approx(s.f_a * sn, rel=1e-10, abs=1e-12)


def test_oracle_rejects_negative_load(geom, tpu):
    with pytest.raises(ValueError):
        oracle_solve(geom, tpu, -1.0)


def test_keq_below_parallel_diagonals(tpu, rng):
    for _ in range(200):
        g = random_geometry(rng, gamma_range=(1e-3, 1.4))
        k1, _ = beam_stiffnesses(g, tpu)
        assert effective_stiffness(g, tpu) < 2 * k1


def test_fcr_gamma_zero(geom, tpu):
    g0 = geom.replace(gamma=0.0)
    E = tpu.young_modulus
    expected = 2 * math.pi**2 * E * g0.b**3 * g0.L / (3 * g0.H**2)
    assert critical_module_load(g0, tpu) == pytest.approx(expected, rel=1e-14)


def test_fcr_from_beam_length(geom, tpu):
    # 2 cos(g) * pi^2 E I / h^2 with h stated explicitly
    g = geom
    p_cr = math.pi**2 * tpu.young_modulus * g.second_moment / g.h**2
    assert critical_module_load(g, tpu) == pytest.approx(2 * math.cos(g.gamma) * p_cr, rel=1e-14)


def test_fcr_boundary_factor_scales_length(geom, tpu):
    base = critical_module_load(geom, tpu)
    clamped = critical_module_load(geom.replace(effective_length_factor=0.5), tpu)
    assert clamped == pytest.approx(4 * base, rel=1e-14)


def test_fcr_cubic_in_b(geom, tpu):
    base = critical_module_load(geom, tpu)
    assert critical_module_load(geom.replace(b=2 * geom.b), tpu) == pytest.approx(8 * base, rel=1e-12)


def test_design_geometries_order(tpu):
    f = {n: critical_module_load(design_geometry(n), tpu) for n in ("franka", "robotiq", "bariflex")}
    assert f["bariflex"] > f["robotiq"] > f["franka"]


def test_monotone_in_parameters(geom, tpu):
    grid = np.linspace(0.5, 2.0, 16)
    for field, direction in (("b", 1), ("b_c", 1), ("H", -1), ("h_c", -1)):
        vals = [effective_stiffness(geom.replace(**{field: getattr(geom, field) * s}), tpu)
                for s in grid]
        d = np.diff(vals) * direction
        assert np.all(d > 0), field
    gammas = np.linspace(0, math.radians(85), 40)
    f = [critical_module_load(geom.replace(gamma=g), tpu) for g in gammas]
    assert np.all(np.diff(f) < 0)


def test_modulus_scaling_exact(geom, tpu):
    s = 3.0
    a = module_response(geom, tpu)
    b = module_response(geom, Material("x", tpu.young_modulus * s))
    for field in ("k1", "k2", "k_eq", "f_cr"):
        assert getattr(b, field) == pytest.approx(s * getattr(a, field), rel=1e-14)
    assert b.delta_y_at_buckling == pytest.approx(a.delta_y_at_buckling, rel=1e-14)


def test_module_response_consistent_with_wrist(geom, tpu):
    r = module_response(geom, tpu)
    w = assemble(geom, tpu)
    assert w.buckling.angle == pytest.approx(r.delta_y_at_buckling / geom.ring_radius, rel=1e-14)

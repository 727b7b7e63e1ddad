import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexlab.core import (
    Family,
    Model,
    ModelParams,
    PlanePoint,
    RingConfig,
    SpherePoint,
    VortexSystem,
    Vorticity,
    build_double_ring,
    build_planar_ring,
    build_sphere_ring,
    same_configuration,
)


def test_vorticity_rejects_zero_and_nonfinite():
    for bad in (0.0, math.nan, math.inf):
        with pytest.raises(ValueError):
            Vorticity(bad)
    assert float(Vorticity(-2)) == -2.0


def test_model_params_validation():
    assert ModelParams.geostrophic(1.5).kappa == 1.5
    with pytest.raises(ValueError):
        ModelParams(Model.GEOSTROPHIC, kappa=-1.0)
    with pytest.raises(ValueError):
        ModelParams(Model.PLANAR, kappa=1.0)
    with pytest.raises(ValueError):
        ModelParams(Model.SPHERE, omega=0.3)
    assert ModelParams.rotating_sphere(0.3).label == "sphere-rotating-frozen"


def test_sphere_point_pole_gauge_and_wrap():
    p = SpherePoint(0.0, 1.3)
    assert p.phi == 0.0 and p.gauge
    q = SpherePoint(1.0, -0.5)
    assert 0 <= q.phi < 2 * math.pi
    with pytest.raises(ValueError):
        SpherePoint(-0.1, 0.0)


@given(st.floats(0.0, math.pi), st.floats(-10, 10))
def test_sphere_point_unit_norm_and_roundtrip(theta, phi):
    p = SpherePoint(theta, phi)
    c = p.cartesian
    assert abs(np.linalg.norm(c) - 1.0) < 1e-12
    back = SpherePoint.from_cartesian(c)
    assert np.allclose(back.cartesian, c, atol=1e-12)


def test_plane_point_views():
    p = PlanePoint.from_polar(2.0, math.pi / 3)
    assert abs(p.rho - 2.0) < 1e-12
    assert abs(p.phi - math.pi / 3) < 1e-12
    origin = PlanePoint(0.0, 0.0)
    assert not origin.polar_defined
    assert math.isnan(origin.phi)


def test_system_rejects_coincident_points_and_mismatch():
    m = ModelParams.planar()
    with pytest.raises(ValueError):
        VortexSystem(m, (PlanePoint(0, 0), PlanePoint(0, 1e-12)), (1.0, 1.0))
    with pytest.raises(ValueError):
        VortexSystem(m, (PlanePoint(0, 0),), (1.0, 1.0))
    with pytest.raises(TypeError):
        VortexSystem(m, (SpherePoint(1.0, 0.0),), (1.0,))


def test_planar_ring_angles_and_centroid():
    s = build_planar_ring(4, 1.0)
    z = s.positions[:, 0] + 1j * s.positions[:, 1]
    assert np.allclose(z**4, 1.0, atol=1e-12)
    assert len(set(np.round(z, 9))) == 4
    assert np.allclose(s.positions.sum(axis=0), 0.0, atol=1e-12)


def test_planar_ring_with_center():
    s = build_planar_ring(3, 1.0, 0.5)
    assert s.n == 4 and s.strengths[-1] == 0.5
    plain = build_planar_ring(3, 1.0)
    assert np.array_equal(s.positions[:3], plain.positions)
    with pytest.raises(ValueError):
        build_planar_ring(3, 1.0, 0.0)
    with pytest.raises(ValueError):
        build_planar_ring(1, 1.0)
    with pytest.raises(ValueError):
        build_planar_ring(3, -1.0)


def test_sphere_ring_examples():
    s = build_sphere_ring(5, math.pi / 4)
    assert np.allclose(s.positions[:, 2], math.sqrt(2) / 2, atol=1e-12)
    p = build_sphere_ring(3, math.pi / 3, -1.0)
    assert abs(p.total_vorticity - 2.0) < 1e-12
    r = build_sphere_ring(4, math.pi / 6, None, 0.3)
    assert r.model == ModelParams.rotating_sphere(0.3)
    with pytest.raises(ValueError):
        build_sphere_ring(4, 0.0)


def test_double_ring_layouts():
    h = build_double_ring(Family.DNh2R, 4, math.pi / 3)
    assert h.n == 8
    th = np.arccos(h.positions[:, 2])
    assert np.allclose(sorted(set(np.round(th, 12))), [math.pi / 3, 2 * math.pi / 3])
    phi = np.arctan2(h.positions[:, 1], h.positions[:, 0])
    assert np.allclose(np.sort(phi[:4]), np.sort(phi[4:]), atol=1e-12)

    d = build_double_ring(Family.DNdRRp, 4, math.pi / 3, 2 * math.pi / 3)
    phi = np.mod(np.arctan2(d.positions[:, 1], d.positions[:, 0]), 2 * math.pi)
    offs = np.mod(phi[4:] - phi[:4], 2 * math.pi)
    assert np.allclose(offs, math.pi / 4, atol=1e-12)

    e = build_double_ring(Family.D2NhRe, 3)
    assert e.n == 6
    assert np.allclose(e.positions[:, 2], 0.0, atol=1e-15)
    assert e.strengths == (1.0, -1.0, 1.0, -1.0, 1.0, -1.0)


@pytest.mark.parametrize("cfg", [
    RingConfig(Family.CNR, 5, 1.3),
    RingConfig(Family.CNRp, 6, 0.7, lambda_p=-2.0),
    RingConfig(Family.CNvR, 4, 0.9),
    RingConfig(Family.CNvRp, 3, 1.1, lambda_p=0.4),
    RingConfig(Family.DNh2R, 4, 0.5),
    RingConfig(Family.DNdRRp, 5, 0.4),
    RingConfig(Family.D2NhRe, 3, math.pi / 2, lambda_p=2.0, k_p=2),
])
def test_rotation_by_two_pi_over_n_permutes(cfg):
    s = cfg.build()
    assert same_configuration(s, s.rotated(2 * math.pi / cfg.n))
    assert not same_configuration(s, s.rotated(math.pi / (3 * cfg.n)))


def test_ring_config_validation():
    with pytest.raises(ValueError):
        RingConfig(Family.CNRp, 4, 1.0)
    with pytest.raises(ValueError):
        RingConfig(Family.CNvR, 4, 0.0)
    with pytest.raises(ValueError):
        RingConfig(Family.CNR, 4, 1.0, k_p=2)
    with pytest.raises(ValueError):
        RingConfig(Family.DNh2R, 4, 0.5, k_p=1)


@settings(max_examples=30)
@given(st.integers(2, 12), st.floats(0.05, 3.0))
def test_planar_builder_invariants(n, radius):
    s = build_planar_ring(n, radius)
    assert np.allclose(np.hypot(*s.positions.T), radius)
    assert same_configuration(s, s.rotated(2 * math.pi / n))

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexlab.core import (
    ModelParams,
    PlanePoint,
    SpherePoint,
    VortexSystem,
    build_planar_ring,
    build_sphere_ring,
)
from vortexlab.models import (
    KERNELS_NUMBA,
    KERNELS_NUMPY,
    CollisionError,
    ModelArrays,
    background_potential,
    check_collisions,
    energy_momentum,
    hamiltonian,
    momentum_so2,
    momentum_sphere,
    velocity,
)
from vortexlab.specfun import bessel_k0


def plane(model, pts, lam):
    return VortexSystem(model, tuple(PlanePoint(*p) for p in pts), tuple(lam))


def sphere(model, pts, lam):
    return VortexSystem(model, tuple(SpherePoint(*p) for p in pts), tuple(lam))


def random_plane(rng, n=4, model=None):
    while True:
        pts = rng.uniform(-1.5, 1.5, size=(n, 2))
        d = np.linalg.norm(pts[:, None] - pts[None], axis=-1) + np.eye(n) * 9
        if d.min() > 0.3:
            return plane(model or ModelParams.planar(), pts, rng.uniform(0.5, 1.5, n))


def random_sphere(rng, n=4, model=None):
    while True:
        th = np.arccos(rng.uniform(-0.95, 0.95, n))
        ph = rng.uniform(0, 2 * math.pi, n)
        s = sphere(model or ModelParams.sphere(), zip(th, ph), rng.uniform(0.5, 1.5, n))
        p = s.positions
        d = np.linalg.norm(p[:, None] - p[None], axis=-1) + np.eye(n) * 9
        if d.min() > 0.3:
            return s


def test_planar_energy_examples():
    unit = plane(ModelParams.planar(), [(0, 0), (1, 0)], [1, 1])
    assert abs(hamiltonian(unit)) < 1e-15
    far = plane(ModelParams.planar(), [(0, 0), (math.e, 0)], [1, 1])
    assert abs(energy_momentum(far).h_raw + 1 / (2 * math.pi)) < 1e-14


def test_geostrophic_energy_example():
    s = plane(ModelParams.geostrophic(1.0), [(0, 0), (1, 0)], [1, 1])
    # normalized kernel is twice the pair sum of lambda_i lambda_j K0(kappa r)
    assert abs(hamiltonian(s) / 2 - 0.421024438) < 1e-9
    assert abs(hamiltonian(s) / 2 - bessel_k0(1.0)) < 1e-14


def test_collision_raises():
    s = plane(ModelParams.planar(), [(0, 0), (1, 0)], [1, 1])
    pos = s.positions.copy()
    pos[1] = pos[0] + 1e-11
    with pytest.raises(CollisionError):
        check_collisions(pos)


def test_symmetric_pair_rotates_rigidly():
    v = velocity(plane(ModelParams.planar(), [(-0.5, 0), (0.5, 0)], [1, 1]))
    # speed 2 in normalized time equals 1/(2 pi) on the raw clock
    assert np.allclose(np.abs(v.y_dot), 2.0) and np.allclose(v.x_dot, 0.0)
    assert v.y_dot[0] == -v.y_dot[1]
    assert abs(v.y_dot[1] / (4 * math.pi) - 1 / (2 * math.pi)) < 1e-15


def test_single_vortex_on_rotating_sphere():
    s = sphere(ModelParams.rotating_sphere(0.7), [(math.pi / 4, 0.3)], [1.0])
    v = velocity(s)
    assert abs(v.theta_dot[0]) < 1e-14
    assert abs(v.phi_dot[0] - 0.7) < 1e-14


def test_pole_velocity_uses_cartesian_view():
    s = sphere(ModelParams.sphere(), [(0.0, 0.0), (1.0, 0.2)], [1, 1])
    v = velocity(s)
    assert v.polar_mask.tolist() == [True, False]
    assert np.all(np.isfinite(v.cartesian))


def test_geostrophic_small_kappa_matches_planar_velocity():
    rng = np.random.default_rng(3)
    p = random_plane(rng)
    g = VortexSystem(ModelParams.geostrophic(1e-8), p.points, p.strengths)
    vp, vg = velocity(p).cartesian, velocity(g).cartesian
    assert np.max(np.abs(vg - vp)) < 1e-6 * np.max(np.abs(vp))


def test_momentum_examples():
    assert abs(momentum_so2(build_planar_ring(4, 1.0)) - 2.0) < 1e-14
    ring = build_sphere_ring(3, math.pi / 3)
    assert abs(momentum_so2(ring) - 1.5) < 1e-14
    with_pole = build_sphere_ring(3, math.pi / 3, 0.8)
    assert abs(momentum_so2(with_pole) - 1.5 - 0.8) < 1e-14
    north = sphere(ModelParams.sphere(), [(0.0, 0.0)], [1.0])
    assert np.allclose(momentum_sphere(north), [0, 0, 1], atol=1e-15)
    rot = sphere(ModelParams.rotating_sphere(0.3), [(0.0, 0.0)], [1.0])
    assert abs(momentum_sphere(rot)[2] - 1 - 8 * math.pi * 0.3 / 3) < 1e-14
    with pytest.raises(TypeError):
        momentum_sphere(build_planar_ring(3, 1.0))


def test_background_potential():
    assert background_potential(math.pi / 2, 1.0)[1] == -1.0
    assert abs(background_potential(math.pi / 4, 2.0)[1] + math.sqrt(2)) < 1e-15
    assert all(v == 0.0 for v in background_potential(0.8, 0.0))


def test_background_derivative_by_quadrature():
    # d/dtheta of the rotating-frame stream function built from 2 Omega cos(theta')
    # on the unit sphere with the -ln(1 - x.y) kernel, divided by the 4 pi normalization.
    th, om = math.pi / 4, 2.0
    tp = np.linspace(0, math.pi, 801)[1:-1]
    pp = np.linspace(0, 2 * math.pi, 800, endpoint=False)
    T, P = np.meshgrid(tp, pp, indexing="ij")
    w = 2 * om * np.cos(T) * np.sin(T) * (tp[1] - tp[0]) * (pp[1] - pp[0])

    def psi(t):
        x = np.array([math.sin(t), 0.0, math.cos(t)])
        dot = np.sin(T) * np.cos(P) * x[0] + np.cos(T) * x[2]
        return float(np.sum(w * -np.log(np.maximum(1 - dot, 1e-300)))) / (4 * math.pi)

    d = (psi(th + 1e-3) - psi(th - 1e-3)) / 2e-3
    assert abs(d - background_potential(th, om)[1]) < 2e-2


@pytest.mark.parametrize("make", ["planar", "geo", "sphere", "rsphere"])
def test_gradient_matches_finite_differences(make):
    rng = np.random.default_rng(11)
    if make == "planar":
        s = random_plane(rng)
    elif make == "geo":
        s = random_plane(rng, model=ModelParams.geostrophic(1.3))
    elif make == "sphere":
        s = random_sphere(rng)
    else:
        s = random_sphere(rng, model=ModelParams.rotating_sphere(0.4))
    arr = ModelArrays.of(s)
    pos = s.positions
    g = arr.gradient(pos)
    h = 1e-6
    fd = np.zeros_like(pos)
    for i in range(pos.shape[0]):
        for k in range(pos.shape[1]):
            p, m = pos.copy(), pos.copy()
            p[i, k] += h
            m[i, k] -= h
            fd[i, k] = (arr.energy(p) - arr.energy(m)) / (2 * h)
    if arr.sphere:
        # compare tangential parts only; the ambient extension is arbitrary radially
        g = g - np.einsum("ij,ij->i", g, pos)[:, None] * pos
        fd = fd - np.einsum("ij,ij->i", fd, pos)[:, None] * pos
    assert np.max(np.abs(g - fd)) < 1e-6 * max(1.0, np.max(np.abs(g)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 2 * math.pi))
def test_energy_is_rotation_invariant(seed, angle):
    rng = np.random.default_rng(seed)
    for s in (random_plane(rng), random_sphere(rng)):
        a, b = hamiltonian(s), hamiltonian(s.rotated(angle))
        assert abs(a - b) < 1e-10 * max(1.0, abs(a))
        assert abs(momentum_so2(s) - momentum_so2(s.rotated(angle))) < 1e-12


def test_velocity_is_rotation_equivariant():
    rng = np.random.default_rng(5)
    s = random_plane(rng)
    c, si = math.cos(0.7), math.sin(0.7)
    rot = np.array([[c, -si], [si, c]])
    assert np.allclose(velocity(s.rotated(0.7)).cartesian, velocity(s).cartesian @ rot.T, atol=1e-12)


def test_numba_and_numpy_kernels_agree():
    rng = np.random.default_rng(8)
    systems = [
        random_plane(rng),
        random_plane(rng, model=ModelParams.geostrophic(0.9)),
        random_sphere(rng),
        random_sphere(rng, model=ModelParams.rotating_sphere(0.5)),
    ]
    for s in systems:
        arr = ModelArrays.of(s)
        pos = s.positions
        e_np, g_np, v_np = KERNELS_NUMPY
        e_nb, g_nb, v_nb = KERNELS_NUMBA
        args = (arr.code, pos, arr.lam, arr.omega, arr.kappa)
        assert abs(e_np(*args) - e_nb(*args)) < 1e-12 * max(1, abs(e_np(*args)))
        for k_np, k_nb in ((g_np, g_nb), (v_np, v_nb)):
            a, b = np.empty_like(pos), np.empty_like(pos)
            k_np(*args, a)
            k_nb(*args, b)
            assert np.allclose(a, b, atol=1e-12, rtol=1e-12)

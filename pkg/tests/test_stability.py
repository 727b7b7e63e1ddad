import math

import numpy as np
import pytest

from vortexlab.core import Family, ModelParams, RingConfig, VortexSystem, build_planar_ring
from vortexlab.stability import (
    NotRelativeEquilibriumError,
    VerdictKind,
    analyze,
    block_hessian,
    closed_form_planar,
    closed_form_sphere_ring,
    closed_form_sphere_ring_polar,
    linearization_blocks,
    planar_block_eigenvalues,
    planar_det_a,
    planar_linearization_spectrum,
    planar_special_points,
    relative_equilibrium,
    slice_basis,
    trig_sum,
)

S, E, U, D = "S", "E", "U", "D"


def ring(n, lam=None, R=1.0):
    if lam is None:
        return RingConfig(Family.CNR, n, R)
    return RingConfig(Family.CNRp, n, R, lambda_p=lam)


def test_slice_dimensions_and_constraints():
    b = slice_basis(ring(4))
    assert b.dim == 6
    bp = slice_basis(ring(4, 1.0))
    assert bp.dim == 8
    for basis in (b, bp):
        assert np.max(np.abs(basis.constraints @ basis.vectors)) < 1e-12


def test_block_values_match_fourier_formulas():
    sh = block_hessian(ring(4, 1.0))
    lt, lp = planar_block_eigenvalues(4, 2, 1.0)
    assert sorted(np.concatenate([sh.block("2c").ravel(), sh.block("2s").ravel()])) == \
        pytest.approx(sorted([lt, lp]), rel=1e-7)
    assert planar_block_eigenvalues(4, 2, 0.0) == (4.0, 8.0)
    a = sh.block("1c")
    xi = sh.xi
    assert a[2, 2] == pytest.approx(2 * xi, rel=1e-7)  # N xi lambda / 2 with N=4, lambda=1
    assert a[0, 2] == pytest.approx(4 * math.sqrt(2), rel=1e-7)  # N lambda sqrt(N/2)
    assert np.linalg.det(a) == pytest.approx(planar_det_a(4, 1.0), rel=1e-7)
    assert sh.off_block < 1e-9 * max(1.0, sh.norm)


@pytest.mark.parametrize("n,lam", [(3, 0.5), (5, 2.0), (6, -1.0), (8, 3.0)])
def test_linearization_spectrum_matches_formula(n, lam):
    sh = block_hessian(ring(n, lam))
    num = np.concatenate([np.linalg.eigvals(m) for _, m in linearization_blocks(sh)])
    ref = planar_linearization_spectrum(n, lam)
    scale = max(1.0, np.max(np.abs(ref)))
    for z in ref:
        assert np.min(np.abs(num - z)) < 1e-6 * scale


@pytest.mark.parametrize("n,lam,expected", [
    (7, None, D), (5, 2.0, S), (5, -0.25, E), (3, 0.5, S), (12, 1.0, U), (8, 0.1, U),
    (4, None, S), (8, None, U),
])
def test_numeric_matches_closed_form(n, lam, expected):
    assert closed_form_planar(n, lam).code == expected
    assert analyze(ring(n, lam)).code == expected


def test_heptagon_note():
    v = analyze(ring(7))
    assert v.kind is VerdictKind.DEGENERATE and "fourth" in v.note


def test_boundary_convention():
    # the N=8 lower bound sits exactly at lambda = 0.5
    assert closed_form_planar(8, 0.5).code == D
    assert closed_form_planar(8, 0.5 + 1e-3).code == S
    assert closed_form_planar(4, 0.0).code == D
    assert closed_form_planar(3, -3.0).code == D
    assert planar_special_points(3) == (-3.0, -1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        closed_form_planar(2, 0.5)


@pytest.mark.parametrize("R", [0.5, 2.0, 3.7])
def test_verdict_is_scale_free(R):
    assert analyze(ring(5, 2.0, R)).code == S
    assert analyze(ring(6, -1.0, R)).code == closed_form_planar(6, -1.0).code


def test_sphere_ring_closed_forms():
    assert closed_form_sphere_ring(6, math.acos(0.9)).code == S
    assert closed_form_sphere_ring(10, 0.3).code == U
    assert closed_form_sphere_ring(4, math.acos(math.sqrt(1 / 3))).code == D
    assert analyze(RingConfig(Family.CNvR, 6, 0.4)).code == S


def test_sphere_ring_with_pole():
    assert closed_form_sphere_ring_polar(2, math.pi / 2, -1.0).code == S
    assert closed_form_sphere_ring_polar(5, 0.2, 50.0).code == U
    with pytest.raises(ValueError):
        closed_form_sphere_ring_polar(4, math.acos(0.25), -1.0)


@pytest.mark.parametrize("n,l,expected", [(4, 1, -1.0), (4, 2, -3.0), (2, 1, -1.0)])
def test_trig_sum_examples(n, l, expected):
    assert trig_sum(n, l) == pytest.approx(expected, abs=1e-12)


def test_trig_sum_identity():
    for n in range(2, 51):
        for l in range(1, n):
            assert abs(trig_sum(n, l) - ((n * n - 1) / 3 - 2 * l * (n - l))) < 1e-10


def test_not_an_equilibrium():
    s = build_planar_ring(4, 1.0)
    pos = s.positions.copy()
    pos[0] *= 1.1
    bent = VortexSystem.from_positions(s.model, pos, s.strengths)
    with pytest.raises(NotRelativeEquilibriumError):
        relative_equilibrium(bent)


def test_rotating_plane_gives_same_hessian():
    base = block_hessian(ring(5, 0.7))
    for om in (-1.0, 0.5, 2.0):
        sh = block_hessian(ring(5, 0.7), ModelParams.rotating_plane(om))
        assert np.max(np.abs(sh.full - base.full)) < 1e-9
        assert analyze(ring(5, 0.7), ModelParams.rotating_plane(om)).code == analyze(ring(5, 0.7)).code


def test_verdict_dict():
    d = analyze(ring(5, 2.0)).as_dict()
    assert d["verdict"] == S and "xi" in d and len(d["linearization_eigs"][0]) == 2

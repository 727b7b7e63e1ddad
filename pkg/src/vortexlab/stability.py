"""Energy-momentum stability of relative equilibria.

The phase space is charted per vortex by an oriented orthonormal tangent frame
(e1, e2) at the equilibrium; the symplectic form there is ``sum l da^db``.
Ring configurations get a symmetry-adapted Fourier basis of the slice, which
block-diagonalizes both d^2 H_xi and the linearization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Literal, Optional, Sequence, Union

import numpy as np
from numpy.typing import NDArray

from .core import Family, ModelParams, RingConfig, VortexSystem
from .models import PLANAR, ROT_PLANE, ModelArrays
from .smalleig import gen_eig, sym_eig

FD_STEP = 1e-5
GRADIENT_TOL = 1e-8
BLOCK_ERROR_TOL = 1e-7
POLE_TOL = 1e-6

Group = Literal["so2", "so3", "auto"]
ConfigLike = Union[RingConfig, VortexSystem]


class NotRelativeEquilibriumError(ValueError):
    """The gradient of H_xi does not vanish at the configuration."""


class SymmetryBasisError(RuntimeError):
    """The projected Hessian is not block diagonal in the symmetry-adapted basis."""


class VerdictKind(str, Enum):
    LYAPUNOV_STABLE = "S"
    ELLIPTIC = "E"
    LINEARLY_UNSTABLE = "U"
    DEGENERATE = "D"

    @property
    def code(self) -> str:
        return self.value


@dataclass(frozen=True)
class StabilityVerdict:
    kind: VerdictKind
    hessian_eigs: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    linearization_eigs: NDArray[np.complex128] = field(default_factory=lambda: np.zeros(0, complex))
    tolerance_used: float = 0.0
    note: str = ""
    xi: Optional[float] = None
    semisimple: bool = True

    @property
    def code(self) -> str:
        return self.kind.value

    def as_dict(self) -> dict:
        out = {
            "verdict": self.code,
            "hessian_eigs": [float(v) for v in self.hessian_eigs],
            "linearization_eigs": [[float(z.real), float(z.imag)] for z in self.linearization_eigs],
            "tolerance": self.tolerance_used,
        }
        if self.xi is not None:
            out["xi"] = self.xi
        if self.note:
            out["note"] = self.note
        return out


# ------------------------------------------------------------ equilibrium data


@dataclass(frozen=True)
class RelativeEquilibrium:
    """A configuration with its frames, rotation rate and ring layout."""

    system: VortexSystem
    arrays: ModelArrays
    frames: NDArray[np.float64]  # (n, 2, d)
    xi: float
    gradient_residual: float
    ring: Optional[tuple[int, ...]] = None  # indices of the ring vortices, in phase order
    center: Optional[int] = None
    phases: Optional[NDArray[np.float64]] = None
    # rotating plane only: xi - Omega solved with the still-plane kernel
    xi_still: Optional[float] = None

    @property
    def n(self) -> int:
        return self.system.n

    @property
    def positions(self) -> NDArray[np.float64]:
        return self.system.positions


def _frames(pos: NDArray[np.float64], sphere: bool, axis_angle: float = 0.0) -> NDArray[np.float64]:
    n, d = pos.shape
    fr = np.zeros((n, 2, d))
    ca, sa = math.cos(axis_angle), math.sin(axis_angle)
    for k in range(n):
        x = pos[k]
        rho = math.hypot(x[0], x[1])
        if sphere:
            if rho < math.sin(POLE_TOL):
                # e1 x e2 must equal the outward normal
                sgn = 1.0 if x[2] > 0 else -1.0
                fr[k, 0] = (ca, sa, 0.0)
                fr[k, 1] = (-sa * sgn, ca * sgn, 0.0)
            else:
                c, s = x[0] / rho, x[1] / rho
                fr[k, 0] = (x[2] * c, x[2] * s, -rho)
                fr[k, 1] = (-s, c, 0.0)
        else:
            if rho < 1e-13:
                fr[k, 0] = (ca, sa)
                fr[k, 1] = (-sa, ca)
            else:
                c, s = x[0] / rho, x[1] / rho
                fr[k, 0] = (c, s)
                fr[k, 1] = (-s, c)
    return fr


def _chart_gradient(
    ambient: NDArray[np.float64], pos: NDArray[np.float64], frames: NDArray[np.float64],
    scale: NDArray[np.float64], sphere: bool,
) -> NDArray[np.float64]:
    """Pull an ambient gradient back to chart coordinates, flattened (a1, b1, a2, ...)."""
    if sphere:
        # dX/da = (I - X X^T) e / |p|
        tang = frames - np.einsum("nd,nmd->nm", pos, frames)[:, :, None] * pos[:, None, :]
        g = np.einsum("nd,nmd->nm", ambient, tang) / scale[:, None]
    else:
        g = np.einsum("nd,nmd->nm", ambient, frames)
    return g.reshape(-1)


def _ring_layout(system: VortexSystem, config: Optional[RingConfig]):
    """Ring indices, centre index and phases for single-ring families."""
    if config is None or not config.family.single_ring:
        return None, None, None
    n = config.n
    ring = tuple(range(n))
    center = n if config.has_center else None
    pos = system.positions
    phi = np.arctan2(pos[:n, 1], pos[:n, 0])
    return ring, center, phi - phi[0]


def _resolve(config: ConfigLike, model: Optional[ModelParams]) -> tuple[VortexSystem, Optional[RingConfig]]:
    if isinstance(config, RingConfig):
        return config.build(model), config
    if isinstance(config, VortexSystem):
        return (config if model is None else config.with_model(model)), None
    raise TypeError(f"expected RingConfig or VortexSystem, got {type(config).__name__}")


def relative_equilibrium(
    config: ConfigLike, model: Optional[ModelParams] = None, xi: Optional[float] = None
) -> RelativeEquilibrium:
    """Locate xi from grad H = xi grad M and verify the gradient residual.

    Raises
    ------
    NotRelativeEquilibriumError
        If ``|grad H - xi grad M| >= 1e-8 * max(1, |grad H|)``.
    """
    system, ring_cfg = _resolve(config, model)
    arr = ModelArrays.of(system)
    pos = system.positions
    ring, center, phases = _ring_layout(system, ring_cfg)
    axis = 0.0
    if ring is not None:
        axis = float(math.atan2(pos[0, 1], pos[0, 0]))
    frames = _frames(pos, arr.sphere, axis)
    ones = np.ones(system.n)
    gh = _chart_gradient(arr.gradient(pos), pos, frames, ones, arr.sphere)
    gm = _chart_gradient(arr.rotation_generator_gradient(pos), pos, frames, ones, arr.sphere)
    mm = float(gm @ gm)
    if xi is None:
        xi = float(gh @ gm) / mm if mm > 1e-28 else 0.0
    res = float(np.linalg.norm(gh - xi * gm))
    if res >= GRADIENT_TOL * max(1.0, float(np.linalg.norm(gh))):
        raise NotRelativeEquilibriumError(
            f"configuration is not a relative equilibrium (gradient residual {res:.3e} at xi={xi:.6g})"
        )
    xi_still = None
    if arr.code == ROT_PLANE:
        gs = _chart_gradient(_still(arr).gradient(pos), pos, frames, ones, False)
        xi_still = float(gs @ gm) / mm if mm > 1e-28 else 0.0
    return RelativeEquilibrium(system, arr, frames, float(xi), res, ring, center, phases, xi_still)


def _still(arr: ModelArrays) -> ModelArrays:
    return ModelArrays(PLANAR, arr.lam, 0.0, 0.0)


def _augmented_gradient(re: RelativeEquilibrium, pos: NDArray[np.float64], scale: NDArray[np.float64]):
    arr, xi = re.arrays, re.xi
    if re.xi_still is not None:
        # H + Omega M - xi M is the still-plane H_xi at xi - Omega
        arr, xi = _still(arr), re.xi_still
    amb = arr.gradient(pos) - xi * arr.rotation_generator_gradient(pos)
    return _chart_gradient(amb, pos, re.frames, scale, re.arrays.sphere)


def hessian_at(re: RelativeEquilibrium, h: float = FD_STEP) -> NDArray[np.float64]:
    """d^2 H_xi in chart coordinates by Richardson-extrapolated central differences."""
    xe = re.positions
    n = re.n
    sphere = re.arrays.sphere
    hess = np.empty((2 * n, 2 * n))
    for k in range(n):
        for m in range(2):
            cols = []
            for step in (h, -h, 2 * h, -2 * h):
                ab = [0.0, 0.0]
                ab[m] = step
                pos = xe.copy()
                p = xe[k] + ab[0] * re.frames[k, 0] + ab[1] * re.frames[k, 1]
                scale = np.ones(n)
                if sphere:
                    scale[k] = np.linalg.norm(p)
                    p = p / scale[k]
                pos[k] = p
                cols.append(_augmented_gradient(re, pos, scale))
            gp, gm, g2p, g2m = cols
            hess[:, 2 * k + m] = (8.0 * (gp - gm) - (g2p - g2m)) / (12.0 * h)
    return 0.5 * (hess + hess.T)


def augmented_hessian(
    config: ConfigLike, model: Optional[ModelParams] = None, xi: Optional[float] = None,
    h: float = FD_STEP,
) -> NDArray[np.float64]:
    """Full d^2 H_xi at a relative equilibrium, chart coordinates (a_1, b_1, a_2, ...)."""
    return hessian_at(relative_equilibrium(config, model, xi), h)


def symplectic_matrix(re: RelativeEquilibrium) -> NDArray[np.float64]:
    """omega(u, v) = u^T W v in chart coordinates."""
    n = re.n
    w = np.zeros((2 * n, 2 * n))
    for k, lam in enumerate(re.system.strengths):
        w[2 * k, 2 * k + 1] = lam
        w[2 * k + 1, 2 * k] = -lam
    return w


# --------------------------------------------------------------------- slice


@dataclass(frozen=True)
class SliceBasis:
    """Orthonormal basis of the symplectic slice (columns of ``vectors``).

    ``blocks`` groups columns for the Hessian, ``sectors`` for the linearization.
    ``scale`` converts orthonormal-basis matrices to the conventional
    normalization in which each Fourier vector has squared norm N/2.
    """

    vectors: NDArray[np.float64]
    labels: tuple[str, ...]
    blocks: tuple[tuple[str, tuple[int, ...]], ...]
    sectors: tuple[tuple[str, tuple[int, ...]], ...]
    scale: float
    constraints: NDArray[np.float64]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def _resolve_group(re: RelativeEquilibrium, group: Group) -> str:
    # the non-rotating sphere has the full SO(3) momentum vector
    if group == "auto":
        model = re.system.model
        return "so3" if model.is_sphere and not model.is_rotating else "so2"
    return group


def _constraints(re: RelativeEquilibrium, group: Group) -> NDArray[np.float64]:
    group = _resolve_group(re, group)
    pos, fr, sph = re.positions, re.frames, re.arrays.sphere
    ones = np.ones(re.n)
    rows = [
        _chart_gradient(re.arrays.rotation_generator_gradient(pos), pos, fr, ones, sph),
    ]
    gen = np.zeros_like(pos)
    gen[:, 0] = -pos[:, 1]
    gen[:, 1] = pos[:, 0]
    rows.append(_chart_gradient(gen, pos, fr, ones, sph))
    if group == "so3":
        if not (sph and not re.system.model.is_rotating):
            raise ValueError("the so3 slice applies to the non-rotating sphere only")
        lam = re.system.lam
        for axis in (0, 1):
            g = np.zeros_like(pos)
            g[:, axis] = lam
            rows.append(_chart_gradient(g, pos, fr, ones, sph))
    elif group != "so2":
        raise ValueError(f"unknown group {group!r}")
    return np.array(rows)


def _complement(vectors: NDArray[np.float64], constraints: NDArray[np.float64], tol: float = 1e-10):
    """Orthonormal basis of span(vectors) orthogonal to the constraints."""
    if vectors.shape[1] == 0:
        return vectors
    coef = constraints @ vectors  # (c, k)
    norms = np.linalg.norm(constraints, axis=1)
    keep = np.linalg.norm(coef, axis=1) > tol * np.maximum(norms, 1.0)
    coef = coef[keep]
    if coef.shape[0] == 0:
        return vectors
    _, s, vt = np.linalg.svd(coef, full_matrices=True)
    rank = int(np.sum(s > tol * max(1.0, s.max())))
    return vectors @ vt[rank:].T


def _ring_basis(re: RelativeEquilibrium, group: Group) -> SliceBasis:
    n_ring = len(re.ring)
    dim = 2 * re.n
    ph = re.phases
    cols: list[NDArray[np.float64]] = []
    labels: list[str] = []
    blocks: list[tuple[str, tuple[int, ...]]] = []
    sectors: list[tuple[str, tuple[int, ...]]] = []

    def mode(fn, comp):
        v = np.zeros(dim)
        for s, idx in enumerate(re.ring):
            v[2 * idx + comp] = fn(ph[s])
        return v / np.linalg.norm(v)

    def center_vec(comp):
        v = np.zeros(dim)
        v[2 * re.center + comp] = -1.0
        return v

    cons = _constraints(re, group)
    for ell in range(1, n_ring // 2 + 1):
        half = 2 * ell == n_ring
        c_vecs = [] if half else [("b_phi", mode(lambda p: math.sin(ell * p), 1))]
        c_vecs.append(("a_theta", mode(lambda p: math.cos(ell * p), 0)))
        s_vecs = [("a_phi", mode(lambda p: math.cos(ell * p), 1))]
        if not half:
            s_vecs.append(("b_theta", mode(lambda p: math.sin(ell * p), 0)))
        if ell == 1 and re.center is not None:
            c_vecs.append(("dx", center_vec(0)))
            s_vecs.append(("dy", center_vec(1)))
        sector_idx: list[int] = []
        for cls, vecs in (("c", c_vecs), ("s", s_vecs)):
            mat = np.column_stack([v for _, v in vecs])
            reduced = _complement(mat, cons)
            names = [f"{name}{ell}" if name not in ("dx", "dy") else name for name, _ in vecs]
            if reduced.shape[1] != mat.shape[1]:
                names = [f"{cls}{ell}_{i}" for i in range(reduced.shape[1])]
            start = len(cols)
            cols.extend(reduced.T)
            labels.extend(names)
            idx = tuple(range(start, len(cols)))
            if idx:
                blocks.append((f"{ell}{cls}", idx))
                sector_idx.extend(idx)
        if sector_idx:
            sectors.append((f"{ell}", tuple(sector_idx)))
    vecs = np.column_stack(cols)
    if np.max(np.abs(cons @ vecs)) > 1e-12 * max(1.0, np.abs(cons).max()):
        raise SymmetryBasisError("symmetry-adapted vectors violate the slice constraints")
    return SliceBasis(vecs, tuple(labels), tuple(blocks), tuple(sectors), n_ring / 2.0, cons)


def _generic_basis(re: RelativeEquilibrium, group: Group) -> SliceBasis:
    cons = _constraints(re, group)
    vecs = _complement(np.eye(2 * re.n), cons)
    k = vecs.shape[1]
    idx = tuple(range(k))
    return SliceBasis(vecs, tuple(f"v{i}" for i in idx), (("full", idx),), (("full", idx),), 1.0, cons)


def basis_for(re: RelativeEquilibrium, group: Group = "auto") -> SliceBasis:
    if re.ring is not None and len(re.ring) >= 2:
        return _ring_basis(re, group)
    return _generic_basis(re, group)


def slice_basis(config: ConfigLike, model: Optional[ModelParams] = None, group: Group = "auto") -> SliceBasis:
    """Basis of ker dJ intersected with the complement of the group direction."""
    re = relative_equilibrium(config, model)
    _check_plane_lift(re)
    return basis_for(re, group)


def _check_plane_lift(re: RelativeEquilibrium) -> None:
    model = re.system.model
    if model.is_rotating and not model.is_sphere and re.system.total_vorticity == 0.0:
        raise ValueError("rotating-plane lift needs nonzero total vorticity")


# ------------------------------------------------------------ blocks and L_N


@dataclass(frozen=True)
class SliceHessian:
    """Blocks of d^2 H_xi restricted to the slice, conventional normalization."""

    blocks: tuple[tuple[str, NDArray[np.float64]], ...]
    full: NDArray[np.float64]
    basis: SliceBasis
    xi: float
    off_block: float
    equilibrium: RelativeEquilibrium = field(repr=False)
    symplectic: NDArray[np.float64] = field(repr=False, default=None)

    def block(self, label: str) -> NDArray[np.float64]:
        for lab, mat in self.blocks:
            if lab == label:
                return mat
        raise KeyError(label)

    @property
    def norm(self) -> float:
        return float(np.max(np.abs(self.full))) if self.full.size else 0.0


def _block_mask(k: int, groups: Sequence[tuple[str, tuple[int, ...]]]) -> NDArray[np.bool_]:
    mask = np.zeros((k, k), dtype=bool)
    for _, idx in groups:
        ix = np.array(idx)
        mask[np.ix_(ix, ix)] = True
    return mask


def hessian_blocks(re: RelativeEquilibrium, group: Group = "auto", h: float = FD_STEP) -> SliceHessian:
    basis = basis_for(re, group)
    hess = hessian_at(re, h)
    b = basis.vectors
    full = basis.scale * (b.T @ hess @ b)
    full = 0.5 * (full + full.T)
    w = basis.scale * (b.T @ symplectic_matrix(re) @ b)
    mask = _block_mask(basis.dim, basis.blocks)
    off = float(np.max(np.abs(full[~mask]))) if (~mask).any() else 0.0
    hnorm = max(1.0, float(np.max(np.abs(full))))
    if off > BLOCK_ERROR_TOL * hnorm:
        raise SymmetryBasisError(f"off-block coupling {off:.3e} exceeds {BLOCK_ERROR_TOL:g} of the Hessian norm")
    blocks = tuple((lab, full[np.ix_(idx, idx)].copy()) for lab, idx in basis.blocks)
    return SliceHessian(blocks, full, basis, re.xi, off, re, w)


def block_hessian(
    config: ConfigLike, model: Optional[ModelParams] = None, group: Group = "auto"
) -> SliceHessian:
    """d^2 H_xi on the slice, split into symmetry blocks.

    Raises
    ------
    SymmetryBasisError
        When off-block couplings exceed 1e-7 of the Hessian norm.
    """
    re = relative_equilibrium(config, model)
    _check_plane_lift(re)
    return hessian_blocks(re, group)


def linearization_blocks(sh: SliceHessian) -> list[tuple[str, NDArray[np.float64]]]:
    out = []
    for lab, idx in sh.basis.sectors:
        ix = np.ix_(idx, idx)
        w = sh.symplectic[ix]
        s = sh.full[ix]
        out.append((lab, -np.linalg.solve(w, s)))
    return out


def block_linearization(
    config: ConfigLike, model: Optional[ModelParams] = None, group: Group = "auto"
) -> list[tuple[str, NDArray[np.float64]]]:
    """L_N = -W_N^{-1} S_N per symmetry sector."""
    return linearization_blocks(block_hessian(config, model, group))


# ------------------------------------------------------------------- verdict


def _collision_limited(leigs: NDArray[np.complex128], ltol: float, tol_rel: float) -> bool:
    """True when every growing mode could be a split multiple eigenvalue.

    A k-fold defective eigenvalue perturbed by eps spreads by about
    eps**(1/k), so real parts under sqrt(tol) that sit in a cluster are not
    resolved by a finite-difference Hessian.
    """
    radius = math.sqrt(tol_rel) * max(1.0, float(np.max(np.abs(leigs))))
    for z in leigs[leigs.real > ltol]:
        if z.real >= radius:
            return False
        near = np.abs(leigs - z) < 4.0 * radius
        if np.count_nonzero(near) < 3:  # z and its mirror -conj(z) alone
            return False
    return True


def classify(
    hessian: SliceHessian,
    linearization: Sequence[tuple[str, NDArray[np.float64]]],
    tol_rel: float = 1e-8,
) -> StabilityVerdict:
    """Energy-momentum verdict from the slice Hessian and linearization blocks."""
    heigs = np.sort(np.concatenate([sym_eig(m).eigenvalues for _, m in hessian.blocks])) \
        if hessian.blocks else np.zeros(0)
    specs = [gen_eig(m) for _, m in linearization]
    leigs = np.concatenate([s.eigenvalues for s in specs]) if specs else np.zeros(0, complex)
    leigs = leigs[np.lexsort((leigs.imag, leigs.real))]
    semisimple = all(s.semisimple_flag for s in specs)
    htol = tol_rel * max(1.0, float(np.max(np.abs(heigs))) if heigs.size else 1.0)
    ltol = tol_rel * max(1.0, float(np.max(np.abs(leigs))) if leigs.size else 1.0)
    kw = dict(hessian_eigs=heigs, linearization_eigs=leigs, tolerance_used=htol, xi=hessian.xi,
              semisimple=semisimple)
    if heigs.size and np.any(np.abs(heigs) < htol):
        return StabilityVerdict(VerdictKind.DEGENERATE, note="zero Hessian eigenvalue on the slice", **kw)
    if np.all(heigs > 0) or np.all(heigs < 0):
        return StabilityVerdict(VerdictKind.LYAPUNOV_STABLE, **kw)
    if leigs.size and np.max(leigs.real) > ltol:
        if _collision_limited(leigs, ltol, tol_rel):
            return StabilityVerdict(VerdictKind.DEGENERATE,
                                    note="eigenvalue collision below resolution", **kw)
        return StabilityVerdict(VerdictKind.LINEARLY_UNSTABLE, **kw)
    if semisimple:
        return StabilityVerdict(VerdictKind.ELLIPTIC, **kw)
    return StabilityVerdict(VerdictKind.DEGENERATE, note="non-semisimple imaginary spectrum", **kw)


def analyze(
    config: ConfigLike, model: Optional[ModelParams] = None, group: Group = "auto",
    tol_rel: float = 1e-8,
) -> StabilityVerdict:
    """Numeric verdict for a relative equilibrium."""
    sh = block_hessian(config, model, group)
    v = classify(sh, linearization_blocks(sh), tol_rel)
    if v.kind is VerdictKind.DEGENERATE and isinstance(config, RingConfig) \
            and config.family is Family.CNR and config.n == 7 and not v.note.startswith("fourth"):
        v = StabilityVerdict(v.kind, v.hessian_eigs, v.linearization_eigs, v.tolerance_used,
                             "fourth-order analysis needed (Thomson heptagon)", v.xi, v.semisimple)
    return v


# --------------------------------------------------------------- closed forms


def _verdict(kind: VerdictKind, note: str = "") -> StabilityVerdict:
    return StabilityVerdict(kind, note=note)


S, E, U, D = (VerdictKind.LYAPUNOV_STABLE, VerdictKind.ELLIPTIC,
              VerdictKind.LINEARLY_UNSTABLE, VerdictKind.DEGENERATE)


def planar_bounds(N: int) -> tuple[float, float]:
    """(lower, upper) thresholds on the central strength for the planar ring."""
    eps = 1 if N % 2 == 0 else 0
    return (N * N - 8 * N + 7 + eps) / 16.0, (N - 1) ** 2 / 4.0


def planar_special_points(N: int) -> tuple[float, ...]:
    """Central strengths where the closed-form verdict is D."""
    lower, upper = planar_bounds(N)
    pts = [0.0, upper, -(N - 1) / 2.0]
    if N > 3:
        pts.append(lower)
    else:
        pts.append(-3.0)
    return tuple(sorted(pts))


def closed_form_planar(N: int, lam: Optional[float] = None, *, atol: float = 1e-12) -> StabilityVerdict:
    """Known verdicts for the planar N-ring, with or without a central vortex."""
    if int(N) != N or N < 3:
        raise ValueError(f"N must be an integer >= 3, got {N}")
    if lam is None:
        if N <= 6:
            return _verdict(S)
        if N == 7:
            return _verdict(D, "fourth-order analysis needed (Thomson heptagon)")
        return _verdict(U)
    lower, upper = planar_bounds(N)
    for b in (0.0, upper) + ((lower,) if N > 3 else ()):
        if abs(lam - b) <= atol:
            return _verdict(D, "boundary")
    if abs(lam + (N - 1) / 2.0) <= atol:
        return _verdict(D, "zero angular velocity")
    if N == 3:
        if abs(lam + 3.0) <= atol:
            # |xi| meets the radial pair frequency: defective +-4i
            return _verdict(D, "frequency collision")
        if 0.0 < lam < 1.0:
            return _verdict(S)
        return _verdict(E) if lam < 0.0 else _verdict(U)
    if max(0.0, lower) < lam < upper:
        return _verdict(S)
    if lower < lam < 0.0:
        return _verdict(E)
    return _verdict(U)


SPHERE_RING_THRESHOLDS = {4: 1.0 / 3.0, 5: 0.5, 6: 0.8}


def closed_form_sphere_ring(N: int, theta0: float, *, atol: float = 1e-12) -> StabilityVerdict:
    """Known verdicts for a single latitudinal N-ring on the non-rotating sphere."""
    if int(N) != N or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N}")
    if N <= 3:
        return _verdict(S)
    if N > 6:
        return _verdict(U)
    c2 = math.cos(theta0) ** 2
    thr = SPHERE_RING_THRESHOLDS[N]
    if abs(c2 - thr) <= atol:
        return _verdict(D, "boundary")
    return _verdict(S if c2 > thr else U)


def closed_form_sphere_ring_polar(
    N: int, theta0: float, lam: float, *, atol: float = 1e-12
) -> StabilityVerdict:
    """Known verdicts for an N-ring with a north-pole vortex of strength ``lam``."""
    if int(N) != N or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N}")
    c = math.cos(theta0)
    s2 = math.sin(theta0) ** 2
    if abs(N * c + lam) <= atol:
        raise ValueError("the relative equilibrium has zero momentum")
    if N == 2:
        val = (1 + 2 * c) * ((1 + c) ** 2 * lam + c * (2 + 3 * c))
        if abs(val) <= atol:
            return _verdict(D, "boundary")
        return _verdict(S if val < 0 else U)
    a = (N * c - N + 2) * (1 + c) ** 2
    bound = (N * s2 + 4 * (N - 1) * c) ** 2
    if abs(8 * a * lam - bound) <= atol:
        return _verdict(D, "boundary")
    high = 8 * a * lam > bound
    if abs(a) <= atol:
        return _verdict(U) if high else _verdict(D, "criterion gap")
    lam1 = (N - 1) * c * (N * s2 + 2 * (N - 1) * c) / a
    prod = a * lam * (lam + N * c) * (lam - lam1)
    if N == 3:
        if high:
            return _verdict(U)
        if prod < -atol:
            return _verdict(S)
        return _verdict(D, "criterion gap")
    c_n = N * N / 4.0 if N % 2 == 0 else (N * N - 1) / 4.0
    lam0 = (c_n - (N - 1) * (1 + c * c)) / (1 + c) ** 2
    if abs(lam - lam0) <= atol:
        return _verdict(D, "boundary")
    if lam < lam0 or high:
        return _verdict(U)
    if prod < -atol:
        return _verdict(S)
    return _verdict(D, "criterion gap")


def trig_sum(N: int, l: int) -> float:
    """Sum_{j=1}^{N-1} cos(2 pi l j / N) / sin^2(pi j / N), summed directly."""
    if not 1 <= l <= N - 1:
        raise ValueError(f"need 1 <= l <= N-1, got N={N}, l={l}")
    return math.fsum(
        math.cos(2 * math.pi * l * j / N) / math.sin(math.pi * j / N) ** 2 for j in range(1, N)
    )


# ------------------------------------------------------- analytic references


def planar_block_eigenvalues(N: int, ell: int, lam: float) -> tuple[float, float]:
    """(lambda_theta, lambda_phi) of the l-th Fourier block for the ring with centre."""
    lt = N / 2.0 * (-(ell - 1) * (N - ell - 1) + N - 1 + 4 * lam)
    lp = N * ell * (N - ell) / 2.0
    return lt, lp


def planar_xi(N: int, lam: float, R: float = 1.0) -> float:
    return (N - 1 + 2 * lam) / R**2


def planar_det_a(N: int, lam: float) -> float:
    """Determinant of the 3x3 translation block (corrected sign of the middle factor)."""
    return -N**3 * lam * (lam + (N - 1) / 2.0) * (lam - (N - 1) ** 2 / 4.0)


def planar_linearization_spectrum(N: int, lam: float, R: float = 1.0) -> NDArray[np.complex128]:
    """Eigenvalues of L_N for the planar ring with centre, in normalized time."""
    xi = planar_xi(N, lam, R)
    ev: list[complex] = [1j * xi, -1j * xi]
    c = complex(lam - (N - 1) ** 2 / 4.0) ** 0.5 * 2 / R**2
    ev += [c, -c, c, -c]
    for ell in range(2, N // 2 + 1):
        lt, lp = planar_block_eigenvalues(N, ell, lam)
        z = 2.0 / N * complex(-lt * lp) ** 0.5 / R**2
        mult = 1 if 2 * ell == N else 2
        ev += [z, -z] * mult
    arr = np.array(ev, dtype=complex)
    return arr[np.lexsort((arr.imag, arr.real))]

"""Hamiltonians, momentum maps and velocity fields.

Energies use the normalized unit (4*pi times the physical energy):

* plane:        H = -sum_{i<j} l_i l_j ln|x_i - x_j|^2
* geostrophic:  H = 2 sum_{i<j} l_i l_j K0(kappa |x_i - x_j|)
* sphere:       H = -sum_{i<j} l_i l_j ln(1 - x_i . x_j)

Rotating variants add ``omega * M`` with the rotation generator
``M = -sum l rho^2 / 2`` (plane) or ``M = sum l z`` (sphere).  The symplectic
form is ``sum l dx^dy`` on each tangent plane, so ``l * v = grad H x n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from ._jit import JIT_ENABLED, njit
from .core import ModelParams, VortexSystem
from .specfun import k01

FOUR_PI = 4.0 * math.pi
POLE_TOL = 1e-6

# model codes, mirrored from core.Model.code
PLANAR, ROT_PLANE, GEO, SPHERE, ROT_SPHERE = 0, 1, 2, 3, 4


class CollisionError(ArithmeticError):
    """Two vortices closer than the singularity threshold."""

    def __init__(self, i: int, j: int, distance: float, t: float | None = None):
        self.pair = (i, j)
        self.distance = distance
        self.t = t
        where = "" if t is None else f" at t={t:.6g}"
        super().__init__(f"vortices {i} and {j} collide{where} (distance {distance:.3e})")


# ---------------------------------------------------------------- jit kernels


@njit
def _energy_nb(code, pos, lam, omega, kappa):
    n = pos.shape[0]
    h = 0.0
    if code == SPHERE or code == ROT_SPHERE:
        for i in range(n):
            for j in range(i + 1, n):
                dot = pos[i, 0] * pos[j, 0] + pos[i, 1] * pos[j, 1] + pos[i, 2] * pos[j, 2]
                h -= lam[i] * lam[j] * math.log(1.0 - dot)
        if code == ROT_SPHERE:
            for i in range(n):
                h += omega * lam[i] * pos[i, 2]
        return h
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            r2 = dx * dx + dy * dy
            if code == GEO and kappa > 0.0:
                h += 2.0 * lam[i] * lam[j] * k01(kappa * math.sqrt(r2))[0]
            else:
                h -= lam[i] * lam[j] * math.log(r2)
    if code == ROT_PLANE:
        for i in range(n):
            h -= 0.5 * omega * lam[i] * (pos[i, 0] ** 2 + pos[i, 1] ** 2)
    return h


@njit
def _gradient_nb(code, pos, lam, omega, kappa, out):
    n, d = pos.shape
    for i in range(n):
        for k in range(d):
            out[i, k] = 0.0
    if code == SPHERE or code == ROT_SPHERE:
        for i in range(n):
            for j in range(i + 1, n):
                dot = pos[i, 0] * pos[j, 0] + pos[i, 1] * pos[j, 1] + pos[i, 2] * pos[j, 2]
                w = lam[i] * lam[j] / (1.0 - dot)
                for k in range(3):
                    out[i, k] += w * pos[j, k]
                    out[j, k] += w * pos[i, k]
            if code == ROT_SPHERE:
                out[i, 2] += omega * lam[i]
        return
    for i in range(n):
        for j in range(i + 1, n):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            r2 = dx * dx + dy * dy
            if code == GEO and kappa > 0.0:
                r = math.sqrt(r2)
                w = -2.0 * kappa * lam[i] * lam[j] * k01(kappa * r)[1] / r
            else:
                w = -2.0 * lam[i] * lam[j] / r2
            out[i, 0] += w * dx
            out[i, 1] += w * dy
            out[j, 0] -= w * dx
            out[j, 1] -= w * dy
        if code == ROT_PLANE:
            out[i, 0] -= omega * lam[i] * pos[i, 0]
            out[i, 1] -= omega * lam[i] * pos[i, 1]


@njit
def _velocity_nb(code, pos, lam, omega, kappa, out):
    _gradient_nb(code, pos, lam, omega, kappa, out)
    n = pos.shape[0]
    if code == SPHERE or code == ROT_SPHERE:
        for i in range(n):
            gx, gy, gz = out[i, 0], out[i, 1], out[i, 2]
            x, y, z = pos[i, 0], pos[i, 1], pos[i, 2]
            out[i, 0] = (gy * z - gz * y) / lam[i]
            out[i, 1] = (gz * x - gx * z) / lam[i]
            out[i, 2] = (gx * y - gy * x) / lam[i]
    else:
        for i in range(n):
            gx = out[i, 0]
            out[i, 0] = out[i, 1] / lam[i]
            out[i, 1] = -gx / lam[i]


@njit
def _min_distance_nb(pos):
    n, d = pos.shape
    best = np.inf
    bi, bj = -1, -1
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for k in range(d):
                s += (pos[i, k] - pos[j, k]) ** 2
            if s < best:
                best, bi, bj = s, i, j
    return math.sqrt(best), bi, bj


# -------------------------------------------------------------- numpy kernels


def _k01_vec(x: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    k0 = np.empty_like(x)
    k1 = np.empty_like(x)
    for idx, v in np.ndenumerate(x):
        k0[idx], k1[idx] = k01(float(v))
    return k0, k1


def _pairs(pos: NDArray[np.float64]) -> tuple[NDArray[np.intp], NDArray[np.intp]]:
    return np.triu_indices(len(pos), 1)


def _energy_np(code, pos, lam, omega, kappa):
    i, j = _pairs(pos)
    ll = lam[i] * lam[j]
    if code in (SPHERE, ROT_SPHERE):
        dot = np.einsum("ij,ij->i", pos[i], pos[j])
        h = -np.sum(ll * np.log(1.0 - dot))
        if code == ROT_SPHERE:
            h += omega * np.sum(lam * pos[:, 2])
        return float(h)
    diff = pos[i] - pos[j]
    r2 = np.einsum("ij,ij->i", diff, diff)
    if code == GEO and kappa > 0.0:
        h = 2.0 * np.sum(ll * _k01_vec(kappa * np.sqrt(r2))[0])
    else:
        h = -np.sum(ll * np.log(r2))
    if code == ROT_PLANE:
        h -= 0.5 * omega * np.sum(lam * np.einsum("ij,ij->i", pos, pos))
    return float(h)


def _gradient_np(code, pos, lam, omega, kappa, out):
    ll = np.outer(lam, lam)
    np.fill_diagonal(ll, 0.0)
    if code in (SPHERE, ROT_SPHERE):
        gram = pos @ pos.T
        np.fill_diagonal(gram, 0.0)
        w = ll / (1.0 - gram)
        out[:] = w @ pos
        if code == ROT_SPHERE:
            out[:, 2] += omega * lam
        return
    diff = pos[:, None, :] - pos[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(r2, 1.0)
    if code == GEO and kappa > 0.0:
        r = np.sqrt(r2)
        w = -2.0 * kappa * ll * _k01_vec(kappa * r)[1] / r
    else:
        w = -2.0 * ll / r2
    out[:] = np.einsum("ij,ijk->ik", w, diff)
    if code == ROT_PLANE:
        out -= omega * lam[:, None] * pos


def _velocity_np(code, pos, lam, omega, kappa, out):
    g = np.empty_like(pos)
    _gradient_np(code, pos, lam, omega, kappa, g)
    if code in (SPHERE, ROT_SPHERE):
        out[:] = np.cross(g, pos) / lam[:, None]
    else:
        out[:, 0] = g[:, 1] / lam
        out[:, 1] = -g[:, 0] / lam


def _min_distance_np(pos):
    i, j = _pairs(pos)
    d = np.linalg.norm(pos[i] - pos[j], axis=1)
    k = int(np.argmin(d))
    return float(d[k]), int(i[k]), int(j[k])


if JIT_ENABLED:
    energy_kernel, gradient_kernel, velocity_kernel = _energy_nb, _gradient_nb, _velocity_nb
    min_distance_kernel = _min_distance_nb
else:
    energy_kernel, gradient_kernel, velocity_kernel = _energy_np, _gradient_np, _velocity_np
    min_distance_kernel = _min_distance_np

KERNELS_NUMPY = (_energy_np, _gradient_np, _velocity_np)
KERNELS_NUMBA = (_energy_nb, _gradient_nb, _velocity_nb)


# ------------------------------------------------------------- array helpers


@dataclass(frozen=True)
class ModelArrays:
    """Flat numeric view of a system for kernel calls."""

    code: int
    lam: NDArray[np.float64]
    omega: float
    kappa: float

    @classmethod
    def of(cls, system: VortexSystem) -> "ModelArrays":
        return cls.from_params(system.model, system.lam)

    @classmethod
    def from_params(cls, model: ModelParams, lam: NDArray[np.float64]) -> "ModelArrays":
        code = model.model.code
        if code == GEO and model.kappa == 0.0:
            code = PLANAR
        return cls(code, np.ascontiguousarray(lam, dtype=float), model.omega, model.kappa)

    @property
    def sphere(self) -> bool:
        return self.code in (SPHERE, ROT_SPHERE)

    def energy(self, pos: NDArray[np.float64]) -> float:
        return float(energy_kernel(self.code, np.ascontiguousarray(pos), self.lam, self.omega, self.kappa))

    def gradient(self, pos: NDArray[np.float64]) -> NDArray[np.float64]:
        pos = np.ascontiguousarray(pos, dtype=float)
        out = np.empty_like(pos)
        gradient_kernel(self.code, pos, self.lam, self.omega, self.kappa, out)
        return out

    def velocity(self, pos: NDArray[np.float64]) -> NDArray[np.float64]:
        pos = np.ascontiguousarray(pos, dtype=float)
        out = np.empty_like(pos)
        velocity_kernel(self.code, pos, self.lam, self.omega, self.kappa, out)
        return out

    def rotation_generator(self, pos: NDArray[np.float64]) -> float:
        """M with H_xi = H - xi M; its flow is unit-rate rotation about z."""
        if self.sphere:
            return float(np.sum(self.lam * pos[:, 2]))
        return float(-0.5 * np.sum(self.lam * np.einsum("ij,ij->i", pos, pos)))

    def rotation_generator_gradient(self, pos: NDArray[np.float64]) -> NDArray[np.float64]:
        if self.sphere:
            g = np.zeros_like(pos)
            g[:, 2] = self.lam
            return g
        return -self.lam[:, None] * pos

    def energy_fn(self) -> Callable[[NDArray[np.float64]], float]:
        return self.energy


def check_collisions(pos: NDArray[np.float64], threshold: float = 1e-10, t: float | None = None) -> None:
    if len(pos) < 2:
        return
    d, i, j = min_distance_kernel(np.ascontiguousarray(pos, dtype=float))
    if d < threshold:
        raise CollisionError(int(i), int(j), float(d), t)


# ---------------------------------------------------------------- public API


@dataclass(frozen=True)
class EnergyMomentum:
    """Conserved quantities; ``h`` normalized, ``h_raw = h / (4 pi)``."""

    h: float
    j_so2: float
    m_vec: NDArray[np.float64] | None = None

    @property
    def h_raw(self) -> float:
        return self.h / FOUR_PI


@dataclass(frozen=True)
class VelocityField:
    """Per-vortex rates.

    ``cartesian`` is always filled. Plane models expose ``x_dot``/``y_dot``;
    sphere models expose ``theta_dot``/``phi_dot``, with ``phi_dot`` NaN within
    1e-6 rad of a pole, where the cartesian tangent velocity is the valid view.
    """

    cartesian: NDArray[np.float64]
    sphere: bool
    theta_dot: NDArray[np.float64] | None = None
    phi_dot: NDArray[np.float64] | None = None

    @property
    def x_dot(self) -> NDArray[np.float64]:
        return self.cartesian[:, 0]

    @property
    def y_dot(self) -> NDArray[np.float64]:
        return self.cartesian[:, 1]

    @property
    def polar_mask(self) -> NDArray[np.bool_]:
        if self.phi_dot is None:
            return np.zeros(len(self.cartesian), dtype=bool)
        return np.isnan(self.phi_dot)


def hamiltonian(system: VortexSystem) -> float:
    """Normalized energy. The rotating-sphere background self-energy is a dropped constant."""
    arr = ModelArrays.of(system)
    pos = system.positions
    check_collisions(pos)
    return arr.energy(pos)


def sphere_rates(pos: NDArray[np.float64], vel: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """(theta_dot, phi_dot) from cartesian velocities on the unit sphere."""
    theta = np.arccos(np.clip(pos[:, 2], -1.0, 1.0))
    phi = np.arctan2(pos[:, 1], pos[:, 0])
    st, ct = np.sin(theta), np.cos(theta)
    e_theta = np.stack([ct * np.cos(phi), ct * np.sin(phi), -st], axis=1)
    e_phi = np.stack([-np.sin(phi), np.cos(phi), np.zeros_like(phi)], axis=1)
    th_dot = np.einsum("ij,ij->i", vel, e_theta)
    polar = (theta < POLE_TOL) | (theta > math.pi - POLE_TOL)
    with np.errstate(divide="ignore", invalid="ignore"):
        ph_dot = np.einsum("ij,ij->i", vel, e_phi) / st
    ph_dot[polar] = np.nan
    th_dot[polar] = np.nan
    return th_dot, ph_dot


def velocity(system: VortexSystem) -> VelocityField:
    arr = ModelArrays.of(system)
    pos = system.positions
    check_collisions(pos)
    v = arr.velocity(pos)
    if not arr.sphere:
        return VelocityField(v, False)
    th, ph = sphere_rates(pos, v)
    return VelocityField(v, True, th, ph)


def momentum_so2(system: VortexSystem) -> float:
    """J = sum l rho^2 / 2 (plane) or sum l cos(theta) (sphere)."""
    pos, lam = system.positions, system.lam
    if system.model.is_sphere:
        return float(np.sum(lam * pos[:, 2]))
    return float(0.5 * np.sum(lam * np.einsum("ij,ij->i", pos, pos)))


def background_momentum(omega: float) -> float:
    """z-moment of the frozen 2*Omega*cos(theta) background over the unit sphere."""
    return 8.0 * math.pi * omega / 3.0


def momentum_sphere(system: VortexSystem) -> NDArray[np.float64]:
    if not system.model.is_sphere:
        raise TypeError("momentum_sphere needs a sphere model")
    m = system.lam @ system.positions
    if system.model.is_rotating:
        m[2] += background_momentum(system.model.omega)
    return m


def background_potential(theta: float, omega: float) -> tuple[float, float]:
    """Frozen-background stream function and its theta-derivative.

    Value is ``omega cos(theta)`` (zero on the equator); the phi-derivative vanishes.
    """
    return omega * math.cos(theta), -omega * math.sin(theta)


def energy_momentum(system: VortexSystem) -> EnergyMomentum:
    m = momentum_sphere(system) if system.model.is_sphere else None
    return EnergyMomentum(hamiltonian(system), momentum_so2(system), m)

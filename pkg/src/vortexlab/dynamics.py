"""Trajectory integration, rigid-rotation fits and identity checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Union

import numpy as np
from numpy.typing import NDArray

from . import _jit
from .core import Family, ModelParams, RingConfig, VortexSystem
from .models import (
    CollisionError,
    EnergyMomentum,
    ModelArrays,
    _min_distance_nb,
    _min_distance_np,
    _velocity_nb,
    _velocity_np,
    background_momentum,
)

COLLISION_DISTANCE = 1e-8
CERTIFY_TOL = 1e-7
DEFAULT_TOL = 1e-11
MAX_STEPS = 50_000_000

Method = Literal["rk4", "rk45"]

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40


def _renorm(y):
    for i in range(y.shape[0]):
        s = math.sqrt(y[i, 0] ** 2 + y[i, 1] ** 2 + y[i, 2] ** 2)
        for k in range(3):
            y[i, k] /= s


def _make_integrators(vel, mindist, compile_):
    if compile_:
        from numba import njit as nb_njit

        renorm = nb_njit(_renorm)
    else:
        renorm = _renorm

    def dopri(code, y0, lam, omega, kappa, ts, tol, sphere, coll, h0):
        n, d = y0.shape
        out = np.empty((ts.shape[0], n, d))
        y = y0.copy()
        out[0] = y
        k1 = np.empty_like(y)
        k2 = np.empty_like(y)
        k3 = np.empty_like(y)
        k4 = np.empty_like(y)
        k5 = np.empty_like(y)
        k6 = np.empty_like(y)
        k7 = np.empty_like(y)
        vel(code, y, lam, omega, kappa, k1)
        t = ts[0]
        h = h0
        steps = 0
        for s in range(1, ts.shape[0]):
            t_next = ts[s]
            while t < t_next:
                if steps >= MAX_STEPS:
                    return out, 2, t, -1, -1, steps
                hs = min(h, t_next - t)
                clipped = hs < h
                vel(code, y + hs * (_A21 * k1), lam, omega, kappa, k2)
                vel(code, y + hs * (_A31 * k1 + _A32 * k2), lam, omega, kappa, k3)
                vel(code, y + hs * (_A41 * k1 + _A42 * k2 + _A43 * k3), lam, omega, kappa, k4)
                vel(code, y + hs * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4), lam, omega, kappa, k5)
                vel(code, y + hs * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5),
                    lam, omega, kappa, k6)
                ynew = y + hs * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
                vel(code, ynew, lam, omega, kappa, k7)
                err = np.max(np.abs(hs * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)))
                steps += 1
                # error per unit time
                ratio = err / (tol * hs)
                if ratio <= 1.0:
                    t = t_next if clipped else t + hs
                    y = ynew
                    if sphere:
                        renorm(y)
                        vel(code, y, lam, omega, kappa, k1)
                    else:
                        k1[:] = k7
                    dmin, ci, cj = mindist(y)
                    if dmin < coll:
                        out[s] = y
                        return out[: s + 1], 1, t, ci, cj, steps
                    fac = 5.0 if ratio == 0.0 else min(5.0, 0.9 * ratio ** -0.25)
                    hn = hs * fac
                    h = max(h, hn) if clipped else hn
                else:
                    h = hs * max(0.1, 0.9 * ratio ** -0.25)
                    if h < 1e-14 * max(1.0, abs(t)):
                        # a smooth field never forces this; only a collapse does
                        dmin, ci, cj = mindist(y)
                        out[s] = y
                        return out[: s + 1], 1, t, ci, cj, steps
            out[s] = y
        return out, 0, t, -1, -1, steps

    def rk4(code, y0, lam, omega, kappa, ts, sphere, coll):
        n, d = y0.shape
        out = np.empty((ts.shape[0], n, d))
        y = y0.copy()
        out[0] = y
        k1 = np.empty_like(y)
        k2 = np.empty_like(y)
        k3 = np.empty_like(y)
        k4 = np.empty_like(y)
        for s in range(1, ts.shape[0]):
            h = ts[s] - ts[s - 1]
            vel(code, y, lam, omega, kappa, k1)
            vel(code, y + 0.5 * h * k1, lam, omega, kappa, k2)
            vel(code, y + 0.5 * h * k2, lam, omega, kappa, k3)
            vel(code, y + h * k3, lam, omega, kappa, k4)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if sphere:
                renorm(y)
            dmin, ci, cj = mindist(y)
            out[s] = y
            if dmin < coll:
                return out[: s + 1], 1, ts[s], ci, cj, s
        return out, 0, ts[-1], -1, -1, ts.shape[0] - 1

    if compile_:
        return nb_njit(dopri), nb_njit(rk4)
    return dopri, rk4


_INTEGRATORS: dict[bool, tuple] = {}


def _integrators(use_jit: Optional[bool] = None):
    use_jit = _jit.JIT_ENABLED if use_jit is None else (use_jit and _jit.HAVE_NUMBA)
    if use_jit not in _INTEGRATORS:
        if use_jit:
            _INTEGRATORS[True] = _make_integrators(_velocity_nb, _min_distance_nb, True)
        else:
            _INTEGRATORS[False] = _make_integrators(_velocity_np, _min_distance_np, False)
    return _INTEGRATORS[use_jit]


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution; ``positions`` has shape (samples, n, 2|3)."""

    times: NDArray[np.float64]
    positions: NDArray[np.float64]
    model: ModelParams
    strengths: tuple[float, ...]
    steps: int = 0
    _diag: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.times) != len(self.positions):
            raise ValueError("times and positions differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def states(self) -> list[VortexSystem]:
        return [VortexSystem.from_positions(self.model, p, self.strengths) for p in self.positions]

    def state(self, k: int) -> VortexSystem:
        return VortexSystem.from_positions(self.model, self.positions[k], self.strengths)

    @property
    def energies(self) -> NDArray[np.float64]:
        if "h" not in self._diag:
            arr = ModelArrays.from_params(self.model, np.array(self.strengths))
            self._diag["h"] = np.array([arr.energy(p) for p in self.positions])
        return self._diag["h"]

    @property
    def momenta(self) -> NDArray[np.float64]:
        """SO(2) momentum J per sample."""
        lam = np.array(self.strengths)
        if self.model.is_sphere:
            return self.positions[:, :, 2] @ lam
        return 0.5 * np.einsum("tij,tij,i->t", self.positions, self.positions, lam)

    @property
    def momentum_vectors(self) -> NDArray[np.float64]:
        if not self.model.is_sphere:
            raise TypeError("momentum vectors exist for sphere models only")
        m = np.einsum("tij,i->tj", self.positions, np.array(self.strengths))
        if self.model.is_rotating:
            m[:, 2] += background_momentum(self.model.omega)
        return m

    @property
    def diagnostics(self) -> list[EnergyMomentum]:
        mv = self.momentum_vectors if self.model.is_sphere else [None] * len(self)
        return [EnergyMomentum(float(h), float(j), m) for h, j, m in zip(self.energies, self.momenta, mv)]

    def longitudes(self, frame: str = "inertial") -> NDArray[np.float64]:
        phi = np.arctan2(self.positions[:, :, 1], self.positions[:, :, 0])
        if frame == "rotating":
            phi = phi - self.model.omega * self.times[:, None]
        elif frame != "inertial":
            raise ValueError(f"unknown frame {frame!r}")
        return np.mod(phi, 2 * math.pi)

    def table(self, frame: str = "inertial") -> tuple[list[str], NDArray[np.float64]]:
        """Columns ``t, theta_i, phi_i, ..., H, J`` (sphere) or ``t, x_i, y_i, ..., H, J``."""
        n = self.positions.shape[1]
        cols = ["t"]
        if self.model.is_sphere:
            theta = np.arccos(np.clip(self.positions[:, :, 2], -1.0, 1.0))
            phi = self.longitudes(frame)
            data = [theta, phi]
            names = ("theta", "phi")
        else:
            xy = self.positions
            if frame == "rotating":
                c, s = np.cos(-self.model.omega * self.times), np.sin(-self.model.omega * self.times)
                x = c[:, None] * xy[:, :, 0] - s[:, None] * xy[:, :, 1]
                y = s[:, None] * xy[:, :, 0] + c[:, None] * xy[:, :, 1]
            elif frame == "inertial":
                x, y = xy[:, :, 0], xy[:, :, 1]
            else:
                raise ValueError(f"unknown frame {frame!r}")
            data = [x, y]
            names = ("x", "y")
        body = np.empty((len(self), 2 * n))
        for i in range(n):
            cols += [f"{names[0]}_{i + 1}", f"{names[1]}_{i + 1}"]
            body[:, 2 * i] = data[0][:, i]
            body[:, 2 * i + 1] = data[1][:, i]
        cols += ["H", "J"]
        full = np.column_stack([self.times, body, self.energies, self.momenta])
        return cols, full


def integrate(
    system: VortexSystem,
    t_end: float,
    dt: float,
    method: Method = "rk45",
    *,
    tol: float = DEFAULT_TOL,
    use_jit: Optional[bool] = None,
) -> Trajectory:
    """Integrate and sample at multiples of ``dt`` up to ``t_end``.

    ``rk45`` is adaptive Dormand-Prince with the local error estimate held
    below ``tol`` per unit time; ``rk4`` takes one classical step per sample.

    Raises
    ------
    CollisionError
        When two vortices come within 1e-8, or the adaptive step underflows
        during a collapse; carries the closest pair and the time.
    """
    if not dt > 0 or not t_end > 0:
        raise ValueError("dt and t_end must be positive")
    k = int(round(t_end / dt))
    if abs(k * dt - t_end) > 1e-9 * max(1.0, t_end):
        k = int(math.floor(t_end / dt))
    ts = np.arange(k + 1) * dt
    if ts[-1] < t_end - 1e-12 * max(1.0, t_end):
        ts = np.append(ts, t_end)
    arr = ModelArrays.of(system)
    y0 = np.ascontiguousarray(system.positions)
    dopri, rk4 = _integrators(use_jit)
    if method == "rk45":
        h0 = min(dt, 1e-3)
        out, status, t_stop, ci, cj, steps = dopri(
            arr.code, y0, arr.lam, arr.omega, arr.kappa, ts, tol, arr.sphere, COLLISION_DISTANCE, h0
        )
    elif method == "rk4":
        out, status, t_stop, ci, cj, steps = rk4(
            arr.code, y0, arr.lam, arr.omega, arr.kappa, ts, arr.sphere, COLLISION_DISTANCE
        )
    else:
        raise ValueError(f"unknown method {method!r}")
    if status == 1:
        d = float(np.linalg.norm(out[-1][ci] - out[-1][cj]))
        raise CollisionError(int(ci), int(cj), d, float(t_stop))
    if status == 2:
        raise RuntimeError(f"step budget exhausted at t={t_stop:.6g}")
    return Trajectory(ts[: len(out)], out, system.model, system.strengths, int(steps))


# ------------------------------------------------------------ rigid rotation


@dataclass(frozen=True)
class RigidRotationFit:
    xi: float
    shape_residual: float
    xi_residual: float
    diameter: float

    @property
    def certified(self) -> bool:
        return self.shape_residual < CERTIFY_TOL * self.diameter and self.xi_residual < CERTIFY_TOL


def _pair_distances(pos: NDArray[np.float64]) -> NDArray[np.float64]:
    i, j = np.triu_indices(pos.shape[-2], 1)
    return np.linalg.norm(pos[..., i, :] - pos[..., j, :], axis=-1)


def fit_rigid_rotation(traj: Trajectory) -> RigidRotationFit:
    """Fit a rigid rotation about the z axis to a trajectory.

    The common longitude is the Procrustes angle aligning each sample with the
    first; ``xi`` is its least-squares slope in time.
    """
    if len(traj) < 10:
        raise ValueError("need at least 10 samples to fit a rotation")
    p0 = traj.positions[0]
    p = traj.positions
    cross = np.sum(p0[:, 0] * p[:, :, 1] - p0[:, 1] * p[:, :, 0], axis=1)
    dot = np.sum(p0[:, 0] * p[:, :, 0] + p0[:, 1] * p[:, :, 1], axis=1)
    alpha = np.arctan2(cross, dot)
    steps = np.diff(alpha)
    steps = (steps + math.pi) % (2 * math.pi) - math.pi
    if np.any(np.abs(steps) > 1.0):
        raise ValueError("sampling too coarse to unwrap the rotation angle (|dphi| >= 1 per sample)")
    angle = np.concatenate([[alpha[0]], alpha[0] + np.cumsum(steps)])
    t = traj.times
    tm = t - t.mean()
    xi = float(np.dot(tm, angle - angle.mean()) / np.dot(tm, tm))
    fit = angle.mean() + xi * tm
    xi_res = float(np.max(np.abs(angle - fit)))
    d0 = _pair_distances(p0)
    if d0.size:
        shape = float(np.max(np.abs(_pair_distances(p) - d0)))
        diameter = float(d0.max())
    else:
        shape, diameter = 0.0, 1.0
    return RigidRotationFit(xi, shape, xi_res, diameter)


# ----------------------------------------------------------------- persistence


@dataclass(frozen=True)
class PersistenceReport:
    config: RingConfig
    omega: float
    fit0: RigidRotationFit
    fit: RigidRotationFit
    tolerance: float = 1e-6

    @property
    def xi0(self) -> float:
        return self.fit0.xi

    @property
    def xi(self) -> float:
        return self.fit.xi

    @property
    def delta(self) -> float:
        return self.fit.xi - self.fit0.xi

    @property
    def certified(self) -> bool:
        return self.fit0.certified and self.fit.certified

    @property
    def passed(self) -> bool:
        return self.certified and abs(self.delta - self.omega) < self.tolerance

    def as_dict(self) -> dict:
        return {
            "family": self.config.family.value,
            "n": self.config.n,
            "omega": self.omega,
            "xi0": self.xi0,
            "xi": self.xi,
            "delta_xi": self.delta,
            "shape_residual": max(self.fit0.shape_residual, self.fit.shape_residual),
            "xi_residual": max(self.fit0.xi_residual, self.fit.xi_residual),
            "passed": self.passed,
        }


def _sample_step(system: VortexSystem, t_end: float) -> float:
    v = ModelArrays.of(system).velocity(system.positions)
    pos = system.positions
    rho = np.hypot(pos[:, 0], pos[:, 1])
    mask = rho > 1e-6
    rate = float(np.max(np.abs(pos[mask, 0] * v[mask, 1] - pos[mask, 1] * v[mask, 0]) / rho[mask] ** 2)) if mask.any() else 0.0
    rate += abs(system.model.omega)
    dt = 0.05 if rate == 0.0 else min(0.05, 0.25 / rate)
    return t_end / math.ceil(t_end / dt)


def verify_persistence(
    config: RingConfig, omega: float, *, t_end: float = 50.0, tol: float = 1e-12
) -> PersistenceReport:
    """Integrate a ring configuration with and without frame rotation and compare rates."""
    base = config.build()
    if base.model.is_sphere:
        rotating = ModelParams.rotating_sphere(omega)
    else:
        if abs(base.total_vorticity) == 0.0:
            raise ValueError("planar persistence needs nonzero total vorticity")
        if np.linalg.norm(base.lam @ base.positions) > 1e-12:
            raise ValueError("planar persistence needs the centre of vorticity at the origin")
        rotating = ModelParams.rotating_plane(omega)
    sys_rot = base.with_model(rotating)
    dt = min(_sample_step(base, t_end), _sample_step(sys_rot, t_end))
    fit0 = fit_rigid_rotation(integrate(base, t_end, dt, "rk45", tol=tol))
    fit1 = fit_rigid_rotation(integrate(sys_rot, t_end, dt, "rk45", tol=tol))
    return PersistenceReport(config, float(omega), fit0, fit1)


PERSISTENCE_INSTANCES: tuple[RingConfig, ...] = (
    RingConfig(Family.CNvR, 4, math.pi / 6),
    RingConfig(Family.CNvRp, 4, math.pi / 6, lambda_p=0.5),
    RingConfig(Family.DNh2R, 4, math.pi / 6),
    RingConfig(Family.DNdRRp, 4, 0.3),
    # the bare equatorial (+-)ring with n = 3 is linearly unstable; a strong polar pair stabilizes it
    RingConfig(Family.D2NhRe, 3, math.pi / 2, lambda_p=8.0, k_p=2),
)


# ----------------------------------------------------------------- identities


def appendix_a_sum(
    ring: Union[RingConfig, int], theta: float, phi: float, *,
    theta_k: Optional[float] = None, epsilon: float = 0.0,
) -> float:
    """Sum_j sin(phi - phi_j) / (1 - r cos(phi - phi_j)) for one latitudinal ring.

    ``ring`` is a sphere ``RingConfig`` or a vortex count (then ``theta_k`` is
    required); ``r = sin(theta) sin(theta_k) / (1 - cos(theta) cos(theta_k))``.
    The sum vanishes when ``n (phi - epsilon)`` is a multiple of pi, and not at
    generic longitudes; :func:`appendix_a_closed_form` gives its exact value.
    """
    if isinstance(ring, RingConfig):
        if ring.family.planar:
            raise ValueError("identity concerns sphere rings")
        n, th_k, eps = ring.n, ring.theta0, ring.epsilon
    else:
        if theta_k is None:
            raise ValueError("theta_k is required when ring is a count")
        n, th_k, eps = int(ring), float(theta_k), float(epsilon)
    if n < 1:
        raise ValueError("ring needs at least one vortex")
    den0 = 1.0 - math.cos(theta) * math.cos(th_k)
    if den0 == 0.0:
        raise ZeroDivisionError("evaluation point coincides with a pole of the ring")
    r = math.sin(theta) * math.sin(th_k) / den0
    terms = []
    for j in range(n):
        a = phi - (eps + 2.0 * math.pi * j / n)
        den = 1.0 - r * math.cos(a)
        if abs(den) < 1e-300 or (abs(theta - th_k) < 1e-15 and abs(math.sin(a / 2)) < 1e-15):
            raise ZeroDivisionError("evaluation point sits on a ring vortex")
        terms.append(math.sin(a) / den)
    return math.fsum(terms)


def _appendix_a_args(ring, theta_k, epsilon):
    if isinstance(ring, RingConfig):
        return ring.n, ring.theta0, ring.epsilon
    if theta_k is None:
        raise ValueError("theta_k is required when ring is a count")
    return int(ring), float(theta_k), float(epsilon)


def appendix_a_closed_form(
    ring: Union[RingConfig, int], theta: float, phi: float, *,
    theta_k: Optional[float] = None, epsilon: float = 0.0,
) -> float:
    """Exact ring sum from its Fourier series.

    With ``r = 2q / (1 + q^2)`` each term is ``(1 + q^2)/q * sum_k q^k sin(k a)``;
    summing over the ring keeps only ``k = m n``, so with ``Q = q^n`` and
    ``psi = n (phi - epsilon)`` the sum is
    ``n (1 + q^2)/q * Q sin(psi) / (1 - 2 Q cos(psi) + Q^2)``.
    """
    n, th_k, eps = _appendix_a_args(ring, theta_k, epsilon)
    den0 = 1.0 - math.cos(theta) * math.cos(th_k)
    if den0 == 0.0:
        raise ZeroDivisionError("evaluation point coincides with a pole of the ring")
    r = math.sin(theta) * math.sin(th_k) / den0
    if r == 0.0:
        return 0.0
    if abs(r) >= 1.0:
        raise ZeroDivisionError("evaluation point lies on the ring latitude")
    q = r / (1.0 + math.sqrt(1.0 - r * r))  # (1 - sqrt(1 - r^2)) / r without cancellation
    big_q = q ** n
    psi = n * (phi - eps)
    return n * (1.0 + q * q) / q * big_q * math.sin(psi) / (1.0 - 2.0 * big_q * math.cos(psi) + big_q * big_q)

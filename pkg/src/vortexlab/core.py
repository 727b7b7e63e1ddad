"""Domain types and builders for point-vortex systems."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from numpy.typing import NDArray

TWO_PI = 2.0 * math.pi
DISTINCT_TOL = 1e-10
POLAR_TOL = 1e-13
SYMMETRY_TOL = 1e-12


class Model(str, Enum):
    PLANAR = "plane"
    ROTATING_PLANE = "plane-rotating"
    GEOSTROPHIC = "geostrophic"
    SPHERE = "sphere"
    ROTATING_SPHERE = "sphere-rotating"

    @property
    def code(self) -> int:
        return _MODEL_CODES[self]


_MODEL_CODES = {
    Model.PLANAR: 0,
    Model.ROTATING_PLANE: 1,
    Model.GEOSTROPHIC: 2,
    Model.SPHERE: 3,
    Model.ROTATING_SPHERE: 4,
}


@dataclass(frozen=True, slots=True)
class ModelParams:
    """Model tag with rotation rate ``omega`` and inverse deformation length ``kappa``."""

    model: Model
    omega: float = 0.0
    kappa: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "omega", float(self.omega))
        object.__setattr__(self, "kappa", float(self.kappa))
        if not (math.isfinite(self.omega) and math.isfinite(self.kappa)):
            raise ValueError("omega and kappa must be finite")
        if self.kappa < 0.0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.kappa != 0.0 and self.model is not Model.GEOSTROPHIC:
            raise ValueError("kappa is only meaningful for the geostrophic model")
        if self.omega != 0.0 and not self.is_rotating:
            raise ValueError(f"omega must be 0 for model {self.model.value!r}")

    @classmethod
    def planar(cls) -> "ModelParams":
        return cls(Model.PLANAR)

    @classmethod
    def rotating_plane(cls, omega: float) -> "ModelParams":
        return cls(Model.ROTATING_PLANE, omega=omega)

    @classmethod
    def geostrophic(cls, kappa: float) -> "ModelParams":
        return cls(Model.GEOSTROPHIC, kappa=kappa)

    @classmethod
    def sphere(cls) -> "ModelParams":
        return cls(Model.SPHERE)

    @classmethod
    def rotating_sphere(cls, omega: float) -> "ModelParams":
        return cls(Model.ROTATING_SPHERE, omega=omega)

    @property
    def is_sphere(self) -> bool:
        return self.model in (Model.SPHERE, Model.ROTATING_SPHERE)

    @property
    def is_rotating(self) -> bool:
        return self.model in (Model.ROTATING_PLANE, Model.ROTATING_SPHERE)

    @property
    def dim(self) -> int:
        return 3 if self.is_sphere else 2

    @property
    def label(self) -> str:
        if self.model is Model.ROTATING_SPHERE:
            return "sphere-rotating-frozen"
        return self.model.value

    def without_rotation(self) -> "ModelParams":
        if self.model is Model.ROTATING_PLANE:
            return ModelParams.planar()
        if self.model is Model.ROTATING_SPHERE:
            return ModelParams.sphere()
        return self

    def with_omega(self, omega: float) -> "ModelParams":
        """Rotating counterpart of this model with rate ``omega``."""
        if self.model is Model.GEOSTROPHIC:
            raise ValueError("the geostrophic model has no rotating variant")
        if self.is_sphere:
            return ModelParams.rotating_sphere(omega)
        return ModelParams.rotating_plane(omega)


@dataclass(frozen=True, slots=True)
class Vorticity:
    value: float

    def __post_init__(self) -> None:
        v = float(self.value)
        if not math.isfinite(v) or v == 0.0:
            raise ValueError(f"vortex strength must be finite and nonzero, got {self.value!r}")
        object.__setattr__(self, "value", v)

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True, slots=True)
class SpherePoint:
    """Point on the unit sphere. At the poles ``phi`` is gauged to 0."""

    theta: float
    phi: float = 0.0
    gauge: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        th, ph = float(self.theta), float(self.phi)
        if not (math.isfinite(th) and math.isfinite(ph)):
            raise ValueError("angles must be finite")
        if th < 0.0 or th > math.pi:
            raise ValueError(f"colatitude must lie in [0, pi], got {th}")
        polar = th == 0.0 or th == math.pi
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "phi", 0.0 if polar else ph % TWO_PI)
        object.__setattr__(self, "gauge", polar)

    @property
    def cartesian(self) -> NDArray[np.float64]:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])

    @classmethod
    def from_cartesian(cls, v: Sequence[float]) -> "SpherePoint":
        x, y, z = (float(c) for c in v)
        r = math.sqrt(x * x + y * y + z * z)
        if r == 0.0:
            raise ValueError("zero vector has no direction")
        x, y, z = x / r, y / r, z / r
        rho = math.hypot(x, y)
        theta = math.atan2(rho, z)
        if rho == 0.0:
            theta = 0.0 if z > 0 else math.pi
        return cls(theta, math.atan2(y, x))


@dataclass(frozen=True, slots=True)
class PlanePoint:
    """Point in the plane; cartesian view is authoritative."""

    x: float
    y: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("coordinates must be finite")

    @classmethod
    def from_polar(cls, rho: float, phi: float) -> "PlanePoint":
        if rho < 0:
            raise ValueError("rho must be >= 0")
        return cls(rho * math.cos(phi), rho * math.sin(phi))

    @property
    def rho(self) -> float:
        return math.hypot(self.x, self.y)

    @property
    def polar_defined(self) -> bool:
        return self.rho >= POLAR_TOL

    @property
    def phi(self) -> float:
        if not self.polar_defined:
            return math.nan
        return math.atan2(self.y, self.x) % TWO_PI

    @property
    def cartesian(self) -> NDArray[np.float64]:
        return np.array([self.x, self.y])


Point = Union[SpherePoint, PlanePoint]


def _min_pair_distance(pos: NDArray[np.float64]) -> tuple[float, int, int]:
    n = len(pos)
    best, bi, bj = math.inf, -1, -1
    for i in range(n - 1):
        d = np.linalg.norm(pos[i + 1 :] - pos[i], axis=1)
        k = int(np.argmin(d))
        if d[k] < best:
            best, bi, bj = float(d[k]), i, i + 1 + k
    return best, bi, bj


@dataclass(frozen=True, slots=True)
class VortexSystem:
    """Immutable collection of point vortices in a given model."""

    model: ModelParams
    points: tuple[Point, ...]
    strengths: tuple[float, ...]

    def __post_init__(self) -> None:
        pts = tuple(self.points)
        lam = tuple(float(Vorticity(float(s))) for s in self.strengths)
        if len(pts) != len(lam):
            raise ValueError(f"{len(pts)} points but {len(lam)} strengths")
        if not pts:
            raise ValueError("a vortex system needs at least one vortex")
        want = SpherePoint if self.model.is_sphere else PlanePoint
        for p in pts:
            if not isinstance(p, want):
                raise TypeError(f"model {self.model.label} needs {want.__name__} entries")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "strengths", lam)
        if len(pts) > 1:
            d, i, j = _min_pair_distance(self.positions)
            if d <= DISTINCT_TOL:
                raise ValueError(f"vortices {i} and {j} coincide (distance {d:.3e})")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def positions(self) -> NDArray[np.float64]:
        """Cartesian positions, shape (n, 2) or (n, 3)."""
        return np.array([p.cartesian for p in self.points])

    @property
    def lam(self) -> NDArray[np.float64]:
        return np.array(self.strengths)

    @property
    def total_vorticity(self) -> float:
        return math.fsum(self.strengths)

    @classmethod
    def from_positions(
        cls, model: ModelParams, positions: NDArray[np.float64], strengths: Iterable[float]
    ) -> "VortexSystem":
        pos = np.asarray(positions, dtype=float)
        if model.is_sphere:
            pts: tuple[Point, ...] = tuple(SpherePoint.from_cartesian(p) for p in pos)
        else:
            pts = tuple(PlanePoint(p[0], p[1]) for p in pos)
        return cls(model, pts, tuple(strengths))

    def with_model(self, model: ModelParams) -> "VortexSystem":
        return VortexSystem(model, self.points, self.strengths)

    def rotated(self, angle: float) -> "VortexSystem":
        """Rotate about the z axis (origin in the plane) by ``angle``."""
        return VortexSystem.from_positions(self.model, rotate_z(self.positions, angle), self.strengths)


def rotate_z(pos: NDArray[np.float64], angle: float) -> NDArray[np.float64]:
    c, s = math.cos(angle), math.sin(angle)
    out = np.array(pos, dtype=float, copy=True)
    out[:, 0] = c * pos[:, 0] - s * pos[:, 1]
    out[:, 1] = s * pos[:, 0] + c * pos[:, 1]
    return out


def same_configuration(a: VortexSystem, b: VortexSystem, tol: float = SYMMETRY_TOL) -> bool:
    """Set equality of (position, strength) pairs within ``tol``."""
    if a.n != b.n:
        return False
    pa, pb, la, lb = a.positions, b.positions, a.lam, b.lam
    used = np.zeros(b.n, dtype=bool)
    for i in range(a.n):
        d = np.linalg.norm(pb - pa[i], axis=1) + np.abs(lb - la[i])
        d[used] = np.inf
        k = int(np.argmin(d))
        if d[k] > tol:
            return False
        used[k] = True
    return True


class Family(str, Enum):
    CNR = "CNR"
    CNRp = "CNRp"
    CNvR = "CNvR"
    CNvRp = "CNvRp"
    DNh2R = "DNh2R"
    DNdRRp = "DNdRRp"
    D2NhRe = "D2NhRe"

    @property
    def planar(self) -> bool:
        return self in (Family.CNR, Family.CNRp)

    @property
    def single_ring(self) -> bool:
        return self in (Family.CNR, Family.CNRp, Family.CNvR, Family.CNvRp)


@dataclass(frozen=True, slots=True)
class RingConfig:
    """Symbolic description of a named ring arrangement.

    ``size`` is the radius R for planar families and the colatitude theta0 otherwise.
    ``lambda_p`` is the central (planar) or polar strength; ``theta1`` the second
    colatitude for staggered double rings; ``k_p`` the number of polar vortices for
    double-ring families.
    """

    family: Family
    n: int
    size: float = 1.0
    epsilon: float = 0.0
    lambda_p: Optional[float] = None
    theta1: Optional[float] = None
    k_p: int = 0

    def __post_init__(self) -> None:
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        size = float(self.size)
        if fam.planar:
            if not size > 0:
                raise ValueError(f"ring radius must be positive, got {size}")
        elif fam is not Family.D2NhRe and not 0.0 < size < math.pi:
            raise ValueError(f"colatitude must lie in (0, pi), got {size}")
        object.__setattr__(self, "size", size)
        has_p = fam in (Family.CNRp, Family.CNvRp)
        if has_p and self.lambda_p is None:
            raise ValueError(f"family {fam.value} needs lambda_p")
        if fam in (Family.CNR, Family.CNvR) and self.lambda_p is not None:
            raise ValueError(f"family {fam.value} has no central/polar vortex")
        if fam.single_ring and self.k_p:
            raise ValueError("k_p applies to double-ring families only")
        if self.k_p not in (0, 2):
            raise ValueError("k_p must be 0 or 2 (polar pair keeps the dihedral symmetry)")
        if self.lambda_p is not None and float(self.lambda_p) == 0.0:
            raise ValueError("zero-strength vortex rejected")

    @property
    def radius(self) -> float:
        return self.size

    @property
    def theta0(self) -> float:
        return math.pi / 2 if self.family is Family.D2NhRe else self.size

    @property
    def has_center(self) -> bool:
        return self.family in (Family.CNRp, Family.CNvRp)

    def build(self, model: Optional[ModelParams] = None) -> VortexSystem:
        """Build the system, optionally in a different model of the same geometry."""
        fam = self.family
        if fam.planar:
            sys_ = build_planar_ring(self.n, self.size, self.lambda_p, epsilon=self.epsilon)
        elif fam.single_ring:
            sys_ = build_sphere_ring(self.n, self.size, self.lambda_p, 0.0, epsilon=self.epsilon)
        else:
            sys_ = build_double_ring(
                fam, self.n, None if fam is Family.D2NhRe else self.size, self.theta1,
                self.k_p, lambda_p=1.0 if self.lambda_p is None else self.lambda_p,
            )
        if model is not None:
            if model.is_sphere != sys_.model.is_sphere:
                raise ValueError(f"family {fam.value} cannot live in model {model.label}")
            sys_ = sys_.with_model(model)
        return sys_


def _check_symmetric(system: VortexSystem, angle: float) -> VortexSystem:
    if not same_configuration(system, system.rotated(angle)):
        raise RuntimeError("built configuration lacks its generating symmetry")
    return system


def build_planar_ring(
    n: int, R: float, lambda_center: Optional[float] = None, *,
    model: Optional[ModelParams] = None, epsilon: float = 0.0,
) -> VortexSystem:
    """Regular n-gon of unit vortices at radius R, optional central vortex."""
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n}")
    if not R > 0:
        raise ValueError(f"R must be positive, got {R}")
    n = int(n)
    pts = [PlanePoint.from_polar(R, TWO_PI * j / n + epsilon) for j in range(1, n + 1)]
    lam = [1.0] * n
    if lambda_center is not None:
        pts.append(PlanePoint(0.0, 0.0))
        lam.append(float(Vorticity(lambda_center)))
    model = ModelParams.planar() if model is None else model
    if model.is_sphere:
        raise ValueError("planar ring needs a plane model")
    return _check_symmetric(VortexSystem(model, tuple(pts), tuple(lam)), TWO_PI / n)


def build_sphere_ring(
    n: int, theta0: float, lambda_pole: Optional[float] = None, omega: float = 0.0, *,
    epsilon: float = 0.0,
) -> VortexSystem:
    """Latitudinal n-ring of unit vortices, optional north-pole vortex."""
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n}")
    if not 0.0 < theta0 < math.pi:
        raise ValueError(f"ring colatitude must lie in (0, pi), got {theta0}")
    n = int(n)
    pts = [SpherePoint(theta0, TWO_PI * j / n + epsilon) for j in range(n)]
    lam = [1.0] * n
    if lambda_pole is not None:
        pts.append(SpherePoint(0.0, 0.0))
        lam.append(float(Vorticity(lambda_pole)))
    model = ModelParams.sphere() if omega == 0.0 else ModelParams.rotating_sphere(omega)
    return _check_symmetric(VortexSystem(model, tuple(pts), tuple(lam)), TWO_PI / n)


def build_double_ring(
    family: Union[Family, str], n: int, theta0: Optional[float] = None,
    theta1: Optional[float] = None, k_p: int = 0, *, lambda_p: float = 1.0, omega: float = 0.0,
) -> VortexSystem:
    """Opposite-vorticity ring families on the sphere.

    The first ring carries +1 and the second ring -1 (alternating signs on the
    equator for D2NhRe), so that reflection through the equatorial plane combined
    with a sign flip is a symmetry and both rings co-rotate.  ``k_p = 2`` adds
    ``+lambda_p`` at the north pole and ``-lambda_p`` at the south pole.
    """
    fam = Family(family)
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n}")
    n = int(n)
    if k_p not in (0, 2):
        raise ValueError("k_p must be 0 or 2")
    pts: list[SpherePoint] = []
    lam: list[float] = []
    if fam is Family.DNh2R:
        if theta0 is None or not 0.0 < theta0 < math.pi or abs(theta0 - math.pi / 2) < 1e-9:
            raise ValueError("DNh2R needs theta0 in (0, pi) off the equator")
        if theta1 is not None:
            raise ValueError("DNh2R mirrors theta0; theta1 is not accepted")
        for th in (theta0, math.pi - theta0):
            pts += [SpherePoint(th, TWO_PI * j / n) for j in range(n)]
        lam = [1.0] * n + [-1.0] * n
    elif fam is Family.DNdRRp:
        if theta0 is None or not 0.0 < theta0 < math.pi:
            raise ValueError("DNdRRp needs theta0 in (0, pi)")
        th1 = math.pi - theta0 if theta1 is None else float(theta1)
        if not 0.0 < th1 < math.pi:
            raise ValueError("theta1 must lie in (0, pi)")
        pts += [SpherePoint(theta0, TWO_PI * j / n) for j in range(n)]
        pts += [SpherePoint(th1, TWO_PI * j / n + math.pi / n) for j in range(n)]
        lam = [1.0] * n + [-1.0] * n
    elif fam is Family.D2NhRe:
        if theta0 is not None and abs(theta0 - math.pi / 2) > 1e-12:
            raise ValueError("D2NhRe lives on the equator")
        if theta1 is not None:
            raise ValueError("D2NhRe takes no second colatitude")
        pts = [SpherePoint(math.pi / 2, math.pi * j / n) for j in range(2 * n)]
        lam = [1.0 if j % 2 == 0 else -1.0 for j in range(2 * n)]
    else:
        raise ValueError(f"{fam.value} is not a double-ring family")
    if k_p == 2:
        pts += [SpherePoint(0.0), SpherePoint(math.pi)]
        lp = float(Vorticity(lambda_p))
        lam += [lp, -lp]
    model = ModelParams.sphere() if omega == 0.0 else ModelParams.rotating_sphere(omega)
    return _check_symmetric(VortexSystem(model, tuple(pts), tuple(lam)), TWO_PI / n)

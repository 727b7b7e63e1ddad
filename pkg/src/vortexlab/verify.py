"""Runnable identity checks; each suite returns a :class:`SuiteResult`."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import ModelParams, VortexSystem
from .dynamics import (
    PERSISTENCE_INSTANCES,
    appendix_a_closed_form,
    appendix_a_sum,
    integrate,
    verify_persistence,
)
from .models import CollisionError
from .specfun import bessel_k0, bessel_k1, seam_residual
from .stability import trig_sum

SUITES = ("specfun", "appendix-a", "persistence", "trig", "conservation")


@dataclass
class SuiteResult:
    suite: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    table: Optional[tuple[list[str], list[list[float]]]] = None

    def as_dict(self) -> dict:
        out = {"suite": self.suite, "passed": self.passed, "metrics": self.metrics,
               "failures": self.failures}
        if self.table is not None:
            out["table"] = {"columns": self.table[0], "rows": self.table[1]}
        return out


# ------------------------------------------------------------------ specfun


def bessel_k_quadrature(nu: int, x: float, h: float = 0.02) -> float:
    """K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt by the trapezoid rule.

    The integrand is analytic and decays doubly exponentially, so the rule
    converges geometrically in 1/h; it shares no code with the library branches.
    """
    if not x > 0:
        raise ValueError("x must be positive")
    t_max = math.acosh(max(1.0, 760.0 / x))
    m = int(t_max / h) + 2
    s = math.fsum(math.exp(-x * math.cosh(k * h)) * math.cosh(nu * k * h) for k in range(1, m))
    return h * (0.5 * math.exp(-x) + s)


def run_specfun(points: int = 200, lo: float = 1e-6, hi: float = 30.0) -> SuiteResult:
    xs = np.geomspace(lo, hi, points)
    err0 = err1 = dres = 0.0
    rows = []
    seam = max(seam_residual())
    for x in xs:
        k0, k1 = bessel_k0(x), bessel_k1(x)
        rows.append([float(x), k0, k1, seam])
        err0 = max(err0, abs(k0 - bessel_k_quadrature(0, x)) / bessel_k_quadrature(0, x))
        err1 = max(err1, abs(k1 - bessel_k_quadrature(1, x)) / bessel_k_quadrature(1, x))
        step = 1e-3 * x
        deriv = (8.0 * (bessel_k0(x + step) - bessel_k0(x - step))
                 - (bessel_k0(x + 2 * step) - bessel_k0(x - 2 * step))) / (12.0 * step)
        dres = max(dres, float(abs(deriv + k1) / k1))
    metrics = {"k0_max_rel_err": err0, "k1_max_rel_err": err1, "derivative_residual": dres,
               "seam_residual": seam, "points": points}
    failures = [k for k, lim in (("k0_max_rel_err", 1e-9), ("k1_max_rel_err", 1e-9),
                                 ("derivative_residual", 1e-6), ("seam_residual", 1e-12))
                if not metrics[k] < lim]
    return SuiteResult("specfun", not failures, metrics, failures,
                       (["x", "k0", "k1", "seam_residual"], rows))


# ------------------------------------------------------------ ring sum identity


def run_appendix_a(samples: int = 100, seed: int = 0, gap: float = 0.1,
                   points: str = "generic") -> SuiteResult:
    """Random (ring, point) pairs, the point kept ``gap`` away from the ring latitude.

    ``points="generic"`` draws the longitude uniformly and asserts |B| < 1e-12;
    ``"lattice"`` restricts it to ``epsilon + pi m / n``.  Both modes also
    report agreement of the direct sum with its Fourier closed form.
    """
    if points not in ("generic", "lattice"):
        raise ValueError("points must be 'generic' or 'lattice'")
    rng = np.random.default_rng(seed)
    worst = closed_err = 0.0
    worst_at = None
    for _ in range(samples):
        n = int(rng.integers(2, 9))
        theta_k = float(rng.uniform(0.05, math.pi - 0.05))
        while True:
            theta = float(rng.uniform(0.05, math.pi - 0.05))
            if abs(theta - theta_k) >= gap:
                break
        eps = float(rng.uniform(0.0, 2 * math.pi))
        if points == "generic":
            phi = float(rng.uniform(0.0, 2 * math.pi))
        else:
            phi = eps + math.pi * int(rng.integers(0, 2 * n)) / n
        b = appendix_a_sum(n, theta, phi, theta_k=theta_k, epsilon=eps)
        c = appendix_a_closed_form(n, theta, phi, theta_k=theta_k, epsilon=eps)
        closed_err = max(closed_err, abs(b - c) / max(1.0, abs(c)))
        if abs(b) > worst:
            worst, worst_at = abs(b), {"n": n, "theta_k": theta_k, "theta": theta, "phi": phi, "epsilon": eps}
    failures = []
    if not worst < 1e-12:
        failures.append("max_abs_B")
    if not closed_err < 1e-10:
        failures.append("closed_form_mismatch")
    metrics = {"max_abs_B": worst, "closed_form_rel_err": closed_err, "samples": samples,
               "seed": seed, "points": points, "worst_sample": worst_at}
    return SuiteResult("appendix-a", not failures, metrics, failures)


# ------------------------------------------------------------- persistence


def run_persistence(omegas: Sequence[float] = (0.1, 0.3), t_end: float = 50.0,
                    tolerance: float = 1e-6) -> SuiteResult:
    rows, failures = [], []
    for cfg in PERSISTENCE_INSTANCES:
        for om in omegas:
            rep = verify_persistence(cfg, om, t_end=t_end)
            d = rep.as_dict()
            d["passed"] = rep.certified and abs(rep.delta - om) < tolerance
            rows.append(d)
            if not d["passed"]:
                failures.append(f"{cfg.family.value} n={cfg.n} omega={om}")
    return SuiteResult("persistence", not failures, {"cases": rows, "t_end": t_end}, failures)


# -------------------------------------------------------------------- trig


def run_trig(max_n: int = 50) -> SuiteResult:
    worst = 0.0
    for n in range(2, max_n + 1):
        for ell in range(1, n):
            ref = (n * n - 1) / 3.0 - 2.0 * ell * (n - ell)
            worst = max(worst, abs(trig_sum(n, ell) - ref))
    ok = worst < 1e-10
    return SuiteResult("trig", ok, {"max_abs_err": worst, "max_n": max_n}, [] if ok else ["max_abs_err"])


# ------------------------------------------------------------ conservation


CONSERVATION_MODELS: tuple[ModelParams, ...] = (
    ModelParams.planar(),
    ModelParams.rotating_plane(0.5),
    ModelParams.geostrophic(1.0),
    ModelParams.sphere(),
    ModelParams.rotating_sphere(0.5),
)


def random_system(model: ModelParams, n: int, rng: np.random.Generator,
                  min_sep: float = 0.3) -> VortexSystem:
    """Random positions with pairwise separation >= ``min_sep``; strengths in [0.5, 1.5]."""
    d = 3 if model.is_sphere else 2
    pts: list[np.ndarray] = []
    while len(pts) < n:
        if model.is_sphere:
            p = rng.normal(size=3)
            p /= np.linalg.norm(p)
        else:
            p = rng.uniform(-1.0, 1.0, size=d)
        if all(np.linalg.norm(p - q) >= min_sep for q in pts):
            pts.append(p)
    lam = rng.uniform(0.5, 1.5, size=n)
    return VortexSystem.from_positions(model, np.array(pts), tuple(float(v) for v in lam))


def run_conservation(samples: int = 3, seed: int = 0, t_end: float = 100.0,
                     models: Sequence[ModelParams] = CONSERVATION_MODELS,
                     limit: float = 1e-8) -> SuiteResult:
    rng = np.random.default_rng(seed)
    rows, failures = [], []
    for model in models:
        for _ in range(samples):
            sysm = random_system(model, 4, rng)
            try:
                tr = integrate(sysm, t_end, 1.0, "rk45")
            except CollisionError as exc:
                failures.append(f"{model.label}: {exc}")
                continue
            dh = float(np.max(np.abs(tr.energies - tr.energies[0])))
            dj = float(np.max(np.abs(tr.momenta - tr.momenta[0])))
            rows.append({"model": model.label, "h_drift": dh, "j_drift": dj})
            if not (dh < limit and dj < limit):
                failures.append(f"{model.label}: dH={dh:.2e} dJ={dj:.2e}")
    worst = max((max(r["h_drift"], r["j_drift"]) for r in rows), default=float("nan"))
    return SuiteResult("conservation", not failures,
                       {"cases": rows, "max_drift": worst, "seed": seed, "t_end": t_end}, failures)


RUNNERS: dict[str, Callable[..., SuiteResult]] = {
    "specfun": run_specfun,
    "appendix-a": run_appendix_a,
    "persistence": run_persistence,
    "trig": run_trig,
    "conservation": run_conservation,
}


def run_suite(name: str, *, seed: Optional[int] = None, omega: Optional[float] = None,
              points: str = "generic") -> SuiteResult:
    if name not in RUNNERS:
        raise ValueError(f"unknown suite {name!r}; expected one of {SUITES}")
    if name == "appendix-a":
        return run_appendix_a(seed=0 if seed is None else seed, points=points)
    if name == "conservation":
        return RUNNERS[name](seed=0 if seed is None else seed)
    if name == "persistence" and omega is not None:
        return run_persistence((omega,))
    return RUNNERS[name]()

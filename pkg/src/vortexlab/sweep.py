"""Parameter-plane scans and frontier bisection for planar/geostrophic rings.

The ring radius is fixed at R = 1 and the ring strength at 1, so kappa is the
dimensionless group kappa*R.  At fixed R the equilibrium condition is linear
in xi, which :func:`vortexlab.stability.relative_equilibrium` solves exactly.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import Family, ModelParams, RingConfig
from .stability import (
    StabilityVerdict,
    VerdictKind,
    block_hessian,
    classify,
    linearization_blocks,
)

FAMILIES = ("geostrophic-ring", "geostrophic-ring-center", "planar-ring-center")
DEFAULT_KAPPA_STEPS = 201
DEFAULT_LAMBDA_STEPS = 241


class NoFrontierError(ValueError):
    """Both ends of the bracket carry the same verdict."""


@dataclass(frozen=True)
class DiagramCell:
    kappa: float
    lam: float
    verdict: str
    note: str = ""


@dataclass(frozen=True)
class Frontier:
    parameter: str
    bracket: tuple[float, float]
    threshold: float
    verdict_below: str
    verdict_above: str
    tolerance: float


def parse_range(text: str) -> np.ndarray:
    """``start:stop:step`` (inclusive stop) or a single value."""
    parts = [float(p) for p in text.split(":")]
    if len(parts) == 1:
        return np.array(parts)
    if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
        raise ValueError(f"range must be start:stop:step with step > 0, got {text!r}")
    start, stop, step = parts
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def cell_config(family: str, n: int, kappa: float, lam: float) -> tuple[RingConfig, ModelParams]:
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if family == "planar-ring-center":
        model = ModelParams.planar()
    else:
        model = ModelParams.geostrophic(kappa)
    if family == "geostrophic-ring" or lam == 0.0:
        return RingConfig(Family.CNR, n, 1.0), model
    return RingConfig(Family.CNRp, n, 1.0, lambda_p=lam), model


def evaluate(family: str, n: int, kappa: float, lam: float) -> StabilityVerdict:
    cfg, model = cell_config(family, n, kappa, lam)
    sh = block_hessian(cfg, model)
    return classify(sh, linearization_blocks(sh))


def _cell(args: tuple[str, int, float, float]) -> DiagramCell:
    family, n, kappa, lam = args
    try:
        v = evaluate(family, n, kappa, lam)
        return DiagramCell(kappa, lam, v.code, v.note)
    except Exception as exc:  # a failed cell is reported, never dropped
        return DiagramCell(kappa, lam, VerdictKind.DEGENERATE.value, f"error: {exc}")


def worker_count(requested: Optional[int] = None) -> int:
    cap = os.environ.get("VORTEXLAB_THREADS")
    n = requested or os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def sweep_plane(
    family: str,
    n: int,
    kappas: Sequence[float],
    lambdas: Optional[Sequence[float]] = None,
    *,
    workers: Optional[int] = None,
) -> list[DiagramCell]:
    """One verdict per (kappa, lambda) cell, kappa-major order."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if n < 3:
        raise ValueError("planar ring stability needs n >= 3")
    lams = [0.0] if family == "geostrophic-ring" or lambdas is None else [float(x) for x in lambdas]
    ks = [0.0] if family == "planar-ring-center" else [float(k) for k in kappas]
    if any(k < 0 for k in ks):
        raise ValueError("kappa must be >= 0")
    jobs = [(family, n, k, lam) for k in ks for lam in lams]
    nw = min(worker_count(workers), len(jobs))
    if nw <= 1:
        return [_cell(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=nw) as pool:
        return list(pool.map(_cell, jobs, chunksize=max(1, len(jobs) // (4 * nw))))


def _quantity(v: StabilityVerdict, unstable: bool) -> float:
    """Signed scalar whose zero marks the frontier."""
    if unstable:
        re = float(np.max(v.linearization_eigs.real)) if v.linearization_eigs.size else 0.0
        return re - v.tolerance_used
    h = v.hessian_eigs
    return float(h.min() * h.max())


def find_frontier(
    family: str,
    n: int,
    scan_param: str,
    bracket: tuple[float, float],
    fixed: Optional[dict] = None,
    tol: float = 1e-3,
) -> Frontier:
    """Bisection on the classifying scalar between two differing verdicts.

    The scalar is the largest linearization real part for frontiers touching
    ``U`` and the product of extreme Hessian eigenvalues otherwise.
    """
    fixed = dict(fixed or {})
    if scan_param not in ("kappa", "lambda"):
        raise ValueError("scan_param must be 'kappa' or 'lambda'")

    def at(p: float) -> StabilityVerdict:
        kappa = p if scan_param == "kappa" else float(fixed.get("kappa", 0.0))
        lam = p if scan_param == "lambda" else float(fixed.get("lambda", 0.0))
        return evaluate(family, n, kappa, lam)

    lo, hi = float(bracket[0]), float(bracket[1])
    vlo, vhi = at(lo), at(hi)
    if vlo.code == vhi.code:
        raise NoFrontierError(f"verdict {vlo.code} at both ends of [{lo}, {hi}]")
    below, above = vlo.code, vhi.code
    unstable = "U" in (below, above)
    qlo = _quantity(vlo, unstable)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        vm = at(mid)
        if (_quantity(vm, unstable) > 0) == (qlo > 0):
            lo = mid
        else:
            hi = mid
    # end verdicts: points next to the frontier sit inside the degeneracy band
    return Frontier(scan_param, (float(bracket[0]), float(bracket[1])), 0.5 * (lo + hi),
                    below, above, tol)


def cells_to_csv(cells: Iterable[DiagramCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kappa", "lambda", "verdict"])
    for c in cells:
        w.writerow([f"{c.kappa:.10g}", f"{c.lam:.10g}", c.verdict])
    return buf.getvalue()


def write_diagram(
    path: Path, cells: Sequence[DiagramCell], meta: dict
) -> tuple[Path, Path]:
    """Write the CSV and its ``.meta.json`` companion."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(cells_to_csv(cells))
    meta_path = path.with_suffix(".meta.json")
    notes = [asdict(c) for c in cells if c.note.startswith("error")]
    meta_path.write_text(json.dumps({**meta, "failed_cells": notes}, indent=2, sort_keys=True))
    return path, meta_path

"""Command-line entry point: ``vortexlab {simulate,stability,sweep,verify}``.

Exit codes: 0 success, 1 usage or configuration error, 2 a verification
assertion failed, 3 the integration stopped on a vortex collision.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Optional, Sequence, TextIO

import numpy as np

from . import __version__
from .core import Family, ModelParams, PlanePoint, RingConfig, SpherePoint, VortexSystem
from .dynamics import integrate
from .models import CollisionError
from .stability import (
    NotRelativeEquilibriumError,
    analyze,
    closed_form_planar,
    closed_form_sphere_ring,
    closed_form_sphere_ring_polar,
)
from .sweep import FAMILIES as SWEEP_FAMILIES
from .sweep import NoFrontierError, find_frontier, parse_range, sweep_plane, write_diagram
from .verify import SUITES, run_suite

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_COLLISION = 0, 1, 2, 3

STABILITY_FAMILIES = (
    "planar-ring", "planar-ring-center", "sphere-ring", "sphere-ring-pole",
    "geostrophic-ring", "geostrophic-ring-center",
)


class UsageError(Exception):
    """Bad flags or an unusable configuration file."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with 2
        raise UsageError(message)


# ------------------------------------------------------------------ output


class Writer:
    """All output goes through one object so writes never interleave."""

    def __init__(self, stream: TextIO) -> None:
        self.stream = stream

    def text(self, s: str) -> None:
        self.stream.write(s if s.endswith("\n") else s + "\n")
        self.stream.flush()

    def json(self, obj: Any) -> None:
        self.text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable))

    def to_path(self, path: Optional[str], content: str) -> None:
        if path is None or path == "-":
            self.text(content)
            return
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(content)


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ------------------------------------------------------------------ config


def _angle(value: Any, deg: bool) -> float:
    v = float(value)
    return math.radians(v) if deg else v


def load_config(path: str) -> VortexSystem:
    """Read a JSON system description; angles are radians unless ``"unit": "deg"``."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    return system_from_dict(data)


def system_from_dict(data: dict) -> VortexSystem:
    unit = data.get("unit", "rad")
    if unit not in ("rad", "deg"):
        raise UsageError(f"unit must be 'rad' or 'deg', got {unit!r}")
    deg = unit == "deg"
    try:
        explicit = "model" in data
        model = ModelParams(data.get("model", "plane"), data.get("omega", 0.0), data.get("kappa", 0.0))
        if "ring" in data or "family" in data:
            r = dict(data["ring"]) if "ring" in data else {
                k: v for k, v in data.items() if k not in ("model", "omega", "kappa", "unit")}
            fam = Family(r.pop("family"))
            for alias in ("theta0", "radius"):
                if alias in r:
                    r["size"] = r.pop(alias)
            if not fam.planar:
                for key in ("size", "theta1"):
                    if r.get(key) is not None:
                        r[key] = _angle(r[key], deg)
            if "epsilon" in r:
                r["epsilon"] = _angle(r["epsilon"], deg)
            return RingConfig(fam, **r).build(model if explicit else None)
        vortices = data["vortices"]
        pts, lam = [], []
        for v in vortices:
            lam.append(float(v["lambda"] if "lambda" in v else v["strength"]))
            if model.is_sphere:
                if "xyz" in v:
                    pts.append(SpherePoint.from_cartesian(np.asarray(v["xyz"], dtype=float)))
                else:
                    pts.append(SpherePoint(_angle(v["theta"], deg), _angle(v["phi"], deg)))
            else:
                pts.append(PlanePoint(float(v["x"]), float(v["y"])))
        return VortexSystem(model, tuple(pts), tuple(lam))
    except UsageError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid config: {exc}") from exc


def system_to_dict(system: VortexSystem) -> dict:
    """Exact (cartesian, repr-precision) description that reloads bit-identically."""
    m = system.model
    out: dict = {"model": m.model.value, "omega": m.omega, "kappa": m.kappa, "unit": "rad"}
    pos = system.positions
    if m.is_sphere:
        out["vortices"] = [{"xyz": [float(c) for c in p], "lambda": s}
                           for p, s in zip(pos, system.strengths)]
    else:
        out["vortices"] = [{"x": float(p[0]), "y": float(p[1]), "lambda": s}
                           for p, s in zip(pos, system.strengths)]
    return out


# ---------------------------------------------------------------- builders


def _family_config(args: argparse.Namespace) -> tuple[RingConfig, ModelParams]:
    fam, n = args.family, args.n
    if n is None:
        raise UsageError("--n is required with --family")
    lam_p = args.lambda_p
    needs_p = fam.endswith("-center") or fam.endswith("-pole")
    if needs_p and lam_p is None:
        raise UsageError(f"--lambda-p is required for {fam}")
    if not needs_p and lam_p is not None:
        raise UsageError(f"{fam} has no central or polar vortex")
    if fam.startswith("sphere"):
        if args.theta0 is None:
            raise UsageError("--theta0 is required for sphere rings")
        theta0 = _angle(args.theta0, args.deg)
        model = ModelParams.sphere() if not args.omega else ModelParams.rotating_sphere(args.omega)
        family = Family.CNvRp if needs_p else Family.CNvR
        return RingConfig(family, n, theta0, lambda_p=lam_p), model
    radius = 1.0 if args.radius is None else args.radius
    family = Family.CNRp if needs_p else Family.CNR
    if fam.startswith("geostrophic"):
        model = ModelParams.geostrophic(args.kappa or 0.0)
    elif args.omega:
        model = ModelParams.rotating_plane(args.omega)
    else:
        model = ModelParams.planar()
    return RingConfig(family, n, radius, lambda_p=lam_p), model


def _closed_form(fam: str, cfg: RingConfig, model: ModelParams):
    if model.omega or model.kappa:
        return None
    try:
        if fam == "planar-ring":
            return closed_form_planar(cfg.n)
        if fam == "planar-ring-center":
            return closed_form_planar(cfg.n, cfg.lambda_p)
        if fam == "sphere-ring":
            return closed_form_sphere_ring(cfg.n, cfg.theta0)
        if fam == "sphere-ring-pole":
            return closed_form_sphere_ring_polar(cfg.n, cfg.theta0, cfg.lambda_p)
    except ValueError:
        return None
    return None


# --------------------------------------------------------------- commands


def cmd_simulate(args: argparse.Namespace, out: Writer) -> int:
    if args.config:
        system = load_config(args.config)
    else:
        cfg, model = _family_config(args)
        system = cfg.build(model)
    try:
        traj = integrate(system, args.t_end, args.dt, args.method, tol=args.tol)
    except CollisionError as exc:
        out.json({"error": "collision", "pair": list(exc.pair), "distance": exc.distance, "t": exc.t})
        return EXIT_COLLISION
    except RuntimeError as exc:  # step-size underflow near a close encounter
        raise UsageError(f"integration failed: {exc}") from exc
    cols, table = traj.table(args.frame)
    if args.format == "json":
        content = json.dumps({"columns": cols, "rows": table.tolist(), "steps": traj.steps,
                              "model": system.model.label, "frame": args.frame}, indent=2)
    else:
        content = _csv(cols, [[repr(float(v)) for v in row] for row in table])
    out.to_path(args.out, content)
    if args.final_state:
        out.to_path(args.final_state, json.dumps(system_to_dict(traj.state(-1)), indent=2))
    return EXIT_OK


def cmd_stability(args: argparse.Namespace, out: Writer) -> int:
    if args.config:
        system = load_config(args.config)
        target, model, ref = system, None, None
    else:
        target, model = _family_config(args)
        ref = _closed_form(args.family, target, model)
    try:
        verdict = analyze(target, model, args.group)
    except NotRelativeEquilibriumError as exc:
        raise UsageError(str(exc)) from exc
    result = verdict.as_dict()
    if ref is not None:
        result["closed_form"] = ref.code
    if args.format == "json":
        out.json(result)
    else:
        header = ["verdict", "xi", "min_hessian", "max_hessian", "max_re_linearization", "closed_form"]
        h, l = verdict.hessian_eigs, verdict.linearization_eigs
        row = [verdict.code, verdict.xi, float(h.min()) if h.size else "", float(h.max()) if h.size else "",
               float(l.real.max()) if l.size else "", "" if ref is None else ref.code]
        out.text(_csv(header, [row]))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, out: Writer) -> int:
    if args.scan:
        if not args.bracket:
            raise UsageError("--scan needs --bracket lo:hi")
        try:
            lo, hi = (float(v) for v in args.bracket.split(":"))
        except ValueError as exc:
            raise UsageError(f"bad --bracket {args.bracket!r}") from exc
        fixed = {"kappa": args.fixed_kappa, "lambda": args.fixed_lambda}
        try:
            fr = find_frontier(args.family, args.n, args.scan, (lo, hi), fixed, args.tol)
        except NoFrontierError as exc:
            raise UsageError(str(exc)) from exc
        res = {"parameter": fr.parameter, "bracket": list(fr.bracket), "threshold": fr.threshold,
               "verdict_below": fr.verdict_below, "verdict_above": fr.verdict_above,
               "tolerance": fr.tolerance}
        if args.format == "json":
            out.json(res)
        else:
            out.text(_csv(list(res), [[res[k] if k != "bracket" else args.bracket for k in res]]))
        return EXIT_OK
    try:
        kappas = parse_range(args.kappa)
        lambdas = parse_range(args.lam)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    cells = sweep_plane(args.family, args.n, kappas, lambdas, workers=args.workers)
    meta = {"tool": "vortexlab", "version": __version__, "family": args.family, "n": args.n,
            "kappa": "0" if args.family == "planar-ring-center" else args.kappa,
            "lambda": "0" if args.family == "geostrophic-ring" else args.lam, "radius": 1.0, "ring_strength": 1.0,
            "cells": len(cells)}
    if args.out:
        csv_path, meta_path = write_diagram(Path(args.out), cells, meta)
        summary = {"csv": str(csv_path), "meta": str(meta_path), "cells": len(cells),
                   "counts": {v: sum(c.verdict == v for c in cells) for v in "SEUD"}}
        if args.format == "json":
            out.json(summary)
        return EXIT_OK
    if args.format == "json":
        out.json({"meta": meta, "cells": [{"kappa": c.kappa, "lambda": c.lam, "verdict": c.verdict}
                                          for c in cells]})
    else:
        out.text(_csv(["kappa", "lambda", "verdict"],
                      [[f"{c.kappa:.10g}", f"{c.lam:.10g}", c.verdict] for c in cells]))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, out: Writer) -> int:
    names = SUITES if args.suite == "all" else (args.suite,)
    results = [run_suite(s, seed=args.seed, omega=args.omega, points=args.points) for s in names]
    if args.format == "json":
        out.json({"passed": all(r.passed for r in results), "suites": [r.as_dict() for r in results]})
    else:
        rows = []
        for r in results:
            scalars = {k: v for k, v in r.metrics.items() if isinstance(v, (int, float)) and not isinstance(v, bool)}
            rows.append([r.suite, "pass" if r.passed else "FAIL",
                         ";".join(f"{k}={v:.3g}" if isinstance(v, float) else f"{k}={v}"
                                  for k, v in scalars.items()),
                         ";".join(r.failures)])
        out.text(_csv(["suite", "status", "metrics", "failures"], rows))
        for r in results:
            if r.table is not None:
                out.text(_csv(r.table[0], [[repr(v) for v in row] for row in r.table[1]]))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


# ------------------------------------------------------------------ parser


def _add_builder(p: argparse.ArgumentParser, families: Sequence[str]) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="JSON system description")
    src.add_argument("--family", choices=families)
    p.add_argument("--n", type=int)
    p.add_argument("--radius", type=float, help="planar ring radius (default 1)")
    p.add_argument("--theta0", type=float, help="sphere ring colatitude")
    p.add_argument("--lambda-p", "--lambda", dest="lambda_p", type=float, help="central or polar strength")
    p.add_argument("--kappa", type=float, default=0.0)
    p.add_argument("--omega", type=float, default=0.0)
    p.add_argument("--deg", action="store_true", help="--theta0 is in degrees")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vortexlab", description="Point-vortex dynamics and stability.")
    p.add_argument("--version", action="version", version=f"vortexlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="integrate a vortex system")
    _add_builder(s, STABILITY_FAMILIES)
    s.add_argument("--t-end", dest="t_end", type=float, default=10.0)
    s.add_argument("--dt", type=float, default=0.1, help="sampling interval")
    s.add_argument("--method", choices=("rk45", "rk4"), default="rk45")
    s.add_argument("--tol", type=float, default=1e-11)
    s.add_argument("--frame", choices=("inertial", "rotating"), default="inertial")
    s.add_argument("--out", help="output file (default stdout)")
    s.add_argument("--final-state", dest="final_state", help="write the final state as a config")
    s.add_argument("--format", choices=("csv", "json"), default="csv")

    st = sub.add_parser("stability", help="classify a relative equilibrium")
    _add_builder(st, STABILITY_FAMILIES)
    st.add_argument("--group", choices=("auto", "so2", "so3"), default="auto")
    st.add_argument("--format", choices=("csv", "json"), default="csv")

    sw = sub.add_parser("sweep", help="stability diagram or frontier bisection")
    sw.add_argument("--family", choices=SWEEP_FAMILIES, required=True)
    sw.add_argument("--n", type=int, required=True)
    sw.add_argument("--kappa", default="0:5:0.025", help="start:stop:step (inclusive)")
    sw.add_argument("--lambda", dest="lam", default="-2:10:0.05", help="start:stop:step (inclusive)")
    sw.add_argument("--out", help="CSV path; a .meta.json is written beside it")
    sw.add_argument("--workers", type=int)
    sw.add_argument("--scan", choices=("kappa", "lambda"), help="bisect a frontier instead")
    sw.add_argument("--bracket", help="lo:hi for --scan")
    sw.add_argument("--fixed-kappa", dest="fixed_kappa", type=float, default=0.0)
    sw.add_argument("--fixed-lambda", dest="fixed_lambda", type=float, default=0.0)
    sw.add_argument("--tol", type=float, default=1e-3)
    sw.add_argument("--format", choices=("csv", "json"), default="csv")

    v = sub.add_parser("verify", help="run an identity check suite")
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--omega", type=float, help="single rotation rate for the persistence suite")
    v.add_argument("--points", choices=("generic", "lattice"), default="generic",
                   help="appendix-a evaluation longitudes")
    v.add_argument("--format", choices=("csv", "json"), default="csv")
    return p


COMMANDS = {"simulate": cmd_simulate, "stability": cmd_stability, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv: Optional[Sequence[str]] = None, stdout: Optional[TextIO] = None) -> int:
    out = Writer(stdout or sys.stdout)
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        sys.stderr.write(f"vortexlab: error: {exc}\n")
        return EXIT_USAGE
    except (ValueError, TypeError) as exc:
        sys.stderr.write(f"vortexlab: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())

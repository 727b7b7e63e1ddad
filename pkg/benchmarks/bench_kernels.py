"""Compiled (numba) versus pure-numpy kernels.

Run ``python3 benchmarks/bench_kernels.py``.  Prints one row per kernel and
system size with the median wall time of each path and the speedup.
"""

import argparse
import statistics
import time

import numpy as np

from vortexlab import _jit
from vortexlab.core import ModelParams, PlanePoint, VortexSystem
from vortexlab.dynamics import integrate
from vortexlab.models import KERNELS_NUMBA, KERNELS_NUMPY, ModelArrays


def _system(n: int, model: ModelParams, seed: int = 0) -> VortexSystem:
    rng = np.random.default_rng(seed)
    ang = 2 * np.pi * np.arange(n) / n
    r = 1.0 + 0.3 * rng.random(n)
    pts = tuple(PlanePoint(float(a), float(b)) for a, b in zip(r * np.cos(ang), r * np.sin(ang)))
    return VortexSystem(model, pts, tuple(rng.uniform(0.5, 1.5, n)))


def _median_time(fn, repeat: int) -> float:
    fn()  # warm-up, includes compilation on the numba path
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def bench_kernels(sizes, repeat):
    rows = []
    for label, model in (("plane", ModelParams.planar()), ("geostrophic", ModelParams.geostrophic(1.0))):
        for n in sizes:
            s = _system(n, model)
            arr = ModelArrays.of(s)
            pos = s.positions
            out = np.empty_like(pos)
            args = (arr.code, pos, arr.lam, arr.omega, arr.kappa)
            for kname, k in (("energy", 0), ("velocity", 2)):
                fast, slow = KERNELS_NUMBA[k], KERNELS_NUMPY[k]
                extra = () if k == 0 else (out,)
                tf = _median_time(lambda: fast(*args, *extra), repeat)
                ts = _median_time(lambda: slow(*args, *extra), repeat)
                rows.append((f"{kname}/{label}", n, tf, ts))
    return rows


def bench_integrate(n, t_end):
    s = _system(n, ModelParams.planar())
    out = []
    for use_jit in (True, False):
        integrate(s, 0.01, 0.01, use_jit=use_jit)  # compile / warm
        t0 = time.perf_counter()
        integrate(s, t_end, t_end / 10, use_jit=use_jit)
        out.append(time.perf_counter() - t0)
    return ("integrate/plane rk45", n, out[0], out[1])


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="8,32,128")
    p.add_argument("--repeat", type=int, default=50)
    p.add_argument("--t-end", type=float, default=0.2)
    a = p.parse_args()
    if not _jit.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    sizes = [int(x) for x in a.sizes.split(",")]
    rows = bench_kernels(sizes, a.repeat) + [bench_integrate(8, a.t_end)]
    print(f"{'kernel':<24}{'n':>5}{'numba [s]':>13}{'numpy [s]':>13}{'speedup':>10}")
    for name, n, tf, ts in rows:
        print(f"{name:<24}{n:>5}{tf:>13.2e}{ts:>13.2e}{ts / tf:>9.1f}x")


if __name__ == "__main__":
    main()

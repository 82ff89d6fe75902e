"""Compare the compiled convolution kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--modes 16 32] [--repeat 5]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from eckhaus.galerkin import GalerkinSystem, _bloch_tables, _residual_tables
from eckhaus.kernels import _fallback
from eckhaus.zoo import brusselator, hadamard_diffusive

try:
    from eckhaus.kernels import _kernels
except ImportError:  # pragma: no cover
    _kernels = None


def _case(model, M, seed=0):
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((2 * M + 1, model.n)) + 1j * rng.standard_normal((2 * M + 1, model.n))
    U = np.ascontiguousarray(U * np.exp(-0.3 * np.abs(np.arange(-M, M + 1)))[:, None])
    k = model.k_guess
    quad, cub = _residual_tables(model, k, M)
    bq, bc = _bloch_tables(model, k, M, 0.1)
    c = lambda a: np.ascontiguousarray(a, dtype=np.complex128)
    return {
        "quad_conv": [(U, c(t), c(T)) for t, T in quad],
        "cubic_conv": [(U, c(t), c(T)) for t, T in cub],
        "quad_bloch": [(U, t, T, s) for t, T, s in bq],
        "cubic_bloch": [(U, t, T, s) for t, T, s in bc],
    }


def bench(models, Ms, repeat):
    rows = []
    for model in models:
        for M in Ms:
            case = _case(model, M)
            for name, calls in case.items():
                if not calls:
                    continue
                times = {}
                for label, mod in (("numpy", _fallback), ("cython", _kernels)):
                    if mod is None:
                        continue
                    fn = getattr(mod, name)
                    t = timeit.repeat(lambda: [fn(*a) for a in calls], number=1, repeat=repeat)
                    times[label] = min(t)
                outs = {lab: [getattr(m, name)(*a) for a in calls] for lab, m in
                        (("numpy", _fallback), ("cython", _kernels)) if m is not None}
                diff = 0.0
                if len(outs) == 2:
                    diff = max(float(np.max(np.abs(a - b))) for a, b in zip(outs["numpy"], outs["cython"]))
                rows.append((model.name, M, name, times.get("numpy"), times.get("cython"), diff))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--modes", type=int, nargs="+", default=[16, 32])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rows = bench([brusselator(), hadamard_diffusive()], args.modes, args.repeat)
    print(f"{'model':20s} {'M':>3s} {'kernel':12s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s} {'max diff':>9s}")
    for name, M, k, tn, tc, d in rows:
        sp = f"{tn / tc:8.1f}" if tc else "     n/a"
        tcs = f"{1e3 * tc:12.3f}" if tc else "         n/a"
        print(f"{name:20s} {M:3d} {k:12s} {1e3 * tn:11.3f} {tcs} {sp} {d:9.1e}")
    # end-to-end residual evaluation
    for M in args.modes:
        sysm = GalerkinSystem(brusselator(), 1.0, 0.01, M)
        U = _case(sysm.model, M)["quad_conv"][0][0]
        t = min(timeit.repeat(lambda: sysm.nonlinear(U), number=10, repeat=args.repeat)) / 10
        print(f"GalerkinSystem.nonlinear (active backend), M={M}: {1e3 * t:.3f} ms")


if __name__ == "__main__":
    main()

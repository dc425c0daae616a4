"""Timing comparison of the two assembly kernel backends.

Runs the four hot kernels (flux/stabilization residual and Jacobian) on a
realistic workload for each backend and prints a table of per-call times
and speedups, plus an end-to-end Newton solve timing.  The numba pass is
warmed first so compilation is excluded.

    python3 benchmarks/bench_kernels.py [--n 64] [--k 2] [--repeats 5]
"""

import argparse
import time

import numpy as np

from hho_leray.assembly_solver import (NewtonOptions, build_assembly,
                                       newton_solve)
from hho_leray.backend import get_kernels
from hho_leray.cases import get_case, source_from_manufactured
from hho_leray.flux import default_stab_model
from hho_leray.mesh import build_structured_triangular


def time_call(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(n, k, p, repeats):
    mesh = build_structured_triangular(n)
    case = get_case("nondeg-flux", p=p, k=k, delta=0.5)
    fm = case.flux_model()
    sm = default_stab_model(fm, case.zeta0)
    data = build_assembly(mesh, k, fm, sm.zeta)
    rng = np.random.default_rng(0)
    uloc = rng.standard_normal((mesh.n_elements, data.ops.nloc))
    garr = data.gamma_array(sm.gamma)

    calls = {
        "flux_residual": lambda kern: kern.flux_residual(
            data.A, data.w, data.delta_q, data.mu_q, data.a_q, uloc, p),
        "flux_jacobian": lambda kern: kern.flux_jacobian(
            data.A, data.w, data.delta_q, data.mu_q, data.a_q, uloc, p, 1e-8),
        "stab_residual": lambda kern: kern.stab_residual(
            data.Dv, data.wf, data.zeta_q, garr, uloc, p),
        "stab_jacobian": lambda kern: kern.stab_jacobian(
            data.Dv, data.wf, data.zeta_q, garr, uloc, p, 1e-8),
    }

    backends = {"numpy": get_kernels("numpy")}
    try:
        backends["numba"] = get_kernels("numba")
    except ImportError:
        print("numba not importable; timing numpy only")

    if "numba" in backends:
        for call in calls.values():
            call(backends["numba"])  # compile outside the timed region

    print(f"\nmesh n={n} ({mesh.n_elements} elements), k={k}, p={p}, "
          f"best of {repeats}")
    print(f"{'kernel':<16}" + "".join(f"{b:>12}" for b in backends)
          + ("     speedup" if len(backends) == 2 else ""))
    for name, call in calls.items():
        times = {b: time_call(lambda: call(kern), repeats)
                 for b, kern in backends.items()}
        row = f"{name:<16}" + "".join(f"{times[b] * 1e3:>10.2f}ms"
                                      for b in backends)
        if len(times) == 2:
            row += f"{times['numpy'] / times['numba']:>11.2f}x"
        print(row)

    # agreement check on the exact same inputs
    if len(backends) == 2:
        worst = 0.0
        for call in calls.values():
            a = call(backends["numpy"])
            b = call(backends["numba"])
            worst = max(worst, float(np.abs(a - b).max()
                                     / max(1.0, np.abs(a).max())))
        print(f"max relative backend disagreement: {worst:.2e}")

    return backends


def bench_solve(n, k, p, backends):
    mesh = build_structured_triangular(n)
    case = get_case("nondeg-flux", p=p, k=k, delta=0.5)
    fm = case.flux_model()
    sm = default_stab_model(fm, case.zeta0)
    f = lambda x: source_from_manufactured(case, x)
    print(f"\nfull newton solve, n={n}, k={k}, p={p}")
    for name in backends:
        t0 = time.perf_counter()
        _, rep = newton_solve(mesh, k, fm, sm, f, None,
                              NewtonOptions(backend=name))
        dt = time.perf_counter() - t0
        print(f"{name:<8} {dt * 1e3:8.1f}ms  ({rep.iterations} iterations)")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=64)
    parser.add_argument("--k", type=int, default=2)
    parser.add_argument("--p", type=float, default=1.5)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    backends = bench_kernels(args.n, args.k, args.p, args.repeats)
    bench_solve(min(args.n, 32), args.k, args.p, backends)


if __name__ == "__main__":
    main()

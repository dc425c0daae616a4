"""Command line front end.

Subcommands:
  run        convergence study over a (p, k, n) grid for one test case
  accept     acceptance criteria suite (--smoke for a fast plumbing pass)
  mesh-info  validate a mesh file and print summary statistics

Environment: HHO_BACKEND selects the assembly backend ("numba" or "numpy",
default numba when importable), HHO_THREADS caps the numba thread count.
"""

import argparse
import sys

from .cases import CASE_NAMES
from .harness import RunConfig, acceptance, emit_table, run_study
from .mesh import MeshError, load_mesh, mesh_stats


def _float_list(text):
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def _int_list(text):
    return tuple(int(tok) for tok in text.replace(",", " ").split())


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="hho-leray",
        description="Hybrid high-order solver for degenerate p-type "
                    "diffusion problems on triangular meshes.",
        epilog="Environment: HHO_BACKEND=numpy|numba selects the assembly "
               "kernels; HHO_THREADS caps the numba thread count.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a convergence study")
    run.add_argument("--case", required=True, choices=CASE_NAMES,
                     help="manufactured test case")
    run.add_argument("--p", type=_float_list, default=(1.5,),
                     metavar="LIST", help="exponents in (1, 2], e.g. "
                     "'1.25 1.5 1.75' (default: 1.5)")
    run.add_argument("--k", type=_int_list, default=(1,), metavar="LIST",
                     help="polynomial degrees, subset of {1, 2, 3} "
                     "(default: 1)")
    run.add_argument("--n", type=_int_list, default=(8, 16, 32),
                     metavar="LIST", help="mesh subdivision counts, "
                     "strictly increasing (default: 8 16 32)")
    run.add_argument("--delta", type=float, default=1.0,
                     help="degeneracy offset for cases that take one "
                     "(default: 1.0)")
    run.add_argument("--quad-degree", type=int, default=None,
                     help="quadrature degree for the nonlinear terms "
                     "(default: 2(k+1)+2)")
    run.add_argument("--tol", type=float, default=1e-9,
                     help="relative Newton tolerance (default: 1e-9)")
    run.add_argument("--out", default=None, metavar="DIR",
                     help="write results.csv and tables.md to this "
                     "directory")

    acc = sub.add_parser("accept", help="run the acceptance criteria")
    acc.add_argument("--smoke", action="store_true",
                     help="reduced sizes, checks plumbing and error "
                     "decrease instead of asymptotic rates")

    info = sub.add_parser("mesh-info", help="inspect a mesh file")
    info.add_argument("file", help="mesh in text format: header 'nv ne', "
                      "nv vertex lines 'x y', ne element lines 'i j k'")

    return parser


def _cmd_run(args):
    try:
        config = RunConfig(case=args.case, p_list=args.p, k_list=args.k,
                           n_list=args.n, delta=args.delta,
                           quad_degree=args.quad_degree, tol=args.tol,
                           out_dir=args.out)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    records, failures = run_study(config)
    print(emit_table(records), end="")
    if args.out is not None:
        print(f"\nwrote {args.out}/results.csv and {args.out}/tables.md")
    for msg in failures:
        print(f"FAILED {msg}", file=sys.stderr)
    return 1 if failures else 0


def _cmd_mesh_info(args):
    try:
        mesh = load_mesh(args.file)
    except (OSError, MeshError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for key, val in mesh_stats(mesh).items():
        print(f"{key}: {val:.6g}" if isinstance(val, float)
              else f"{key}: {val}")
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "accept":
        return acceptance(smoke=args.smoke)
    return _cmd_mesh_info(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit status: 0 ok, 2 inconsistent system, 3 every lifting degenerate,
4 unreadable or malformed input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .binomial import InconsistentSystemError, analyze, load_system, system_to_dict
from .homotopy import witness_set
from .intlinalg import DimensionError, parse_matrix_text, smith_normal_form
from .mspace import MasterSpaceSpec, benchmark, generate, write_csv
from .subdivision import LiftingExhaustedError, degree

EXIT_OK = 0
EXIT_INCONSISTENT = 2
EXIT_DEGENERATE = 3
EXIT_INPUT = 4

SEED_ENV = "BINTOPE_SEED"


class InputError(Exception):
    pass


def resolve_seed(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"{SEED_ENV}={env!r} is not an integer") from None
    return 0


def _dump(obj, path: str | None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _read_system(path: str):
    try:
        return load_system(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"malformed system in {path}: {exc}") from None


def _rational(v) -> str:
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _complex_pair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


# ---------------------------------------------------------------- commands

def cmd_snf(args) -> int:
    try:
        with open(args.matrix) as fh:
            A = parse_matrix_text(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read {args.matrix}: {exc.strerror or exc}") from None
    except (ValueError, DimensionError) as exc:
        raise InputError(f"malformed matrix in {args.matrix}: {exc}") from None
    res = smith_normal_form(A, divisibility=args.divisibility, workers=args.threads)
    _dump(
        {
            "seed": resolve_seed(args.seed),
            "shape": list(A.shape),
            "rank": res.rank,
            "divisors": list(res.divisors),
            "P": res.P.tolist(),
            "Q": res.Q.tolist(),
        },
        args.out,
    )
    return EXIT_OK


def cmd_analyze(args) -> int:
    system = _read_system(args.system)
    st = analyze(system)
    out = {
        "seed": resolve_seed(args.seed),
        "n": system.num_vars,
        "equations": system.num_eqs,
        "rank": st.rank,
        "dimension": st.dimension,
        "consistent": st.consistent,
        "component_count": st.component_count,
        "divisors": list(st.snf.divisors),
    }
    _dump(out, args.out)
    if not st.consistent:
        print("error: system is inconsistent over the torus", file=sys.stderr)
        return EXIT_INCONSISTENT
    return EXIT_OK


def cmd_degree(args) -> int:
    seed = resolve_seed(args.seed)
    system = _read_system(args.system)
    res = degree(system, args.threads, seed=seed, mode=args.mode, pivoting=not args.no_pivoting)
    sub = res.subdivision
    out = {
        "seed": seed,
        "mode": args.mode,
        "dimension": res.dimension,
        "component_count": res.component_count,
        "degree": res.degree,
    }
    if sub is not None:
        out["lifting_seed"] = sub.lifting_seed
        out["cells"] = len(sub)
        out["stats"] = {k: v for k, v in sub.stats.items() if isinstance(v, int)}
    _dump(out, args.out)
    if args.emit_cells:
        cells = []
        if sub is not None:
            cells = [
                {
                    "indices": list(c.indices),
                    "nvol": c.nvol,
                    "normal": [_rational(v) for v in c.normal],
                }
                for c in sub.cells
            ]
        _dump(cells, args.emit_cells)
    return EXIT_OK


def _parse_component(text: str | None):
    if text is None or text == "":
        return None
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise InputError(f"--component expects comma-separated integers, got {text!r}") from None


def cmd_witness(args) -> int:
    seed = resolve_seed(args.seed)
    system = _read_system(args.system)
    comp = _parse_component(args.component)
    try:
        W = witness_set(system, comp, args.threads, seed=seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out = {
        "seed": seed,
        "component": list(W.problem.component.indices),
        "degree": W.degree,
        "complete": W.complete,
        "paths": W.paths,
        "points": [
            {
                "x": [_complex_pair(v) for v in x],
                "t": [_complex_pair(v) for v in t],
                "residual": r,
                "cut_residual": c,
            }
            for x, t, r, c in zip(W.points, W.parameters, W.system_residuals, W.cut_residuals)
        ],
    }
    _dump(out, args.out)
    return EXIT_OK


def cmd_mspace(args) -> int:
    if args.action == "bench":
        rows = benchmark(args.max, args.max, args.budget, args.threads, seed=resolve_seed(args.seed))
        if args.csv and args.csv != "-":
            with open(args.csv, "w", newline="") as fh:
                write_csv(rows, fh)
        else:
            write_csv(rows, sys.stdout)
        return EXIT_OK
    if args.m is None or args.k is None:
        raise InputError("mspace needs --m and --k (or the 'bench' action)")
    try:
        spec = MasterSpaceSpec(args.m, args.k)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    data = system_to_dict(generate(spec))
    data["m"], data["k"] = spec.m, spec.k
    data["variables"] = spec.variable_names()
    _dump(data, args.emit)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    threads_default = os.cpu_count() or 1
    p = argparse.ArgumentParser(prog="bintope", description="Laurent binomial systems: structure, degree, witness sets.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True, threads=True):
        if seed:
            sp.add_argument("--seed", type=int, default=None, help=f"random seed (default: ${SEED_ENV} or 0)")
        if threads:
            sp.add_argument("--threads", type=int, default=threads_default, help="worker count")
        sp.add_argument("--out", default=None, help="output path (default stdout)")

    sp = sub.add_parser("snf", help="Smith normal form of an integer matrix file")
    sp.add_argument("matrix")
    sp.add_argument("--divisibility", action="store_true", help="enforce d_i | d_{i+1}")
    common(sp)
    sp.set_defaults(func=cmd_snf)

    sp = sub.add_parser("analyze", help="dimension and component count")
    sp.add_argument("system")
    common(sp, threads=False)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("degree", help="degree of each component")
    sp.add_argument("system")
    sp.add_argument("--mode", choices=["exact", "float"], default="float")
    sp.add_argument("--emit-cells", default=None, metavar="CELLS_JSON")
    sp.add_argument("--no-pivoting", action="store_true", help="extension only")
    common(sp)
    sp.set_defaults(func=cmd_degree)

    sp = sub.add_parser("witness", help="witness set of one component")
    sp.add_argument("system")
    sp.add_argument("--component", default=None, help="k1,k2,... torsion indices")
    common(sp)
    sp.set_defaults(func=cmd_witness)

    sp = sub.add_parser("mspace", help="master-space gradient systems")
    sp.add_argument("action", nargs="?", choices=["bench"], help="run the benchmark table")
    sp.add_argument("--m", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--emit", default=None, help="system JSON path (default stdout)")
    sp.add_argument("--max", type=int, default=5)
    sp.add_argument("--budget", type=float, default=600.0, help="seconds per entry")
    sp.add_argument("--csv", default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--threads", type=int, default=threads_default)
    sp.set_defaults(func=cmd_mspace)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InconsistentSystemError as exc:
        print(f"error: inconsistent system: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except LiftingExhaustedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

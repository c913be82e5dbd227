"""Command-line front end.

Exit codes: 0 success / certified, 2 found but uncertified (or no feasible
grid point for ``oracle``), 3 nothing found, 64 usage, 65 bad problem file,
70 internal error.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys
import time
import warnings

import numpy as np

from . import __version__
from .auglag import AugLagConfig, eval_auglag, outer_loop, select_subproblem_global, solve_subproblem_dual
from .errors import CertificationContradicted, NoConvergence, NoFeasiblePoint
from .model import eval_constraint, eval_objective, lagrangian
from .oracle import GridSpec, cross_validate, grid_constrained_min
from .problem_file import ProblemFileError, load_problem, problem_to_dict
from .report import (
    CAVEATS,
    aug_row,
    aug_table,
    critical_point_row,
    history_row,
    history_table,
    point_from_row,
    solve_table,
)
from .solver import Classification, SolverConfig, explore

EX_OK, EX_UNCERTIFIED, EX_NONE, EX_USAGE, EX_DATAERR, EX_SOFTWARE = 0, 2, 3, 64, 65, 70
GAP_TOL = 1e-6
RANGE_OPTIONS = ("--seed-box", "--mult-box", "--box", "--range")

log = logging.getLogger("canondual")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _join_ranges(argv):
    """Let ``--box -6:6`` through: argparse would read ``-6:6`` as an option."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in RANGE_OPTIONS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def _solver_config(args) -> SolverConfig:
    kw = {}
    if args.seed_box:
        kw["x_box"] = args.seed_box[0] if len(args.seed_box) == 1 else args.seed_box
    if args.mult_box:
        kw["mult_box"] = args.mult_box
    if args.grid:
        kw["grid_density"] = args.grid
    if args.tol:
        kw["newton_tol"] = args.tol
    return SolverConfig(**kw)


def _config_echo(cfg: SolverConfig) -> dict:
    return {
        "x_box": np.asarray(cfg.x_box, dtype=float).tolist(),
        "mult_box": list(cfg.mult_box),
        "grid_density": cfg.grid_density,
        "newton_tol": cfg.newton_tol,
        "dedup_radius": cfg.dedup_radius,
        "mu_nonzero_tol": cfg.mu_nonzero_tol,
        "psd_tol": cfg.psd_tol,
    }


def _emit(out, text):
    out.write(text if text.endswith("\n") else text + "\n")


def cmd_solve(args, out) -> int:
    p = load_problem(args.file)
    cfg = _solver_config(args)
    t0 = time.perf_counter()
    points, stats = explore(p, cfg)
    elapsed = time.perf_counter() - t0
    rows = [critical_point_row(pt, GAP_TOL) for pt in points]
    report = {
        "problem": problem_to_dict(p),
        "config": _config_echo(cfg),
        "rows": rows,
        "caveats": CAVEATS,
        "diagnostics": vars(stats),
        "timings": {"solve_seconds": elapsed},
    }
    if args.json:
        _emit(out, json.dumps(report, indent=2))
    elif points:
        _emit(out, solve_table(rows))
        for c in CAVEATS:
            _emit(out, f"note: {c}")
    if not points:
        print(
            f"NoConvergence: no KKT point found ({stats.seeds} seeds, {stats.branches} branches, "
            f"{stats.converged} converged, {stats.rejected} rejected)",
            file=sys.stderr,
        )
        return EX_NONE
    certified = any(pt.classification == Classification.GLOBAL_MIN for pt in points)
    return EX_OK if certified else EX_UNCERTIFIED


def cmd_auglag(args, out) -> int:
    p = load_problem(args.file)
    if p.p < 1:
        raise UsageError("the augmented Lagrangian needs at least one equality constraint")
    if p.m:
        raise UsageError("inequality constraints are not supported by auglag")
    scfg = _solver_config(args)
    mu0 = np.broadcast_to(np.asarray(args.mu0, dtype=float), (p.p,)) if len(args.mu0) in (1, p.p) else None
    if mu0 is None:
        raise UsageError(f"--mu0 needs 1 or {p.p} values")
    if args.subtable:
        try:
            points = solve_subproblem_dual(p, mu0, args.nu0, scfg)
        except NoConvergence as exc:
            print(f"NoConvergence: {exc}", file=sys.stderr)
            return EX_NONE
        rows = [aug_row(pt) for pt in points]
        if args.json:
            _emit(out, json.dumps({"mu_k": mu0.tolist(), "nu": args.nu0, "rows": rows}, indent=2))
        else:
            _emit(out, aug_table(rows))
        return EX_OK if select_subproblem_global(points) is not None else EX_UNCERTIFIED
    cfg = AugLagConfig(nu0=args.nu0, alpha=args.alpha, mu0=mu0, max_outer_iter=args.iters, feasibility_tol=args.feas_tol)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            hist = outer_loop(p, cfg, scfg)
        except NoConvergence as exc:
            print(f"NoConvergence: {exc}", file=sys.stderr)
            return EX_NONE
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    rows = [history_row(it) for it in hist.iterates]
    if args.json:
        _emit(out, json.dumps({"converged": hist.converged, "history": rows}, indent=2))
    else:
        _emit(out, history_table(rows))
    return EX_OK if hist.converged else EX_UNCERTIFIED


def _curve_function(p, name: str, mu, nu):
    if name == "objective":
        return lambda x: eval_objective(p, x)
    if name.startswith("constraint:"):
        j = int(name.split(":", 1)[1])
        if not 0 <= j < p.p:
            raise UsageError(f"equality index {j} out of range (p={p.p})")
        return lambda x: eval_constraint(p.h_terms[j], x)
    if name == "lagrangian":
        return lambda x: lagrangian(p, x, np.zeros(p.m), np.broadcast_to(mu, (p.p,)))
    if name == "auglag":
        if nu is None:
            raise UsageError("--function auglag needs --nu")
        return lambda x: eval_auglag(p, x, np.broadcast_to(mu, (p.p,)), nu)
    raise UsageError(f"unknown function {name!r}")


def curve_csv(p, name: str, lo: float, hi: float, samples: int, mu=0.0, nu=None) -> str:
    """CSV text ``x,value`` with 17 significant digits and LF line endings."""
    if p.n != 1:
        raise ProblemFileError(f"curve sampling needs n = 1, problem has n = {p.n}")
    fn = _curve_function(p, name, np.asarray(mu, dtype=float), nu)
    xs = np.linspace(lo, hi, samples)
    buf = io.StringIO()
    buf.write("x,value\n")
    for x in xs:
        buf.write(f"{x + 0.0:.17g},{float(fn(np.array([x]))) + 0.0:.17g}\n")
    return buf.getvalue()


def cmd_curve(args, out) -> int:
    p = load_problem(args.file)
    if args.samples < 2:
        raise UsageError("--samples must be >= 2")
    text = curve_csv(p, args.function, *args.range, args.samples, args.mu, args.nu)
    if args.out and args.out != "-":
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EX_OK


def cmd_oracle(args, out) -> int:
    p = load_problem(args.file)
    box = args.box or (-6.0, 6.0)
    gs = GridSpec(box, args.density, args.feas_tol)
    try:
        if args.against:
            with open(args.against) as fh:
                rep = json.load(fh)
            points = [point_from_row(r) for r in rep["rows"]]
            try:
                cv = cross_validate(p, points, gs, args.budget)
            except CertificationContradicted as exc:
                _emit(out, f"certification contradicted: {exc}")
                return EX_SOFTWARE
            _emit(out, "\n".join(cv.lines()))
        else:
            x, f, count = grid_constrained_min(p, gs)
            _emit(out, f"grid minimum f={f:.6f} at x={np.round(x, 6).tolist()} ({count} feasible grid points)")
    except NoFeasiblePoint as exc:
        _emit(out, f"NoFeasiblePoint: {exc}")
        return EX_UNCERTIFIED
    return EX_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="canondual", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_opts(sp):
        sp.add_argument("file")
        sp.add_argument("--seed-box", type=parse_range, action="append", help="LO:HI for x seeds; repeat per coordinate")
        sp.add_argument("--mult-box", type=parse_range, help="LO:HI for multiplier seeds")
        sp.add_argument("--grid", type=int, help="seeds per axis")
        sp.add_argument("--tol", type=float, help="Newton residual tolerance")
        sp.add_argument("--json", action="store_true", help="full-precision JSON report")
        sp.add_argument("--table", dest="json", action="store_false", help="fixed-width table (default)")

    sp = sub.add_parser("solve", help="enumerate and classify critical points")
    solver_opts(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("auglag", help="augmented Lagrangian sub-problem table or outer loop")
    solver_opts(sp)
    sp.add_argument("--mu0", type=parse_floats, default=[1.0])
    sp.add_argument("--nu0", type=float, default=5.0)
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--iters", type=int, default=50)
    sp.add_argument("--feas-tol", type=float, default=1e-6)
    sp.add_argument("--subtable", action="store_true")
    sp.set_defaults(func=cmd_auglag)

    sp = sub.add_parser("curve", help="sample a one-dimensional function to CSV")
    sp.add_argument("file")
    sp.add_argument("--function", default="objective", help="objective | constraint:J | lagrangian | auglag")
    sp.add_argument("--mu", type=parse_floats, default=[0.0])
    sp.add_argument("--nu", type=float)
    sp.add_argument("--range", type=parse_range, default=(-6.0, 6.0))
    sp.add_argument("--samples", type=int, default=1201)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_curve)

    sp = sub.add_parser("oracle", help="dense-grid constrained minimum")
    sp.add_argument("file")
    sp.add_argument("--box", type=parse_range, action="append")
    sp.add_argument("--density", type=int, default=200001)
    sp.add_argument("--feas-tol", type=float, default=0.05)
    sp.add_argument("--budget", type=float, default=0.02)
    sp.add_argument("--against", help="JSON report written by `solve --json`")
    sp.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(_join_ranges(sys.argv[1:] if argv is None else argv))
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "box", None):
        args.box = args.box[0] if len(args.box) == 1 else args.box
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"canondual: error: {exc}", file=sys.stderr)
        return EX_USAGE
    except (ProblemFileError, FileNotFoundError) as exc:
        print(f"canondual: bad problem file: {exc}", file=sys.stderr)
        return EX_DATAERR
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"canondual: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EX_SOFTWARE


if __name__ == "__main__":
    sys.exit(main())

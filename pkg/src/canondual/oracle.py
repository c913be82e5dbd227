"""Brute-force checks that do not share code paths with the Newton solver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import CertificationContradicted, NoFeasiblePoint
from .model import Problem, eval_constraint, eval_objective
from .solver import Classification

MAX_GRID_POINTS = 10**8
CHUNK = 1 << 20


@dataclass
class GridSpec:
    box: Sequence
    points_per_axis: int = 2001
    feas_tol: float = 0.05
    max_dim: int = 3

    def __post_init__(self):
        if self.points_per_axis < 3:
            raise ValueError("points_per_axis must be >= 3")
        if not self.feas_tol >= 0:
            raise ValueError("feas_tol must be nonnegative")

    def bounds(self, n: int) -> np.ndarray:
        box = np.asarray(self.box, dtype=float)
        if box.shape == (2,):
            box = np.tile(box, (n, 1))
        if box.shape != (n, 2):
            raise ValueError(f"box must be (lo, hi) or {n} such pairs")
        return box

    def spacing(self, n: int) -> np.ndarray:
        b = self.bounds(n)
        return (b[:, 1] - b[:, 0]) / (self.points_per_axis - 1)


def _grid_chunks(bounds: np.ndarray, k: int):
    """Yield ``(start_index, points)`` blocks of the tensor grid in C order."""
    n = bounds.shape[0]
    total = k**n
    if n * math.log(k) > math.log(MAX_GRID_POINTS) + 1e-9:
        raise ValueError(f"grid of {k}^{n} points exceeds the {MAX_GRID_POINTS:.0e} guard")
    axes = [np.linspace(lo, hi, k) for lo, hi in bounds]
    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(start + CHUNK, total))
        cols = np.unravel_index(idx, (k,) * n)
        yield start, np.stack([axes[d][cols[d]] for d in range(n)], axis=1)


def grid_min(fn: Callable, bounds: np.ndarray, k: int, mask_fn: Callable | None = None):
    """Minimum of a vectorized ``fn`` over a tensor grid, lowest index winning ties.

    ``mask_fn`` (also vectorized) selects admissible grid points. Returns
    ``(x_best, f_best, admissible_count)``; ``x_best`` is None if nothing is admissible.
    """
    best_f, best_x, count = np.inf, None, 0
    for _, X in _grid_chunks(bounds, k):
        vals = np.asarray(fn(X), dtype=float)
        if mask_fn is not None:
            ok = mask_fn(X)
            count += int(ok.sum())
            vals = np.where(ok, vals, np.inf)
        else:
            count += len(vals)
        i = int(np.argmin(vals))
        if vals[i] < best_f:
            best_f, best_x = float(vals[i]), X[i].copy()
    return best_x, best_f, count


def feasibility_mask(p: Problem, X: np.ndarray, feas_tol: float) -> np.ndarray:
    ok = np.ones(X.shape[0], dtype=bool)
    for t in p.h_terms:
        ok &= np.abs(eval_constraint(t, X)) <= feas_tol
    for t in p.g_terms:
        ok &= eval_constraint(t, X) <= feas_tol
    return ok


def grid_constrained_min(p: Problem, gs: GridSpec):
    """Dense-grid minimum of the objective over the feasibility band.

    Returns ``(x_best, f_best, feas_count)``; raises :class:`NoFeasiblePoint`.
    """
    if p.n > gs.max_dim:
        raise ValueError(f"grid oracle limited to n <= {gs.max_dim}; raise GridSpec.max_dim to override")
    x, f, count = grid_min(
        lambda X: eval_objective(p, X),
        gs.bounds(p.n),
        gs.points_per_axis,
        lambda X: feasibility_mask(p, X, gs.feas_tol),
    )
    if x is None:
        raise NoFeasiblePoint(f"no grid point within the feasibility band {gs.feas_tol}")
    return x, f, count


def fd_gradient(fn: Callable, x, rel_step: float = 1e-5) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * (1.0 + abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fn(x + e) - fn(x - e)) / (2 * h)
    return g


def fd_gradient_check(fn: Callable, grad: Callable, x, rel_step: float = 1e-5) -> float:
    """Max over coordinates of ``|analytic - central difference| / (1 + |analytic|)``."""
    analytic = np.atleast_1d(np.asarray(grad(x), dtype=float))
    numeric = fd_gradient(fn, x, rel_step)
    return float(np.max(np.abs(analytic - numeric) / (1.0 + np.abs(analytic))))


def count_local_extrema(values) -> tuple[int, int]:
    """``(minima, maxima)`` from sign changes of the forward-difference slope."""
    slope = np.sign(np.diff(np.asarray(values, dtype=float)))
    slope = slope[slope != 0]
    changes = np.diff(slope)
    return int(np.sum(changes > 0)), int(np.sum(changes < 0))


@dataclass
class CrossValidationReport:
    grid_x: np.ndarray
    grid_f: float
    feas_count: int
    budget: float
    certified_values: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return all(ok for _, ok in self.checks)

    def lines(self) -> list[str]:
        out = [f"grid minimum f={self.grid_f:.6f} at x={np.round(self.grid_x, 6).tolist()} ({self.feas_count} feasible)"]
        out += [f"{'PASS' if ok else 'FAIL'} {msg}" for msg, ok in self.checks]
        out.append("certification consistent" if self.consistent else "certification contradicted")
        return out


def cross_validate(p: Problem, points, gs: GridSpec, budget: float = 0.02, local_radius: float | None = None):
    """Check certified global minima against the grid oracle.

    Raises :class:`CertificationContradicted` if a feasible grid value lies
    below a certified minimum by more than ``budget``, globally or within
    ``local_radius`` of the point.
    """
    x_best, f_best, count = grid_constrained_min(p, gs)
    report = CrossValidationReport(x_best, f_best, count, budget)
    bounds = gs.bounds(p.n)
    radius = local_radius if local_radius is not None else 10 * float(np.max(gs.spacing(p.n)))
    for pt in points:
        if pt.classification != Classification.GLOBAL_MIN:
            continue
        report.certified_values.append(pt.primal_value)
        ok = f_best >= pt.primal_value - budget
        report.checks.append((f"global: grid min {f_best:.6f} >= certified {pt.primal_value:.6f} - {budget}", ok))
        local = np.clip(np.column_stack([pt.x - radius, pt.x + radius]), bounds[:, 0], bounds[:, 1])
        k = max(3, min(gs.points_per_axis, int(round(2 * radius / np.max(gs.spacing(p.n)))) + 1))
        _, f_loc, _ = grid_min(lambda X: eval_objective(p, X), local, k, lambda X: feasibility_mask(p, X, gs.feas_tol))
        ok_loc = not (f_loc < pt.primal_value - budget)
        report.checks.append((f"local: neighbourhood min {f_loc:.6f} near x={np.round(pt.x, 6).tolist()}", ok_loc))
    if not report.consistent:
        raise CertificationContradicted("; ".join(m for m, ok in report.checks if not ok))
    return report


def scan_1d(fn: Callable, lo: float, hi: float, samples: int):
    """Uniform samples of a scalar function of one variable."""
    xs = np.linspace(lo, hi, samples)
    return xs, np.array([float(fn(np.array([x]))) for x in xs])


"""Critical-point enumeration and global-optimality certification."""

from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .assembly import (
    DualPoint,
    assemble,
    dual_value,
    eval_xi1,
    stationarity_residual,
)
from .errors import ActiveSetExplosion, SingularG
from .kkt import KKTSystem, damped_newton
from .model import Problem, eval_objective

log = logging.getLogger(__name__)

MAX_ACTIVE_SET_CONSTRAINTS = 12


class Classification(str, enum.Enum):
    GLOBAL_MIN = "GlobalMinCertified"
    BIGGEST_LOCAL_MAX = "BiggestLocalMaxCertified"
    SADDLE = "Saddle"
    DEGENERATE_MULTIPLIER = "DegenerateMultiplier"
    SINGULAR_G = "SingularG"
    UNCLASSIFIED = "Unclassified"

    def __str__(self):
        return self.value


@dataclass
class SolverConfig:
    """Seeding box, grid and tolerances for the multistart Newton search.

    ``x_box`` is either one ``(lo, hi)`` pair applied to every coordinate or
    one pair per coordinate. ``mult_box`` bounds the multiplier seeds;
    inequality multipliers are seeded on its nonnegative part.
    """

    x_box: Sequence = (-6.0, 6.0)
    mult_box: tuple[float, float] = (-2.0, 2.0)
    grid_density: int = 21
    newton_max_iter: int = 60
    newton_tol: float = 1e-10
    dedup_radius: float = 1e-6
    mu_nonzero_tol: float = 1e-8
    psd_tol: float = 1e-8
    max_seeds: int = 20000
    rng_seed: int = 0

    def __post_init__(self):
        if self.grid_density < 2:
            raise ValueError("grid_density must be >= 2")
        for name in ("newton_tol", "dedup_radius", "mu_nonzero_tol", "psd_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def x_bounds(self, n: int) -> np.ndarray:
        box = np.asarray(self.x_box, dtype=float)
        if box.shape == (2,):
            box = np.tile(box, (n, 1))
        if box.shape != (n, 2):
            raise ValueError(f"x_box must be (lo, hi) or {n} such pairs")
        return box


@dataclass
class CriticalPoint:
    x: np.ndarray
    dual: DualPoint
    primal_value: float
    dual_value: float
    xi1_value: float
    g_eigenvalues: np.ndarray
    kkt_residual_inf: float
    classification: Classification = Classification.UNCLASSIFIED
    G: Optional[np.ndarray] = None
    active: tuple = field(default_factory=tuple)

    def key(self) -> np.ndarray:
        return np.concatenate([self.x, self.dual.lam, self.dual.mu])


def seed_grid(bounds: np.ndarray, density: int, max_seeds: int, rng_seed: int = 0) -> np.ndarray:
    """Tensor grid over ``bounds`` (shape ``(k, 2)``), or uniform random samples if too large."""
    k = bounds.shape[0]
    if k == 0:
        return np.zeros((1, 0))
    if density**k <= max_seeds:
        axes = [np.linspace(lo, hi, density) for lo, hi in bounds]
        return np.array(list(itertools.product(*axes)))
    rng = np.random.default_rng(rng_seed)
    return bounds[:, 0] + rng.random((max_seeds, k)) * (bounds[:, 1] - bounds[:, 0])


def _dedup(points, radius):
    kept = []
    for pt in points:
        key = pt.key()
        if any(np.linalg.norm(key - q.key()) <= radius * (1.0 + np.linalg.norm(q.key())) for q in kept):
            continue
        kept.append(pt)
    return kept


def _sort_key(pt):
    dv = pt.dual_value
    return (np.isnan(dv), dv if not np.isnan(dv) else 0.0, tuple(pt.x))


def make_critical_point(p: Problem, x, d: DualPoint, cfg: SolverConfig, active=()) -> CriticalPoint:
    """Evaluate values, spectrum and residuals at a solved primal-dual pair."""
    x = np.asarray(x, dtype=float)
    aq = assemble(p, d)
    eig = np.linalg.eigvalsh(aq.G)
    try:
        dv = dual_value(aq)
    except SingularG:
        dv = float("nan")
    pt = CriticalPoint(
        x=x,
        dual=d,
        primal_value=float(eval_objective(p, x)),
        dual_value=dv,
        xi1_value=eval_xi1(p, x, d),
        g_eigenvalues=eig,
        kkt_residual_inf=float(np.max(np.abs(stationarity_residual(p, x, d)), initial=0.0)),
        G=aq.G,
        active=tuple(active),
    )
    pt.classification = classify(pt, cfg)
    return pt


@dataclass
class SolveStats:
    branches: int = 0
    seeds: int = 0
    converged: int = 0
    rejected: int = 0


def explore(p: Problem, cfg: SolverConfig | None = None) -> tuple[list[CriticalPoint], SolveStats]:
    """Multistart Newton over every active-set branch; returns points and seed statistics."""
    cfg = cfg or SolverConfig()
    if p.m > MAX_ACTIVE_SET_CONSTRAINTS:
        raise ActiveSetExplosion(f"{p.m} inequalities exceed the active-set cap {MAX_ACTIVE_SET_CONSTRAINTS}")
    stats = SolveStats()
    xb = cfg.x_bounds(p.n)
    lo, hi = cfg.mult_box
    lam_box = (max(lo, 0.0), hi if hi > 0 else 1.0)
    found = []
    for r in range(p.m + 1):
        for active in itertools.combinations(range(p.m), r):
            stats.branches += 1
            system = KKTSystem(p, active=active, mode="lagrange")
            bounds = np.vstack([xb, np.tile(lam_box, (len(active), 1)), np.tile((lo, hi), (p.p, 1))])
            seeds = seed_grid(bounds, cfg.grid_density, cfg.max_seeds, cfg.rng_seed)
            for s in seeds:
                stats.seeds += 1
                x0 = s[: p.n]
                z0 = system.seed(x0, s[p.n : p.n + len(active)], s[p.n + len(active) :])
                res = damped_newton(system.residual, system.jacobian, z0, cfg.newton_tol, cfg.newton_max_iter)
                if not res.converged:
                    continue
                stats.converged += 1
                pt = _accept(p, system, res.z, cfg)
                if pt is None:
                    stats.rejected += 1
                else:
                    found.append(pt)
    points = sorted(_dedup(found, cfg.dedup_radius), key=_sort_key)
    if not points:
        log.warning(
            "NoConvergence: no seed converged to a KKT point (%d seeds over %d branches, %d converged, %d rejected)",
            stats.seeds,
            stats.branches,
            stats.converged,
            stats.rejected,
        )
    return points, stats


def _accept(p: Problem, system: KKTSystem, z, cfg: SolverConfig) -> Optional[CriticalPoint]:
    x, sigma_f, sigma_g, sigma_h, lam, mu, _ = system.unpack(z)
    tol = cfg.newton_tol
    if np.any(lam < -tol):
        return None
    inactive = [i for i in range(p.m) if i not in system.active]
    if any(p.g_terms[i](x) > tol for i in inactive):
        return None
    lam = np.where(lam < 0, 0.0, lam)
    d = DualPoint(lam, mu, sigma_g, sigma_h, sigma_f)
    try:
        pt = make_critical_point(p, x.copy(), d, cfg, system.active)
    except ValueError:
        return None
    if pt.kkt_residual_inf > tol:
        return None
    return pt


def solve_critical_points(p: Problem, cfg: SolverConfig | None = None) -> list[CriticalPoint]:
    """All deduplicated KKT points found, sorted by dual value then ``x``."""
    return explore(p, cfg)[0]


def classify_signs(eig: np.ndarray, weights: np.ndarray, lam: np.ndarray, cfg: SolverConfig) -> Classification:
    """Sign test on the G spectrum and the equality-constraint weights."""
    if np.any(np.abs(weights) < cfg.mu_nonzero_tol):
        return Classification.DEGENERATE_MULTIPLIER
    if np.any(np.abs(eig) <= cfg.psd_tol):
        return Classification.SINGULAR_G
    if eig[0] > cfg.psd_tol and np.all(weights > cfg.psd_tol) and np.all(lam >= 0):
        return Classification.GLOBAL_MIN
    if eig[-1] < -cfg.psd_tol and np.all(weights < -cfg.psd_tol):
        return Classification.BIGGEST_LOCAL_MAX
    if eig[0] < -cfg.psd_tol and eig[-1] > cfg.psd_tol:
        return Classification.SADDLE
    return Classification.UNCLASSIFIED


def classify(pt: CriticalPoint, cfg: SolverConfig | None = None) -> Classification:
    cfg = cfg or SolverConfig()
    return classify_signs(np.sort(pt.g_eigenvalues), pt.dual.mu, pt.dual.lam, cfg)


def verify_gap(pt: CriticalPoint) -> float:
    """Largest pairwise gap among primal, total complementarity and dual values."""
    vals = (pt.primal_value, pt.xi1_value, pt.dual_value)
    return max(abs(a - b) for a, b in itertools.combinations(vals, 2))


def select_global(points: Sequence[CriticalPoint]) -> Optional[CriticalPoint]:
    """Certified point with the largest dual value; ties broken by lexicographic ``x``."""
    certified = [pt for pt in points if pt.classification == Classification.GLOBAL_MIN]
    if not certified:
        return None
    return min(certified, key=lambda pt: (-pt.dual_value, tuple(pt.x)))


def select_biggest_local_max(points: Sequence[CriticalPoint]) -> Optional[CriticalPoint]:
    """Among points passing the negative sign test, the one minimizing the dual value."""
    cands = [pt for pt in points if pt.classification == Classification.BIGGEST_LOCAL_MAX]
    if not cands:
        return None
    return min(cands, key=lambda pt: (pt.dual_value, tuple(pt.x)))

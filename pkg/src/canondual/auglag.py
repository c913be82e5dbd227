"""Augmented Lagrangian ``f + mu'h + |h|^2 / (2 nu)`` through canonical duality.

The penalty is canonicalized with ``xi0 = h(x)``, ``V0(xi0) = xi0^2 / (2 nu)``,
giving a dual variable ``tau = h(x) / nu`` that is exactly the multiplier
increment of the classical update ``mu <- mu + h(x) / nu``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .assembly import assemble_weighted, dual_value
from .errors import NoConvergence, SingularG, SubproblemUncertified
from .kkt import KKTSystem, damped_newton
from .model import Problem, _as_vector, eval_objective, objective_gradient
from .solver import Classification, SolverConfig, _dedup, classify_signs, seed_grid

log = logging.getLogger(__name__)


def _require_equalities(p: Problem):
    if p.p < 1:
        raise ValueError("the augmented Lagrangian needs at least one equality constraint")
    if p.m:
        raise ValueError("inequality constraints are not supported in the augmented Lagrangian")


def eval_auglag(p: Problem, x, mu, nu: float):
    """``L_nu(x, mu) = f(x) + mu'h(x) + |h(x)|^2 / (2 nu)``."""
    if not nu > 0:
        raise ValueError(f"penalty parameter must be positive, got {nu}")
    _require_equalities(p)
    x = _as_vector(x, p.n)
    mu = np.broadcast_to(np.asarray(mu, dtype=float), (p.p,))
    out = eval_objective(p, x)
    for w, t in zip(mu, p.h_terms):
        hv = t(x)
        out = out + w * hv + hv**2 / (2 * nu)
    return out


def auglag_gradient(p: Problem, x, mu, nu: float) -> np.ndarray:
    x = _as_vector(x, p.n)
    mu = np.broadcast_to(np.asarray(mu, dtype=float), (p.p,))
    grad = objective_gradient(p, x)
    for w, t in zip(mu, p.h_terms):
        grad = grad + (w + t(x) / nu) * t.gradient(x)
    return grad


@dataclass
class AugLagConfig:
    nu0: float = 5.0
    alpha: float = 0.5
    mu0: object = 1.0
    max_outer_iter: int = 50
    feasibility_tol: float = 1e-6

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.nu0 > 0:
            raise ValueError("nu0 must be positive")


@dataclass
class AugCriticalPoint:
    x: np.ndarray
    tau: np.ndarray
    mu: np.ndarray
    sigma_h: np.ndarray
    sigma_f: Optional[float]
    nu: float
    L_value: float
    dual_value: float
    G: np.ndarray
    G_eigenvalues: np.ndarray
    residual_inf: float
    classification: Classification = Classification.UNCLASSIFIED

    @property
    def mu_plus_tau(self) -> np.ndarray:
        return self.mu + self.tau

    @property
    def sigma(self) -> np.ndarray:
        """All sigma components, objective first when present."""
        head = [] if self.sigma_f is None else [self.sigma_f]
        return np.concatenate([head, self.sigma_h])

    def key(self) -> np.ndarray:
        return np.concatenate([self.x, self.mu, self.tau])


def augmented_dual_value(p: Problem, mu, tau, sigma_h, sigma_f, nu: float) -> float:
    """``P^d_nu(mu, tau, sigma) = -1/2 F'G^-1 F + k - nu |tau|^2 / 2`` with weights ``mu + tau``."""
    tau = np.asarray(tau, dtype=float)
    aq = assemble_weighted(p, sigma_f, [], [], np.asarray(mu) + tau, sigma_h)
    return dual_value(aq) - 0.5 * nu * float(tau @ tau)


def augmented_xi1(p: Problem, x, mu, tau, sigma_h, sigma_f, nu: float) -> float:
    tau = np.asarray(tau, dtype=float)
    aq = assemble_weighted(p, sigma_f, [], [], np.asarray(mu) + tau, sigma_h)
    return float(aq.value(_as_vector(x, p.n))) - 0.5 * nu * float(tau @ tau)


def _make_point(p: Problem, system: KKTSystem, z, nu: float, cfg: SolverConfig) -> AugCriticalPoint:
    x, sigma_f, _, sigma_h, _, mu, tau = system.unpack(z)
    x, mu, tau, sigma_h = x.copy(), np.array(mu, dtype=float), tau.copy(), sigma_h.copy()
    aq = assemble_weighted(p, sigma_f, [], [], mu + tau, sigma_h)
    eig = np.linalg.eigvalsh(aq.G)
    try:
        dv = dual_value(aq) - 0.5 * nu * float(tau @ tau)
    except SingularG:
        dv = float("nan")
    pt = AugCriticalPoint(
        x=x,
        tau=tau,
        mu=mu,
        sigma_h=sigma_h,
        sigma_f=sigma_f,
        nu=nu,
        L_value=float(eval_auglag(p, x, mu, nu)),
        dual_value=dv,
        G=aq.G,
        G_eigenvalues=eig,
        residual_inf=float(np.max(np.abs(system.residual(z)))),
    )
    pt.classification = classify_subproblem(pt, cfg)
    return pt


def _multistart(p: Problem, system: KKTSystem, bounds, nu, cfg: SolverConfig) -> list[AugCriticalPoint]:
    found = []
    for s in seed_grid(bounds, cfg.grid_density, cfg.max_seeds, cfg.rng_seed):
        z0 = system.seed(s[: p.n], mu=s[p.n :])
        res = damped_newton(system.residual, system.jacobian, z0, cfg.newton_tol, cfg.newton_max_iter)
        if res.converged:
            try:
                found.append(_make_point(p, system, res.z, nu, cfg))
            except ValueError:
                continue
    points = _dedup(found, cfg.dedup_radius)
    return sorted(points, key=lambda pt: (np.isnan(pt.dual_value), np.nan_to_num(pt.dual_value), tuple(pt.x)))


def solve_subproblem_dual(p: Problem, mu_k, nu: float, cfg: SolverConfig | None = None) -> list[AugCriticalPoint]:
    """Critical points of the sub-problem with fixed multiplier ``mu_k`` and penalty ``nu``.

    Unknowns are ``(x, sigma, tau)``; seeds cover ``x`` only since ``tau`` and
    ``sigma`` follow from ``x`` at initialization.
    """
    cfg = cfg or SolverConfig()
    _require_equalities(p)
    system = KKTSystem(p, mode="subproblem", nu=nu, mu_k=mu_k)
    points = _multistart(p, system, cfg.x_bounds(p.n), nu, cfg)
    if not points:
        raise NoConvergence(f"no sub-problem critical point found for mu_k={mu_k}, nu={nu}")
    return points


def classify_subproblem(pt: AugCriticalPoint, cfg: SolverConfig | None = None) -> Classification:
    """Sign test on ``G`` and ``mu + tau``: positive pair certifies the sub-problem global minimum."""
    cfg = cfg or SolverConfig()
    return classify_signs(np.sort(pt.G_eigenvalues), pt.mu_plus_tau, np.zeros(0), cfg)


def select_subproblem_global(points) -> Optional[AugCriticalPoint]:
    certified = [pt for pt in points if pt.classification == Classification.GLOBAL_MIN]
    if not certified:
        return None
    return min(certified, key=lambda pt: (-pt.dual_value, tuple(pt.x)))


def solve_augmented_dual(p: Problem, nu: float, cfg: SolverConfig | None = None) -> list[AugCriticalPoint]:
    """Critical points of the full augmented dual with ``mu`` as an unknown."""
    cfg = cfg or SolverConfig()
    _require_equalities(p)
    system = KKTSystem(p, mode="augmented", nu=nu)
    bounds = np.vstack([cfg.x_bounds(p.n), np.tile(cfg.mult_box, (p.p, 1))])
    return _multistart(p, system, bounds, nu, cfg)


def verify_tau_zero(p: Problem, nu: float, cfg: SolverConfig | None = None) -> list[tuple[AugCriticalPoint, float]]:
    """Solve the full augmented dual and report ``max |tau|`` at each critical point."""
    points = solve_augmented_dual(p, nu, cfg)
    if not points:
        raise NoConvergence(f"full augmented dual: no critical point found at nu={nu}")
    return [(pt, float(np.max(np.abs(pt.tau)))) for pt in points]


@dataclass
class OuterIterate:
    k: int
    mu: np.ndarray
    nu: float
    x: np.ndarray
    h_abs: float
    L_value: float
    dual_value: float
    tau: np.ndarray
    certified: bool


@dataclass
class OuterHistory:
    iterates: list = field(default_factory=list)
    converged: bool = False

    @property
    def mu_final(self) -> np.ndarray:
        return self.iterates[-1].mu + self.iterates[-1].tau


def outer_loop(p: Problem, cfg: AugLagConfig | None = None, scfg: SolverConfig | None = None) -> OuterHistory:
    """Classical multiplier iteration with each sub-problem solved globally.

    Every iteration solves the sub-problem at ``(mu_k, nu_k)``, takes the
    certified global minimizer (or the lowest-``L`` point, with a
    :class:`SubproblemUncertified` warning), then sets
    ``mu_{k+1} = mu_k + tau*`` and ``nu_{k+1} = alpha nu_k``. The recorded
    ``mu`` of each iterate is the multiplier the sub-problem was solved with.
    """
    cfg = cfg or AugLagConfig()
    scfg = scfg or SolverConfig()
    _require_equalities(p)
    mu = np.broadcast_to(np.asarray(cfg.mu0, dtype=float), (p.p,)).copy()
    nu = float(cfg.nu0)
    hist = OuterHistory()
    for k in range(cfg.max_outer_iter):
        points = solve_subproblem_dual(p, mu, nu, scfg)
        best = select_subproblem_global(points)
        certified = best is not None
        if best is None:
            best = min(points, key=lambda pt: pt.L_value)
            warnings.warn(
                f"outer iteration {k}: no certified sub-problem minimizer at mu={mu}, nu={nu}; using lowest L",
                SubproblemUncertified,
                stacklevel=2,
            )
        h_abs = float(np.max(np.abs(p.h(best.x))))
        hist.iterates.append(
            OuterIterate(k, mu.copy(), nu, best.x, h_abs, best.L_value, best.dual_value, best.tau.copy(), certified)
        )
        log.debug("outer %d: mu=%s nu=%g |h|=%.3e", k, mu, nu, h_abs)
        if h_abs <= cfg.feasibility_tol:
            hist.converged = True
            break
        mu = mu + best.tau
        nu = cfg.alpha * nu
    return hist

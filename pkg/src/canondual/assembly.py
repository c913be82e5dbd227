"""x-quadratic structure of the total complementarity function.

For a dual point the total complementarity function is quadratic in x::

    Xi1(x) = 1/2 x'G x - F'x + k

with ``G`` a sigma-weighted sum of operator curvatures. The canonical dual
function is its value at the unique stationary point, ``-1/2 F'G^-1 F + k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionError, SingularG
from .model import CanonicalTerm, Problem, _as_vector, eval_constraint

SINGULAR_RTOL = 1e-10


@dataclass(frozen=True)
class DualPoint:
    """Multipliers ``(lam, mu)`` and canonical dual variables ``(sigma_f, sigma_g, sigma_h)``."""

    lam: np.ndarray
    mu: np.ndarray
    sigma_g: np.ndarray
    sigma_h: np.ndarray
    sigma_f: Optional[float] = None

    def __post_init__(self):
        for name in ("lam", "mu", "sigma_g", "sigma_h"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)).reshape(-1))
        if len(self.lam) != len(self.sigma_g):
            raise DimensionError("lam and sigma_g lengths differ")
        if len(self.mu) != len(self.sigma_h):
            raise DimensionError("mu and sigma_h lengths differ")
        if self.sigma_f is not None:
            object.__setattr__(self, "sigma_f", float(self.sigma_f))

    @classmethod
    def for_problem(cls, p: Problem, lam=None, mu=None, sigma_g=None, sigma_h=None, sigma_f=None):
        """Build a dual point, filling omitted components with zeros."""
        lam = np.zeros(p.m) if lam is None else lam
        sigma_g = np.zeros(p.m) if sigma_g is None else sigma_g
        mu = np.zeros(p.p) if mu is None else mu
        sigma_h = np.zeros(p.p) if sigma_h is None else sigma_h
        if p.f_term is not None and sigma_f is None:
            sigma_f = 0.0
        d = cls(lam, mu, sigma_g, sigma_h, sigma_f)
        d.check_shape(p)
        return d

    @classmethod
    def from_canonical_maps(cls, p: Problem, x, lam=None, mu=None):
        """Dual point whose sigma components solve ``sigma = V'(Lambda(x))``."""
        x = _as_vector(x, p.n)
        return cls.for_problem(
            p,
            lam=lam,
            mu=mu,
            sigma_g=[t.sigma(x) for t in p.g_terms],
            sigma_h=[t.sigma(x) for t in p.h_terms],
            sigma_f=None if p.f_term is None else p.f_term.sigma(x),
        )

    def check_shape(self, p: Problem):
        if len(self.lam) != p.m or len(self.mu) != p.p:
            raise DimensionError(
                f"dual point has (m, p) = ({len(self.lam)}, {len(self.mu)}), problem has ({p.m}, {p.p})"
            )
        if (self.sigma_f is None) != (p.f_term is None):
            raise DimensionError("sigma_f must be given iff the problem has an objective term")

    def is_feasible(self, mu_nonzero_tol: float = 1e-8) -> bool:
        """Membership in the dual feasible set: ``lam >= 0`` and ``mu != 0``."""
        return bool(np.all(self.lam >= 0) and np.all(np.abs(self.mu) >= mu_nonzero_tol))


@dataclass(frozen=True)
class AssembledQuadratic:
    G: np.ndarray
    F: np.ndarray
    k: float

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * x @ self.G @ x - self.F @ x + self.k

    def is_singular(self) -> bool:
        smin = np.linalg.svd(self.G, compute_uv=False)[-1]
        return bool(smin < SINGULAR_RTOL * (1.0 + np.max(np.abs(self.G))))


def assemble_weighted(
    p: Problem,
    sigma_f: Optional[float],
    w_g: Sequence[float],
    sigma_g: Sequence[float],
    w_h: Sequence[float],
    sigma_h: Sequence[float],
) -> AssembledQuadratic:
    """Assemble ``(G, F, k)`` for arbitrary constraint weights.

    ``assemble`` uses ``(lam, mu)`` as weights; the augmented Lagrangian
    variant uses ``mu_k + tau`` for the equality terms.
    """
    G = p.A.copy()
    F = p.c.copy()
    k = 0.0
    weighted: list[tuple[float, float, CanonicalTerm]] = []
    if p.f_term is not None:
        weighted.append((1.0, sigma_f, p.f_term))
    weighted += list(zip(w_g, sigma_g, p.g_terms))
    weighted += list(zip(w_h, sigma_h, p.h_terms))
    for w, s, term in weighted:
        op = term.lambda_op
        ws = w * s
        G += ws * op.Q
        F -= ws * op.b
        k += ws * op.alpha - w * term.v.conjugate(s)
    return AssembledQuadratic(G, F, float(k))


def assemble(p: Problem, d: DualPoint) -> AssembledQuadratic:
    d.check_shape(p)
    return assemble_weighted(p, d.sigma_f, d.lam, d.sigma_g, d.mu, d.sigma_h)


def solve_symmetric(G: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Solve ``G x = F`` for symmetric, possibly indefinite ``G``."""
    try:
        return scipy.linalg.solve(G, F, assume_a="sym")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
        return scipy.linalg.solve(G, F)


def primal_from_dual(aq: AssembledQuadratic) -> np.ndarray:
    """Unique stationary point ``x = G^-1 F``; raises :class:`SingularG`."""
    if aq.is_singular():
        raise SingularG(f"G is numerically singular (eigenvalues {np.linalg.eigvalsh(aq.G)})")
    return solve_symmetric(aq.G, aq.F)


def dual_value(aq: AssembledQuadratic) -> float:
    x = primal_from_dual(aq)
    return float(-0.5 * aq.F @ x + aq.k)


def eval_dual(p: Problem, d: DualPoint) -> float:
    """Canonical dual function ``-1/2 F'G^-1 F + k``."""
    return dual_value(assemble(p, d))


def eval_xi1(p: Problem, x, d: DualPoint) -> float:
    """Total complementarity function evaluated term by term (not via ``G``)."""
    d.check_shape(p)
    x = _as_vector(x, p.n)
    out = -p.U(x)
    if p.f_term is not None:
        out += d.sigma_f * p.f_term.xi(x) - p.f_term.v.conjugate(d.sigma_f)
    for w, s, t in zip(d.lam, d.sigma_g, p.g_terms):
        out += w * (s * t.xi(x) - t.v.conjugate(s))
    for w, s, t in zip(d.mu, d.sigma_h, p.h_terms):
        out += w * (s * t.xi(x) - t.v.conjugate(s))
    return float(out)


def xi1_gradient(p: Problem, x, d: DualPoint) -> np.ndarray:
    aq = assemble(p, d)
    x = _as_vector(x, p.n)
    return aq.G @ x - aq.F


def stationarity_residual(p: Problem, x, d: DualPoint) -> np.ndarray:
    """Concatenated first-order residuals at ``(x, d)``.

    Order: ``Gx - F`` (n), canonical-map residuals for f, g, h terms,
    equality values ``h_j(x)``, complementarity ``min(lam_i, -g_i(x))``.
    """
    d.check_shape(p)
    x = _as_vector(x, p.n)
    aq = assemble(p, d)
    parts = [aq.G @ x - aq.F]
    if p.f_term is not None:
        parts.append([d.sigma_f - p.f_term.sigma(x)])
    parts.append([s - t.sigma(x) for s, t in zip(d.sigma_g, p.g_terms)])
    parts.append([s - t.sigma(x) for s, t in zip(d.sigma_h, p.h_terms)])
    parts.append([eval_constraint(t, x) for t in p.h_terms])
    parts.append([min(w, -eval_constraint(t, x)) for w, t in zip(d.lam, p.g_terms)])
    return np.concatenate([np.asarray(part, dtype=float).reshape(-1) for part in parts])

"""Problem representation: quadratic operators, canonical functions, problems.

A problem in this package has the form::

    min  V_f(Lf(x)) + 1/2 x'Ax - c'x
    s.t. V_gi(Lgi(x)) <= 0,   V_hj(Lhj(x)) = 0

where every ``L`` is a scalar quadratic map and every ``V`` is a convex
canonical function with a closed-form Legendre conjugate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, DomainError


def _as_vector(x, n=None, name="x"):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if n is not None and x.shape[-1] != n:
        raise DimensionError(f"{name} has dimension {x.shape[-1]}, expected {n}")
    return x


@dataclass(frozen=True, eq=False)
class QuadraticOperator:
    """Scalar quadratic map ``xi = 1/2 x'Qx + b'x + alpha``."""

    Q: np.ndarray
    b: np.ndarray
    alpha: float = 0.0

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise DimensionError(f"Q must be square, got shape {Q.shape}")
        if b.ndim != 1 or b.shape[0] != Q.shape[0]:
            raise DimensionError(f"b has shape {b.shape}, expected ({Q.shape[0]},)")
        if Q.shape[0] < 1:
            raise DimensionError("operator dimension must be >= 1")
        if np.max(np.abs(Q - Q.T)) > 0:
            raise ValueError("Q must be exactly symmetric")
        Q.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def n(self) -> int:
        return self.b.shape[0]

    @classmethod
    def constant(cls, n: int, alpha: float) -> "QuadraticOperator":
        return cls(np.zeros((n, n)), np.zeros(n), alpha)

    def __call__(self, x):
        return eval_operator(self, x)

    def gradient(self, x) -> np.ndarray:
        x = _as_vector(x, self.n)
        return x @ self.Q + self.b


def eval_operator(op: QuadraticOperator, x):
    """Evaluate ``op`` at a point, or row-wise at an ``(N, n)`` batch."""
    x = _as_vector(x, op.n)
    quad = 0.5 * np.einsum("...i,ij,...j->...", x, op.Q, x)
    out = quad + x @ op.b + op.alpha
    return float(out) if np.ndim(out) == 0 else out


class CanonicalFunction:
    """Convex scalar function with invertible derivative and closed-form conjugate.

    Subclasses implement :meth:`value`, :meth:`derivative`, :meth:`conjugate`,
    :meth:`conjugate_derivative` and the two domain predicates. All methods
    accept scalars or numpy arrays. :meth:`second_derivative` is used for
    Newton Jacobians; the default is a central difference of the derivative.
    """

    kind = "abstract"

    def value(self, xi):
        raise NotImplementedError

    def derivative(self, xi):
        raise NotImplementedError

    def second_derivative(self, xi):
        h = 1e-6 * (1.0 + np.abs(xi))
        return (self.derivative(xi + h) - self.derivative(xi - h)) / (2 * h)

    def conjugate(self, sigma):
        raise NotImplementedError

    def conjugate_derivative(self, sigma):
        raise NotImplementedError

    def in_domain(self, xi) -> bool:
        return bool(np.all(np.isfinite(xi)))

    def in_conjugate_domain(self, sigma) -> bool:
        return bool(np.all(np.isfinite(sigma)))

    def params(self) -> dict:
        return {}

    def _check_xi(self, xi):
        if not self.in_domain(xi):
            raise DomainError(f"{self!r}: xi={xi!r} outside domain")

    def _check_sigma(self, sigma):
        if not self.in_conjugate_domain(sigma):
            raise DomainError(f"{self!r}: sigma={sigma!r} outside conjugate domain")


class ShiftedQuadratic(CanonicalFunction):
    """``V(xi) = a/2 (xi - d)^2 + e`` with conjugate ``sigma^2/(2a) + d sigma - e``."""

    kind = "shifted_quadratic"

    def __init__(self, a: float = 1.0, d: float = 0.0, e: float = 0.0):
        if not a > 0:
            raise ValueError(f"ShiftedQuadratic requires a > 0, got {a}")
        self.a = float(a)
        self.d = float(d)
        self.e = float(e)

    def __repr__(self):
        return f"ShiftedQuadratic(a={self.a!r}, d={self.d!r}, e={self.e!r})"

    def params(self):
        return {"a": self.a, "d": self.d, "e": self.e}

    def value(self, xi):
        self._check_xi(xi)
        return 0.5 * self.a * (xi - self.d) ** 2 + self.e

    def derivative(self, xi):
        self._check_xi(xi)
        return self.a * (xi - self.d)

    def second_derivative(self, xi):
        return self.a * np.ones_like(xi) if np.ndim(xi) else self.a

    def conjugate(self, sigma):
        self._check_sigma(sigma)
        return sigma**2 / (2 * self.a) + self.d * sigma - self.e

    def conjugate_derivative(self, sigma):
        self._check_sigma(sigma)
        return sigma / self.a + self.d


class Exponential(CanonicalFunction):
    """``V(xi) = exp(xi)``; conjugate ``sigma log sigma - sigma`` on ``sigma > 0``."""

    kind = "exponential"

    def __repr__(self):
        return "Exponential()"

    def value(self, xi):
        self._check_xi(xi)
        return np.exp(xi)

    def derivative(self, xi):
        self._check_xi(xi)
        return np.exp(xi)

    def second_derivative(self, xi):
        return np.exp(xi)

    def in_conjugate_domain(self, sigma):
        sigma = np.asarray(sigma, dtype=float)
        return bool(np.all(np.isfinite(sigma)) and np.all(sigma > 0))

    def conjugate(self, sigma):
        self._check_sigma(sigma)
        return sigma * np.log(sigma) - sigma

    def conjugate_derivative(self, sigma):
        self._check_sigma(sigma)
        return np.log(sigma)


CATALOG = {cls.kind: cls for cls in (ShiftedQuadratic, Exponential)}


def conjugate_roundtrip_check(v: CanonicalFunction, xi: float) -> float:
    """Fenchel-Young equality residual ``|V(xi) + V*(V'(xi)) - xi V'(xi)|``."""
    sigma = v.derivative(xi)
    return abs(v.value(xi) + v.conjugate(sigma) - xi * sigma)


@dataclass(frozen=True, eq=False)
class CanonicalTerm:
    """Composite ``V(Lambda(x))``."""

    v: CanonicalFunction
    lambda_op: QuadraticOperator

    @property
    def n(self) -> int:
        return self.lambda_op.n

    def xi(self, x):
        return eval_operator(self.lambda_op, x)

    def __call__(self, x):
        return eval_constraint(self, x)

    def sigma(self, x):
        """Canonical dual map ``V'(Lambda(x))``."""
        return self.v.derivative(self.xi(x))

    def gradient(self, x) -> np.ndarray:
        return self.sigma(x) * self.lambda_op.gradient(x)


def eval_constraint(term: CanonicalTerm, x):
    return term.v.value(term.xi(x))


@dataclass(frozen=True, eq=False)
class Problem:
    """Quadratic core ``1/2 x'Ax - c'x`` plus canonical objective and constraint terms.

    ``g_terms`` are inequalities ``g_i(x) <= 0``; ``h_terms`` are equalities.
    """

    A: np.ndarray
    c: np.ndarray
    f_term: Optional[CanonicalTerm] = None
    g_terms: Sequence[CanonicalTerm] = field(default_factory=tuple)
    h_terms: Sequence[CanonicalTerm] = field(default_factory=tuple)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        if A.shape != (c.shape[0], c.shape[0]):
            raise DimensionError(f"A has shape {A.shape}, c has length {c.shape[0]}")
        if c.shape[0] < 1:
            raise DimensionError("problem dimension must be >= 1")
        if np.max(np.abs(A - A.T)) > 0:
            raise ValueError("A must be exactly symmetric")
        A.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "g_terms", tuple(self.g_terms))
        object.__setattr__(self, "h_terms", tuple(self.h_terms))
        n = c.shape[0]
        for term in self.all_terms():
            if term.n != n:
                raise DimensionError(f"operator dimension {term.n} != problem dimension {n}")

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m(self) -> int:
        return len(self.g_terms)

    @property
    def p(self) -> int:
        return len(self.h_terms)

    def all_terms(self):
        if self.f_term is not None:
            yield self.f_term
        yield from self.g_terms
        yield from self.h_terms

    def U(self, x):
        """``c'x - 1/2 x'Ax``, the negated quadratic core."""
        x = _as_vector(x, self.n)
        if x.ndim == 1:
            return -(0.5 * x @ self.A @ x - self.c @ x)
        return -(0.5 * np.einsum("...i,ij,...j->...", x, self.A, x) - x @ self.c)

    def h(self, x) -> np.ndarray:
        return np.array([eval_constraint(t, x) for t in self.h_terms], dtype=float)

    def g(self, x) -> np.ndarray:
        return np.array([eval_constraint(t, x) for t in self.g_terms], dtype=float)


def eval_objective(p: Problem, x):
    x = _as_vector(x, p.n)
    out = -p.U(x)
    if p.f_term is not None:
        out = out + eval_constraint(p.f_term, x)
    return float(out) if np.ndim(out) == 0 else out


def objective_gradient(p: Problem, x) -> np.ndarray:
    x = _as_vector(x, p.n)
    grad = p.A @ x - p.c
    if p.f_term is not None:
        grad = grad + p.f_term.gradient(x)
    return grad


def lagrangian(p: Problem, x, lam=(), mu=()):
    """Classical Lagrangian ``f + lam'g + mu'h``."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    out = eval_objective(p, x)
    for w, t in zip(lam, p.g_terms):
        out = out + w * eval_constraint(t, x)
    for w, t in zip(mu, p.h_terms):
        out = out + w * eval_constraint(t, x)
    return out


def double_well_example(q=1.0, c=1.0, d=6.0, e=15.0) -> Problem:
    """One-dimensional benchmark ``min q/2 x^2 - c x  s.t. 1/2 (x^2/2 - d)^2 - e = 0``.

    The constraint is a double well written as ``V(xi)`` with ``xi = x^2/2``.
    """
    op = QuadraticOperator([[1.0]], [0.0], 0.0)
    h = CanonicalTerm(ShiftedQuadratic(1.0, d, -e), op)
    return Problem([[q]], [c], h_terms=[h])



"""Square first-order systems of the total complementarity function and a damped Newton solver.

Three variants share one layout::

    z = [x (n) | sigma_f (0/1) | sigma_g (m) | sigma_h (p) | lam_S (|S|) | mu (p)? | tau (p)?]

``lagrange``: equality weights are ``mu`` (unknown).
``subproblem``: equality weights are ``mu_k + tau`` with ``mu_k`` fixed.
``augmented``: equality weights are ``mu + tau``, both unknown.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import Problem

MODES = ("lagrange", "subproblem", "augmented")


class KKTSystem:
    def __init__(
        self,
        p: Problem,
        active: Sequence[int] = (),
        mode: str = "lagrange",
        nu: float | None = None,
        mu_k=None,
    ):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        if mode != "lagrange":
            if nu is None or not nu > 0:
                raise ValueError(f"penalty parameter must be positive, got {nu}")
            if p.m:
                raise ValueError("augmented Lagrangian systems support equality constraints only")
        self.p = p
        self.mode = mode
        self.active = tuple(sorted(active))
        self.nu = None if nu is None else float(nu)
        self.mu_k = None if mu_k is None else np.broadcast_to(np.asarray(mu_k, dtype=float), (p.p,)).copy()
        if mode == "subproblem" and self.mu_k is None:
            raise ValueError("subproblem mode requires mu_k")

        n, m, q = p.n, p.m, p.p
        nf = 0 if p.f_term is None else 1
        self.sl_x = slice(0, n)
        i = n
        self.sl_sf = slice(i, i + nf)
        i += nf
        self.sl_sg = slice(i, i + m)
        i += m
        self.sl_sh = slice(i, i + q)
        i += q
        self.sl_lam = slice(i, i + len(self.active))
        i += len(self.active)
        nmu = q if mode in ("lagrange", "augmented") else 0
        self.sl_mu = slice(i, i + nmu)
        i += nmu
        ntau = q if mode in ("subproblem", "augmented") else 0
        self.sl_tau = slice(i, i + ntau)
        i += ntau
        self.size = i

    # packing ---------------------------------------------------------------

    def unpack(self, z):
        p = self.p
        x = z[self.sl_x]
        lam = np.zeros(p.m)
        lam[list(self.active)] = z[self.sl_lam]
        sigma_f = z[self.sl_sf][0] if p.f_term is not None else None
        if self.sl_mu.stop > self.sl_mu.start:
            mu = z[self.sl_mu]
        else:
            mu = self.mu_k if self.mu_k is not None else np.zeros(p.p)
        tau = z[self.sl_tau] if self.sl_tau.stop > self.sl_tau.start else np.zeros(p.p)
        return x, sigma_f, z[self.sl_sg], z[self.sl_sh], lam, mu, tau

    def seed(self, x, lam_active=(), mu=()):
        """Initial vector with sigma set by the canonical maps at ``x``."""
        p = self.p
        z = np.zeros(self.size)
        x = np.asarray(x, dtype=float)
        z[self.sl_x] = x
        if p.f_term is not None:
            z[self.sl_sf] = p.f_term.sigma(x)
        z[self.sl_sg] = [t.sigma(x) for t in p.g_terms]
        z[self.sl_sh] = [t.sigma(x) for t in p.h_terms]
        z[self.sl_lam] = lam_active
        if self.sl_mu.stop > self.sl_mu.start:
            z[self.sl_mu] = mu
        if self.sl_tau.stop > self.sl_tau.start:
            z[self.sl_tau] = p.h(x) / self.nu
        return z

    # residual and Jacobian -------------------------------------------------

    def _terms(self, z):
        """Yield ``(term, sigma, weight, sigma_index)`` for every canonical term."""
        p = self.p
        x, sigma_f, sigma_g, sigma_h, lam, mu, tau = self.unpack(z)
        w_h = mu + tau
        out = []
        if p.f_term is not None:
            out.append((p.f_term, sigma_f, 1.0, self.sl_sf.start))
        for i, t in enumerate(p.g_terms):
            out.append((t, sigma_g[i], lam[i], self.sl_sg.start + i))
        for j, t in enumerate(p.h_terms):
            out.append((t, sigma_h[j], w_h[j], self.sl_sh.start + j))
        return x, out

    def residual(self, z) -> np.ndarray:
        p = self.p
        x, terms = self._terms(z)
        r = np.empty(self.size)
        rx = p.A @ x - p.c
        for t, s, w, k in terms:
            rx = rx + w * s * t.lambda_op.gradient(x)
            r[k] = s - t.v.derivative(t.xi(x))
        r[self.sl_x] = rx
        for row, i in zip(range(self.sl_lam.start, self.sl_lam.stop), self.active):
            r[row] = p.g_terms[i](x)
        hx = p.h(x)
        if self.sl_mu.stop > self.sl_mu.start:
            r[self.sl_mu] = hx
        if self.sl_tau.stop > self.sl_tau.start:
            _, _, _, _, _, _, tau = self.unpack(z)
            r[self.sl_tau] = hx - self.nu * tau
        return r

    def jacobian(self, z) -> np.ndarray:
        p = self.p
        n = p.n
        x, terms = self._terms(z)
        J = np.zeros((self.size, self.size))
        G = p.A.copy()
        grads = {}
        for t, s, w, k in terms:
            op = t.lambda_op
            gl = op.gradient(x)
            grads[id(t)] = gl
            G += w * s * op.Q
            J[:n, k] = w * gl
            xi = t.xi(x)
            J[k, :n] = -t.v.second_derivative(xi) * gl
            J[k, k] = 1.0
        J[:n, :n] = G
        # columns of the constraint weights in the x-rows
        for col, i in zip(range(self.sl_lam.start, self.sl_lam.stop), self.active):
            t = p.g_terms[i]
            J[:n, col] = z[self.sl_sg][i] * grads[id(t)]
            J[col, :n] = t.gradient(x)
        sigma_h = z[self.sl_sh]
        for j, t in enumerate(p.h_terms):
            dh = t.gradient(x)
            col_dir = sigma_h[j] * grads[id(t)]
            if self.sl_mu.stop > self.sl_mu.start:
                col = self.sl_mu.start + j
                J[:n, col] = col_dir
                J[col, :n] = dh
            if self.sl_tau.stop > self.sl_tau.start:
                col = self.sl_tau.start + j
                J[:n, col] = col_dir
                J[col, :n] = dh
                J[col, col] = -self.nu
        return J


@dataclass
class NewtonResult:
    z: np.ndarray
    residual_inf: float
    iterations: int
    converged: bool


def damped_newton(fun, jac, z0, tol=1e-10, max_iter=50, shrink=0.5, max_backtracks=30) -> NewtonResult:
    """Newton's method with backtracking on the residual infinity norm."""
    z = np.array(z0, dtype=float)
    try:
        r = fun(z)
    except (ValueError, FloatingPointError):
        return NewtonResult(z, np.inf, 0, False)
    nr = np.max(np.abs(r)) if r.size else 0.0
    for it in range(max_iter):
        if nr <= tol:
            return NewtonResult(z, nr, it, True)
        J = jac(z)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -r, rcond=None)[0]
        if not np.all(np.isfinite(step)):
            break
        t = 1.0
        for _ in range(max_backtracks + 1):
            z_new = z + t * step
            try:
                r_new = fun(z_new)
                nr_new = np.max(np.abs(r_new))
            except (ValueError, FloatingPointError):
                nr_new = np.inf
            if np.isfinite(nr_new) and nr_new < nr:
                break
            t *= shrink
        else:
            return NewtonResult(z, nr, it, False)
        z, r, nr = z_new, r_new, nr_new
    return NewtonResult(z, nr, max_iter, nr <= tol)

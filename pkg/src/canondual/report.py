"""Run reports: JSON documents and fixed-width tables."""

from __future__ import annotations

import numpy as np

from .assembly import DualPoint
from .solver import Classification, CriticalPoint, verify_gap

CAVEATS = [
    "global-minimum certificates assume the positive dual feasible set is convex; this is not checked",
    "biggest-local-maximum labels are a sign test on G and the multipliers",
]


def _floats(a) -> list:
    return [float(v) for v in np.atleast_1d(a)]


def _fmt(v, width=9) -> str:
    if v is None:
        return "-".rjust(width)
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.size == 0:
        return "-".rjust(width)
    s = ",".join("nan" if np.isnan(a) else f"{a:.4f}" for a in arr)
    return " " + s.rjust(width - 1)


def critical_point_row(pt: CriticalPoint, gap_tol: float) -> dict:
    gap = verify_gap(pt)
    d = pt.dual
    return {
        "x": _floats(pt.x),
        "lambda": _floats(d.lam) if d.lam.size else [],
        "mu": _floats(d.mu) if d.mu.size else [],
        "sigma_f": d.sigma_f,
        "sigma_g": _floats(d.sigma_g) if d.sigma_g.size else [],
        "sigma_h": _floats(d.sigma_h) if d.sigma_h.size else [],
        "f": pt.primal_value,
        "P_d": None if np.isnan(pt.dual_value) else pt.dual_value,
        "xi1": pt.xi1_value,
        "gap": None if np.isnan(gap) else gap,
        "G_eig_min": float(pt.g_eigenvalues[0]),
        "G_eig_max": float(pt.g_eigenvalues[-1]),
        "kkt_residual_inf": pt.kkt_residual_inf,
        "classification": str(pt.classification),
        "flagged": bool(np.isnan(gap) or gap > gap_tol * (1 + abs(pt.primal_value))),
    }


def point_from_row(row: dict) -> CriticalPoint:
    """Rebuild a :class:`CriticalPoint` from a JSON report row (spectrum extremes only)."""
    d = DualPoint(row["lambda"], row["mu"], row["sigma_g"], row["sigma_h"], row["sigma_f"])
    dv = row["P_d"]
    return CriticalPoint(
        x=np.asarray(row["x"], dtype=float),
        dual=d,
        primal_value=row["f"],
        dual_value=float("nan") if dv is None else dv,
        xi1_value=row["xi1"],
        g_eigenvalues=np.array([row["G_eig_min"], row["G_eig_max"]]),
        kkt_residual_inf=row["kkt_residual_inf"],
        classification=Classification(row["classification"]),
    )


def solve_table(rows: list[dict]) -> str:
    head = f"{'':>4}{'x':>10}{'lambda':>10}{'mu':>10}{'sigma':>10}{'f(x)':>10}{'P^d':>10}{'G min':>10}{'G max':>10}  class"
    lines = [head, "-" * len(head)]
    for i, r in enumerate(rows, 1):
        sigma = ([] if r["sigma_f"] is None else [r["sigma_f"]]) + r["sigma_g"] + r["sigma_h"]
        lines.append(
            f"{i:>4}{_fmt(r['x'], 10)}{_fmt(r['lambda'], 10)}{_fmt(r['mu'], 10)}{_fmt(sigma, 10)}"
            f"{_fmt(r['f'], 10)}{_fmt(r['P_d'], 10)}{_fmt(r['G_eig_min'], 10)}{_fmt(r['G_eig_max'], 10)}"
            f"  {r['classification']}{' (gap flagged)' if r['flagged'] else ''}"
        )
    return "\n".join(lines)


def aug_row(pt) -> dict:
    return {
        "x": _floats(pt.x),
        "tau": _floats(pt.tau),
        "sigma": _floats(pt.sigma),
        "L": pt.L_value,
        "P_d": None if np.isnan(pt.dual_value) else pt.dual_value,
        "G_eig_min": float(pt.G_eigenvalues[0]),
        "G_eig_max": float(pt.G_eigenvalues[-1]),
        "mu_plus_tau": _floats(pt.mu_plus_tau),
        "classification": str(pt.classification),
    }


def aug_table(rows: list[dict]) -> str:
    head = f"{'':>4}{'x':>10}{'tau':>10}{'sigma':>10}{'L':>10}{'P^d':>10}{'G min':>10}{'G max':>10}{'mu+tau':>10}  class"
    lines = [head, "-" * len(head)]
    for i, r in enumerate(rows, 1):
        lines.append(
            f"{i:>4}{_fmt(r['x'], 10)}{_fmt(r['tau'], 10)}{_fmt(r['sigma'], 10)}{_fmt(r['L'], 10)}"
            f"{_fmt(r['P_d'], 10)}{_fmt(r['G_eig_min'], 10)}{_fmt(r['G_eig_max'], 10)}"
            f"{_fmt(r['mu_plus_tau'], 10)}  {r['classification']}"
        )
    return "\n".join(lines)


def history_row(it) -> dict:
    return {
        "k": it.k,
        "mu": _floats(it.mu),
        "nu": it.nu,
        "x": _floats(it.x),
        "h_abs": it.h_abs,
        "L": it.L_value,
        "P_d": None if np.isnan(it.dual_value) else it.dual_value,
        "tau": _floats(it.tau),
        "mu_next": _floats(it.mu + it.tau),
        "certified": it.certified,
    }


def history_table(rows: list[dict]) -> str:
    head = f"{'k':>4}{'mu_k':>12}{'nu_k':>10}{'x_k':>10}{'|h(x_k)|':>12}{'L':>10}{'P^d':>10}{'mu_k+1':>12}  certified"
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append(
            f"{r['k']:>4}{_fmt(r['mu'], 12)}{_fmt(r['nu'], 10)}{_fmt(r['x'], 10)}{r['h_abs']:>12.4e}"
            f"{_fmt(r['L'], 10)}{_fmt(r['P_d'], 10)}{_fmt(r['mu_next'], 12)}  {'yes' if r['certified'] else 'no'}"
        )
    return "\n".join(lines)

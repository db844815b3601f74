"""Greedy sparsity-aware baselines: OMP, HTP, IHT (plain/adaptive), CoSaMP.

All methods take the target sparsity T as an input (unlike the continuation
solver, which never sees it), consume the same operator/data pair, and emit
the same SolveReport shape as the continuation solver.
"""

import math
from dataclasses import dataclass

import numpy as np

from .lsq import solve_direct
from .pdasc import CONVERGED, MAX_ITERS, LambdaRecord, SolveReport

__all__ = ["GreedyConfig", "omp", "htp", "iht", "cosamp", "keep_largest"]


@dataclass
class GreedyConfig:
    T: int
    max_iters: int | None = None   # per-method default when None
    tol: float = 0.0               # residual level that counts as converged
    step_size: float = 1.0         # IHT/HTP merit step
    step_policy: str = "fixed"     # IHT: "fixed" | "adaptive"

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("target sparsity T must be >= 1")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.step_policy not in ("fixed", "adaptive"):
            raise ValueError(f"unknown step policy {self.step_policy!r}")


def keep_largest(v, T):
    """Zero all but the T largest-magnitude entries (stable, lowest index wins ties)."""
    v = np.asarray(v, dtype=float)
    if T >= v.size:
        return v.copy()
    order = np.argsort(-np.abs(v), kind="stable")
    out = np.zeros_like(v)
    keep = order[:T]
    out[keep] = v[keep]
    return out


def _top_indices(v, T):
    return np.sort(np.argsort(-np.abs(v), kind="stable")[:T])


def omp(op, y, config, truth=None):
    """Orthogonal matching pursuit: grow the support by the best-correlated
    column, re-solve, repeat T times (or stop early at the residual tolerance)."""
    if config.T > op.n:
        raise ValueError(f"OMP needs T <= n, got T={config.T} > n={op.n}")
    y = np.asarray(y, dtype=float)
    limit = config.T if config.max_iters is None else min(config.T, config.max_iters)
    support = []
    x = np.zeros(op.p)
    r = y.copy()
    records = []
    for it in range(1, limit + 1):
        corr = np.abs(op.adjoint_apply(r))
        corr[support] = -np.inf
        support.append(int(np.argmax(corr)))
        sol = solve_direct(op, support, y)
        x = np.zeros(op.p)
        x[np.sort(support)] = sol.x_active
        r = sol.residual
        records.append(_iter_record(it, x, r, truth))
        if float(np.linalg.norm(r)) <= config.tol:
            break
    status = CONVERGED if (len(support) == config.T or np.linalg.norm(r) <= config.tol) \
        else MAX_ITERS
    return _report(x, records, status, "omp")


def htp(op, y, config, truth=None, x0=None):
    """Hard thresholding pursuit: select the T largest of |x + mu d|, solve on
    that set, repeat until the selection is a fixed point."""
    y = np.asarray(y, dtype=float)
    x = np.zeros(op.p) if x0 is None else np.asarray(x0, dtype=float).copy()
    limit = 50 if config.max_iters is None else config.max_iters
    prev = None
    records = []
    status = MAX_ITERS
    for it in range(1, limit + 1):
        d = op.dual(y, x)
        selected = _top_indices(x + config.step_size * d, config.T)
        if prev is not None and np.array_equal(selected, prev):
            status = CONVERGED
            break
        sol = solve_direct(op, selected, y)
        x = np.zeros(op.p)
        x[selected] = sol.x_active
        prev = selected
        records.append(_iter_record(it, x, sol.residual, truth))
        if float(np.linalg.norm(sol.residual)) <= config.tol:
            status = CONVERGED
            break
    return _report(x, records, status, "htp")


def iht(op, y, config, truth=None, x0=None):
    """Iterative hard thresholding: x <- keep_largest(x + mu d, T).

    The fixed policy uses mu = step_size (1 works for normalized columns); the
    adaptive policy picks the steepest-descent step on the current support and
    halves it until the residual does not increase, so accepted steps never
    push the residual up.
    """
    y = np.asarray(y, dtype=float)
    x = np.zeros(op.p) if x0 is None else np.asarray(x0, dtype=float).copy()
    limit = 100 if config.max_iters is None else config.max_iters
    records = []
    status = MAX_ITERS
    res_norm = float(np.linalg.norm(y - op.apply(x)))
    for it in range(1, limit + 1):
        g = op.dual(y, x)
        if config.step_policy == "fixed":
            proposal = keep_largest(x + config.step_size * g, config.T)
        else:
            proposal, accepted = _adaptive_step(op, y, x, g, config.T, res_norm)
            if not accepted:
                status = CONVERGED  # no step of any size improves the residual
                break
        new_norm = float(np.linalg.norm(y - op.apply(proposal)))
        moved = not np.array_equal(proposal, x)
        x = proposal
        records.append(_iter_record(it, x, y - op.apply(x), truth))
        res_norm = new_norm
        if res_norm <= config.tol or not moved:
            status = CONVERGED
            break
    return _report(x, records, status, "iht" if config.step_policy == "fixed" else "aiht")


def _adaptive_step(op, y, x, g, T, res_norm):
    support = np.flatnonzero(x)
    if support.size == 0:
        support = _top_indices(g, T)
    g_s = np.zeros(op.p)
    g_s[support] = g[support]
    denom = float(np.linalg.norm(op.apply(g_s))) ** 2
    mu = float(g_s @ g_s) / denom if denom > 0 else 1.0
    for _ in range(40):
        proposal = keep_largest(x + mu * g, T)
        if float(np.linalg.norm(y - op.apply(proposal))) <= res_norm:
            return proposal, True
        mu *= 0.5
    return x, False


def cosamp(op, y, config, truth=None):
    """CoSaMP: merge the support with the top 2T of the dual, solve on the
    merged set, prune to the T largest."""
    y = np.asarray(y, dtype=float)
    x = np.zeros(op.p)
    r = y.copy()
    limit = 50 if config.max_iters is None else config.max_iters
    records = []
    status = MAX_ITERS
    for it in range(1, limit + 1):
        merged = np.union1d(np.flatnonzero(x), _top_indices(op.adjoint_apply(r), 2 * config.T))
        if merged.size > op.n:
            merged = _top_indices(op.adjoint_apply(r), op.n)  # keep the solve overdetermined
        sol = solve_direct(op, merged, y)
        z = np.zeros(op.p)
        z[np.sort(merged)] = sol.x_active
        new_x = keep_largest(z, config.T)
        r = y - op.apply(new_x)
        unchanged = np.array_equal(new_x, x)
        x = new_x
        records.append(_iter_record(it, x, r, truth))
        if float(np.linalg.norm(r)) <= config.tol or unchanged:
            status = CONVERGED
            break
    return _report(x, records, status, "cosamp")


def _iter_record(it, x, residual, truth):
    support = np.flatnonzero(x)
    overlap = excess = None
    if truth is not None:
        true_set = set(int(i) for i in truth.support)
        inside = sum(1 for i in support if int(i) in true_set)
        overlap, excess = inside, int(support.size) - inside
    return LambdaRecord(k=it, lam=math.nan, active_size=int(support.size), inner_iters=1,
                        residual=float(np.linalg.norm(residual)),
                        overlap_true=overlap, excess_outside_true=excess)


def _report(x, records, status, solver):
    return SolveReport(x_final=x, support_final=np.flatnonzero(x), lam_final=None,
                       records=records, status=status, solver=solver)

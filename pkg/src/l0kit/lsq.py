"""Restricted least squares on an active set: direct Cholesky and warm-started CG."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

__all__ = ["SingularGramError", "RestrictedLsqSolution", "solve_direct", "solve_cg"]

# Pivot threshold below which the Gram factorization is declared singular.
GRAM_PIVOT_TOL = 1e-12


class SingularGramError(RuntimeError):
    """The Gram matrix on the active set is numerically singular.

    Carries the offending set size; the continuation driver attaches the
    lambda and active set it was working on.
    """

    def __init__(self, set_size, lam=None, active=None):
        super().__init__(f"singular Gram matrix on an active set of size {set_size}")
        self.set_size = set_size
        self.lam = lam
        self.active = active


@dataclass
class RestrictedLsqSolution:
    x_active: np.ndarray      # values on the active set, in index order
    residual: np.ndarray      # y - Psi_A x_A
    dual: np.ndarray          # Psi^t residual, all p coordinates
    iterations: int           # 0 for the direct method
    method: str               # "direct" | "cg"
    residual_norms: list | None = None  # CG normal-equation residual history


def solve_direct(op, active, y):
    """Solve Psi_A^t Psi_A x_A = Psi_A^t y by Cholesky on the explicit Gram matrix."""
    active = _as_index_set(active, op.p)
    y = np.asarray(y, dtype=float)
    if active.size == 0:
        return RestrictedLsqSolution(np.zeros(0), y.copy(), op.adjoint_apply(y), 0, "direct")
    if active.size > op.n:
        raise SingularGramError(active.size)
    psi_a = op.columns(active)
    gram = psi_a.T @ psi_a
    try:
        factor = cho_factor(gram, lower=True, check_finite=False)
    except LinAlgError:
        raise SingularGramError(active.size) from None
    if float(np.min(np.diag(factor[0]))) ** 2 <= GRAM_PIVOT_TOL:
        raise SingularGramError(active.size)
    x_a = cho_solve(factor, psi_a.T @ y, check_finite=False)
    residual = y - psi_a @ x_a
    return RestrictedLsqSolution(x_a, residual, op.adjoint_apply(residual), 0, "direct")


def solve_cg(op, active, y, warm_start=None, noise_level=0.0, max_iters=2, tol_factor=1e-5):
    """Conjugate gradients on the normal equations over the active set.

    Starts from ``warm_start`` and stops when the normal-equation residual
    drops to ``tol_factor * noise_level`` or after ``max_iters`` iterations,
    whichever comes first. Bounded iterations are by design, so hitting the
    cap is not an error.
    """
    active = _as_index_set(active, op.p)
    y = np.asarray(y, dtype=float)
    if active.size == 0:
        raise ValueError("CG solve needs a nonempty active set")
    if warm_start is None:
        z = np.zeros(active.size)
    else:
        z = np.asarray(warm_start, dtype=float).copy()
        if z.shape != (active.size,):
            raise ValueError(f"warm start shape {z.shape} does not match |A| = {active.size}")

    def gram_apply(v):
        full = np.zeros(op.p)
        full[active] = v
        return op.adjoint_apply(op.apply(full))[active]

    b = op.adjoint_apply(y)[active]
    tol = float(tol_factor) * float(noise_level)
    r = b - gram_apply(z)
    rr = float(r @ r)
    norms = [np.sqrt(rr)]
    p_dir = r.copy()
    iters = 0
    while norms[-1] > tol and iters < max_iters:
        gp = gram_apply(p_dir)
        denom = float(p_dir @ gp)
        if denom <= 0.0:
            break  # numerically semidefinite direction; stop where we are
        alpha = rr / denom
        z += alpha * p_dir
        r -= alpha * gp
        rr_new = float(r @ r)
        norms.append(np.sqrt(rr_new))
        p_dir = r + (rr_new / rr) * p_dir
        rr = rr_new
        iters += 1

    full = np.zeros(op.p)
    full[active] = z
    residual = y - op.apply(full)
    return RestrictedLsqSolution(z, residual, op.adjoint_apply(residual), iters, "cg", norms)


def _as_index_set(active, p):
    active = np.asarray(active, dtype=np.intp).ravel()
    if active.size:
        if active.min() < 0 or active.max() >= p:
            raise ValueError("active-set index out of range")
        if np.unique(active).size != active.size:
            raise ValueError("active set has repeated indices")
    return np.sort(active)

"""Primal-dual active set continuation for l0-regularized least squares.

The inner loop alternates a restricted least-squares solve on the current
active set with an explicit dual update and a hard-threshold re-selection of
the set; the outer loop drives the threshold scale lambda down a geometric
grid, warm-starting every problem from the previous one, and stops at the
first lambda whose residual reaches the discrepancy level.
"""

import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .lsq import SingularGramError, solve_cg, solve_direct

__all__ = [
    "CONVERGED", "GRID_EXHAUSTED", "SINGULAR_GRAM_ABORT", "MAX_ITERS",
    "FIXED_POINT", "CAP_HIT",
    "SolverConfig", "SolverState", "InnerResult", "LambdaRecord", "SolveReport",
    "hard_threshold", "objective", "check_coordinatewise_min",
    "continuation_grid", "pdas_inner", "pdasc",
]

CONVERGED = "converged"
GRID_EXHAUSTED = "grid_exhausted"
SINGULAR_GRAM_ABORT = "singular_gram_abort"
MAX_ITERS = "max_iters"

FIXED_POINT = "fixed_point"
CAP_HIT = "cap_hit"

# Consecutive abandoned lambda steps tolerated before aborting the run.
SINGULAR_SKIP_LIMIT = 3


def hard_threshold(v, lam):
    """Zero out v when |v| < sqrt(2 lam), pass it through when |v| > sqrt(2 lam).

    The boundary |v| = sqrt(2 lam) maps to 0, mirroring the strict inequality
    used for active-set membership.
    """
    if lam <= 0:
        raise ValueError(f"threshold scale must be positive, got {lam}")
    thr = math.sqrt(2.0 * lam)
    v = np.asarray(v, dtype=float)
    out = np.where(np.abs(v) > thr, v, 0.0)
    return float(out) if out.ndim == 0 else out


def objective(op, y, x, lam):
    """J_lam(x) = 0.5 ||Psi x - y||^2 + lam ||x||_0 with exact nonzero counting."""
    r = op.apply(np.asarray(x, dtype=float)) - np.asarray(y, dtype=float)
    return 0.5 * float(r @ r) + lam * int(np.count_nonzero(x))


@dataclass
class Violation:
    index: int
    kind: str     # "active_below_threshold" | "dual_above_threshold" | "dual_nonzero_on_active"
    value: float
    bound: float


def check_coordinatewise_min(op, y, x, lam, tol=1e-8):
    """Check the coordinatewise-minimizer conditions at x.

    With A the exact support of x and d = Psi^t(y - Psi x), requires
    min_{i in A} |x_i| >= sqrt(2 lam) - tol, ||d||_inf <= sqrt(2 lam) + tol,
    and d = 0 on A to within tol. Returns (ok, violations).
    """
    x = np.asarray(x, dtype=float)
    thr = math.sqrt(2.0 * lam)
    active = np.flatnonzero(x)
    d = op.dual(y, x)
    violations = []
    for i in active:
        if abs(x[i]) < thr - tol:
            violations.append(Violation(int(i), "active_below_threshold", float(abs(x[i])), thr))
        if abs(d[i]) > tol:
            violations.append(Violation(int(i), "dual_nonzero_on_active", float(abs(d[i])), tol))
    for i in np.flatnonzero(np.abs(d) > thr + tol):
        violations.append(Violation(int(i), "dual_above_threshold", float(abs(d[i])), thr))
    return (not violations), violations


def continuation_grid(lam0, lam_min, N):
    """Geometric lambda grid: lam_k = lam0 (lam_min/lam0)^(k/N), k = 0..N.

    Returns (grid, rho) with rho = (lam_min/lam0)^(1/N); consecutive ratios
    are constant and equal to rho.
    """
    if not (lam0 > lam_min > 0):
        raise ValueError(f"need lam0 > lam_min > 0, got lam0={lam0}, lam_min={lam_min}")
    N = int(N)
    if N < 1:
        raise ValueError(f"grid size must be >= 1, got {N}")
    ratio = lam_min / lam0
    grid = lam0 * ratio ** (np.arange(N + 1) / N)
    return grid, ratio ** (1.0 / N)


@dataclass
class SolverConfig:
    """Continuation-solver knobs.

    lam0 defaults to 0.5 ||Psi^t y||_inf^2 (which makes x = 0 the exact
    minimizer at the head of the path) and lam_min to 1e-15 lam0; both are
    resolved against the data at solve time when left unset. eps_bar is the
    discrepancy level the residual is driven to; it must be supplied (there is
    no estimation heuristic).
    """

    lam0: float | None = None
    lam_min: float | None = None
    N: int = 100
    J_max: int = 5
    eps_bar: float | None = None
    lsq_mode: str = "direct"   # "direct" | "cg"
    cg_max_iters: int = 2
    cg_tol_factor: float = 1e-5

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.J_max < 1:
            raise ValueError("J_max must be >= 1")
        if self.lsq_mode not in ("direct", "cg"):
            raise ValueError(f"unknown lsq mode {self.lsq_mode!r}")

    def resolve_grid(self, op, y):
        lam0 = self.lam0
        if lam0 is None:
            lam0 = 0.5 * float(np.max(np.abs(op.adjoint_apply(y)))) ** 2
        if lam0 <= 0:
            raise ValueError("lam0 must be positive (is the data identically zero?)")
        lam_min = 1e-15 * lam0 if self.lam_min is None else self.lam_min
        return continuation_grid(lam0, lam_min, self.N)

    @staticmethod
    def grid_size_for_rho(rho, lam0_over_lam_min=1e15):
        """Smallest N whose grid ratio is at least the requested rho."""
        if not 0 < rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        return max(1, math.ceil(-math.log(lam0_over_lam_min) / math.log(rho)))


@dataclass
class SolverState:
    """Primal/dual pair the inner loop iterates on.

    ``active`` is the thresholded carry-over set used to warm-start the next
    lambda; ``solved_set`` is the set of the last restricted solve, off which
    x vanishes exactly.
    """

    lam: float
    x: np.ndarray
    d: np.ndarray
    active: np.ndarray
    solved_set: np.ndarray
    inner_iters: int


@dataclass
class InnerResult:
    state: SolverState
    status: str                 # FIXED_POINT | CAP_HIT
    active_sets: list           # sets solved on, in order


def pdas_inner(op, y, lam, x0, d0, A0, J_max, lsq=None):
    """Run the inner primal-dual active set loop at a fixed lambda.

    Starting from the set A0 (on which the first restricted solve happens),
    each iteration solves the least-squares problem on the current set,
    updates the dual d = Psi^t(y - Psi x), and re-selects
    {i : |x_i + d_i| > sqrt(2 lam)}. Stops at a fixed point of the selection
    or after J_max solves; the carried active set is the final selection
    (recomputed from the last pair), falling back to the last solved set if
    the selection outgrows the row count.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if J_max < 1:
        raise ValueError("J_max must be >= 1")
    if lsq is None:
        lsq = lambda op_, a_, y_, warm: solve_direct(op_, a_, y_)
    thr = math.sqrt(2.0 * lam)
    current = np.sort(np.asarray(A0, dtype=np.intp))
    if current.size > op.n:
        raise ValueError(f"initial active set of size {current.size} exceeds n = {op.n}")
    x = np.asarray(x0, dtype=float)
    d = np.asarray(d0, dtype=float)
    if x.shape != (op.p,) or d.shape != (op.p,):
        raise ValueError("x0 and d0 must be length-p vectors")
    sets = []
    status = CAP_HIT
    carry = current
    for _ in range(J_max):
        try:
            sol = lsq(op, current, y, x[current])
        except SingularGramError as err:
            err.lam = lam
            err.active = current
            raise
        x = np.zeros(op.p)
        x[current] = sol.x_active
        d = sol.dual
        sets.append(current)
        selected = np.flatnonzero(np.abs(x + d) > thr)
        if selected.size == current.size and np.array_equal(selected, current):
            status = FIXED_POINT
            carry = current
            break
        if selected.size > op.n:
            carry = current  # selection not solvable at the next step; keep the solved set
            break
        carry = selected
        current = selected
    solved = sets[-1]
    state = SolverState(lam=lam, x=x, d=d, active=carry, solved_set=solved,
                        inner_iters=len(sets))
    return InnerResult(state=state, status=status, active_sets=sets)


@dataclass
class LambdaRecord:
    k: int
    lam: float
    active_size: int
    inner_iters: int
    residual: float
    overlap_true: int | None = None
    excess_outside_true: int | None = None


@dataclass
class SolveReport:
    """Outcome of a solver run: recovered signal, path records, and status."""

    x_final: np.ndarray
    support_final: np.ndarray
    lam_final: float | None
    records: list
    status: str
    solver: str = "pdasc"

    def to_json(self):
        return {
            "solver": self.solver,
            "status": self.status,
            "lam_final": self.lam_final,
            "support_final": [int(i) for i in self.support_final],
            "x_final": [float(v) for v in self.x_final],
            "records": [
                {"k": r.k, "lambda": r.lam, "active_size": r.active_size,
                 "inner_iters": r.inner_iters, "residual": r.residual,
                 "overlap_true": r.overlap_true,
                 "excess_outside_true": r.excess_outside_true}
                for r in self.records
            ],
        }

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)
            fh.write("\n")

    def records_csv(self):
        buf = io.StringIO()
        buf.write("k,lambda,active_size,inner_iters,residual,overlap_true,excess_outside_true\n")
        for r in self.records:
            over = "" if r.overlap_true is None else str(r.overlap_true)
            exc = "" if r.excess_outside_true is None else str(r.excess_outside_true)
            buf.write(f"{r.k},{r.lam!r},{r.active_size},{r.inner_iters},{r.residual!r},{over},{exc}\n")
        return buf.getvalue()

    def save_csv(self, path):
        with open(path, "w") as fh:
            fh.write(self.records_csv())


def pdasc(op, y, config, truth=None):
    """Solve the l0-regularized least-squares problem along a lambda path.

    Runs the inner active-set loop at lam_k = rho^k lam0, warm-starting each
    problem from the previous state, and stops at the first lambda whose
    residual satisfies ||Psi x - y|| <= eps_bar (status ``converged``). On a
    singular Gram matrix the lambda step is abandoned and the previous state
    carried forward; three consecutive failures abort the run. When ``truth``
    is given, path records include the active set's overlap with the true
    support.
    """
    y = np.asarray(y, dtype=float)
    if config.eps_bar is None:
        raise ValueError("SolverConfig.eps_bar (discrepancy level) must be set")
    true_support = None if truth is None else set(int(i) for i in truth.support)
    if config.lam0 is None and float(np.max(np.abs(op.adjoint_apply(y)))) == 0.0:
        # data uncorrelated with every column: x = 0 is optimal at any lambda
        x = np.zeros(op.p)
        rec = _record(op, y, 1, 0.0, np.zeros(0, dtype=np.intp), 0, x, true_support)
        status = CONVERGED if rec.residual <= config.eps_bar else GRID_EXHAUSTED
        return SolveReport(x_final=x, support_final=np.zeros(0, dtype=np.intp),
                           lam_final=0.0, records=[rec], status=status, solver="pdasc")
    grid, _rho = config.resolve_grid(op, y)
    lsq = _make_lsq(config)

    x = np.zeros(op.p)
    d = op.adjoint_apply(y)
    active = np.zeros(0, dtype=np.intp)
    records = []
    status = GRID_EXHAUSTED
    lam_final = None
    failures = 0
    for k in range(1, config.N + 1):
        lam_k = float(grid[k])
        lam_final = lam_k
        try:
            result = pdas_inner(op, y, lam_k, x, d, active, config.J_max, lsq)
        except SingularGramError:
            failures += 1
            records.append(_record(op, y, k, lam_k, active, 0, x, true_support))
            if failures >= SINGULAR_SKIP_LIMIT:
                status = SINGULAR_GRAM_ABORT
                break
            continue
        failures = 0
        state = result.state
        x, d, active = state.x, state.d, state.active
        rec = _record(op, y, k, lam_k, active, state.inner_iters, x, true_support)
        records.append(rec)
        if rec.residual <= config.eps_bar:
            status = CONVERGED
            break
    return SolveReport(x_final=x, support_final=np.flatnonzero(x), lam_final=lam_final,
                       records=records, status=status, solver="pdasc")


def _record(op, y, k, lam, active, inner_iters, x, true_support):
    residual = float(np.linalg.norm(y - op.apply(x)))
    overlap = excess = None
    if true_support is not None:
        inside = sum(1 for i in active if int(i) in true_support)
        overlap = inside
        excess = int(active.size) - inside
    return LambdaRecord(k=k, lam=lam, active_size=int(active.size),
                        inner_iters=inner_iters, residual=residual,
                        overlap_true=overlap, excess_outside_true=excess)


def _make_lsq(config):
    if config.lsq_mode == "direct":
        return lambda op, a, y, warm: solve_direct(op, a, y)
    eps = config.eps_bar

    def cg_solver(op, a, y, warm):
        if len(a) == 0:
            return solve_direct(op, a, y)  # no system to iterate on
        return solve_cg(op, a, y, warm_start=warm, noise_level=eps,
                        max_iters=config.cg_max_iters, tol_factor=config.cg_tol_factor)

    return cg_solver

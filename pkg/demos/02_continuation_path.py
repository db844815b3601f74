"""Solve one instance with the primal-dual active set continuation solver and
inspect the lambda path: active-set growth, inner-iteration counts, residuals,
and the discrepancy-principle stop."""

import numpy as np

from l0kit import (SolverConfig, check_coordinatewise_min, gen_gaussian_operator,
                   gen_sparse_signal, oracle_solution, pdasc, relative_l2,
                   synthesize_instance)

op = gen_gaussian_operator(n=500, p=1000, seed=42)
truth = gen_sparse_signal(p=1000, T=100, R=100.0, seed=43)
inst = synthesize_instance(op, truth, sigma=1e-2, seed=44)

# the solver never sees T; it stops when the residual reaches the noise level
config = SolverConfig(N=100, J_max=5, eps_bar=inst.noise_level)
report = pdasc(op, inst.y, config, truth=truth)

print(f"status: {report.status} after {len(report.records)} lambda steps")
print(f"final lambda: {report.lam_final:.4e}")
print("\n  k    lambda     |A|  inner  residual   in/out of true support")
for rec in report.records[-8:]:
    print(f"{rec.k:>4} {rec.lam:>10.3e} {rec.active_size:>4} {rec.inner_iters:>5}"
          f" {rec.residual:>10.3e}   {rec.overlap_true}/{rec.excess_outside_true}")

exact = np.array_equal(report.support_final, truth.support)
print(f"\nexact support recovery: {exact}")
print(f"relative l2 error: {relative_l2(report.x_final, truth.dense()):.3e}")

xo = oracle_solution(op, truth.support, inst.y)
print(f"distance to the oracle solution: {np.linalg.norm(report.x_final - xo):.2e}")

ok, violations = check_coordinatewise_min(op, inst.y, report.x_final,
                                          report.lam_final, tol=1e-8)
print(f"coordinatewise-minimizer check: {ok} ({len(violations)} violations)")

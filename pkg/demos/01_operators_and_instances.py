"""Build sensing operators and synthetic recovery instances.

Walks through the three matrix ensembles, checks their basic identities, and
assembles a noisy instance the solvers consume.
"""

import numpy as np

from l0kit import (gen_bernoulli_operator, gen_gaussian_operator,
                   gen_partial_dct_operator, gen_sparse_signal, mutual_coherence,
                   synthesize_instance)

rng_probe = np.random.default_rng(0)

print("=== dense Gaussian ensemble ===")
op = gen_gaussian_operator(n=500, p=1000, seed=7)
norms = np.linalg.norm(op.mat, axis=0)
print(f"shape {op.shape}, column norms in [{norms.min():.12f}, {norms.max():.12f}]")
print(f"mutual coherence: {mutual_coherence(op):.4f}")

print("\n=== Bernoulli ensemble: entries +-1/sqrt(n) ===")
bop = gen_bernoulli_operator(n=256, p=1024, seed=7)
print(f"distinct |entries|: {sorted(set(np.abs(bop.mat).ravel()))}")

print("\n=== partial DCT: matrix-free apply/adjoint ===")
dct_op = gen_partial_dct_operator(n=2**11, p=2**13, seed=7)
x = rng_probe.standard_normal(dct_op.p)
r = rng_probe.standard_normal(dct_op.n)
print(f"shape {dct_op.shape}")
print(f"adjoint identity <Ax, r> - <x, A^t r>: "
      f"{abs(dct_op.apply(x) @ r - x @ dct_op.adjoint_apply(r)):.2e}")

print("\n=== a noisy instance: y = Psi x* + eta ===")
truth = gen_sparse_signal(p=1000, T=100, R=100.0, seed=11)
inst = synthesize_instance(op, truth, sigma=1e-2, seed=12)
print(f"sparsity T = {truth.sparsity}, dynamic range R = {truth.dynamic_range:.1f}")
print(f"smallest |x*_i| = {truth.min_abs}, largest = {truth.max_abs}")
print(f"noise level eps = ||eta|| = {inst.noise_level:.4f} "
      f"(sigma sqrt(n) = {1e-2 * np.sqrt(500):.4f})")

"""Batch experiment driver: recovery-probability sweeps, active-set traces,
timing benchmarks, and the error metrics they report."""

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import baselines
from .operators import gen_bernoulli_operator, gen_gaussian_operator, gen_partial_dct_operator
from .pdasc import SolverConfig, pdasc
from .problem import gen_sparse_signal, synthesize_instance
from .theory import certify

__all__ = [
    "ConfigError", "ExperimentConfig", "MetricRow",
    "run_sweep", "run_trace", "run_bench",
    "psnr", "relative_l2", "abs_linf", "exact_support",
    "sweep_table_csv", "bench_table_csv", "trace_csv", "rows_csv",
]

_MATRIX_GENERATORS = {
    "gaussian": gen_gaussian_operator,
    "bernoulli": gen_bernoulli_operator,
    "partial_dct": gen_partial_dct_operator,
}


class ConfigError(ValueError):
    """The experiment configuration is malformed."""


@dataclass
class ExperimentConfig:
    """One batch experiment: matrix ensemble, signal law, solvers, trial count.

    Every trial t runs with derived seed = base seed + t; operator, signal and
    noise streams are spawned from that seed, so identical configs reproduce
    identical instances byte for byte.
    """

    matrix: dict
    signal: dict
    sigma: float
    trials: int
    seed: int
    solvers: list = field(default_factory=list)

    def __post_init__(self):
        kind = self.matrix.get("kind")
        if kind not in _MATRIX_GENERATORS:
            raise ConfigError(f"unknown matrix kind {kind!r}")
        n, p = self.matrix.get("n"), self.matrix.get("p")
        if not (isinstance(n, int) and isinstance(p, int) and 0 < n <= p):
            raise ConfigError(f"matrix dims must satisfy 0 < n <= p, got n={n}, p={p}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if not self.solvers:
            raise ConfigError("at least one solver entry is required")
        for entry in self.solvers:
            _solver_runner(entry)  # surfaces unknown names/knobs before anything runs
        for t in self.t_values():
            if not 1 <= t <= n:
                raise ConfigError(f"sparsity T={t} outside 1..n={n}")

    def t_values(self):
        if "T_values" in self.signal:
            return [int(t) for t in self.signal["T_values"]]
        if "T" not in self.signal:
            raise ConfigError("signal needs a sparsity T or a T_values list")
        return [int(self.signal["T"])]

    @property
    def dynamic_range(self):
        return float(self.signal.get("R", 1.0))

    @classmethod
    def from_json(cls, doc):
        try:
            return cls(matrix=doc["matrix"], signal=doc["signal"],
                       sigma=float(doc.get("sigma", 0.0)), trials=int(doc.get("trials", 1)),
                       seed=int(doc.get("seed", 0)), solvers=list(doc.get("solvers", [])))
        except (KeyError, TypeError) as err:
            raise ConfigError(f"bad experiment config: {err}") from None


@dataclass
class MetricRow:
    solver: str
    T: int
    R: float
    sigma: float
    trial_seed: int
    wall_time_s: float
    rel_l2: float
    abs_linf: float
    exact_support: bool
    psnr_db: float
    status: str
    error: str | None = None


def relative_l2(x_hat, x_true):
    return float(np.linalg.norm(x_hat - x_true) / np.linalg.norm(x_true))


def abs_linf(x_hat, x_true):
    return float(np.max(np.abs(x_hat - x_true)))


def exact_support(x_hat, support):
    """Set equality of the exact nonzero pattern with the true support."""
    return np.array_equal(np.flatnonzero(x_hat), np.sort(np.asarray(support, dtype=np.intp)))


def psnr(x_hat, x_ref):
    """10 log10(V^2 / MSE) with V the largest magnitude over both vectors;
    +inf when the reconstruction is exact."""
    x_hat = np.asarray(x_hat, dtype=float)
    x_ref = np.asarray(x_ref, dtype=float)
    if x_hat.shape != x_ref.shape:
        raise ValueError(f"shape mismatch: {x_hat.shape} vs {x_ref.shape}")
    mse = float(np.mean((x_hat - x_ref) ** 2))
    if mse == 0.0:
        return math.inf
    v = max(float(np.max(np.abs(x_hat))), float(np.max(np.abs(x_ref))))
    return 10.0 * math.log10(v**2 / mse)


def make_instance(config, T, trial):
    """Deterministically synthesize the instance for one trial."""
    n, p = config.matrix["n"], config.matrix["p"]
    run_seed = config.seed + trial
    op_seed, sig_seed, noise_seed = np.random.SeedSequence(run_seed).spawn(3)
    op = _MATRIX_GENERATORS[config.matrix["kind"]](n, p, op_seed)
    truth = gen_sparse_signal(p, T, config.dynamic_range, sig_seed)
    inst = synthesize_instance(op, truth, config.sigma, noise_seed)
    return inst, run_seed


def _solver_runner(spec):
    """Turn one solver entry of the config into (id, callable(instance) -> report)."""
    spec = dict(spec)
    name = spec.pop("name", None)
    if name == "pdasc":
        label = spec.pop("label", f"pdasc({spec.get('N', 100)},{spec.get('J_max', 5)})")
        eps_bar = spec.pop("eps_bar", None)
        try:
            SolverConfig(eps_bar=1.0, **spec)  # surface bad keys/values before any trial runs
        except (TypeError, ValueError) as err:
            raise ConfigError(f"bad pdasc solver entry: {err}") from None

        def run(inst):
            level = eps_bar
            if level is None:
                # default: the instance noise level; a noiseless instance gets
                # a near-zero floor so the discrepancy check is reachable
                level = inst.noise_level if inst.noise_level > 0 \
                    else 1e-10 * float(np.linalg.norm(inst.y))
            cfg = SolverConfig(eps_bar=level, **spec)
            return pdasc(inst.operator, inst.y, cfg, truth=inst.truth)

        return label, run
    greedy = {"omp": baselines.omp, "htp": baselines.htp, "cosamp": baselines.cosamp,
              "iht": baselines.iht, "aiht": baselines.iht}
    if name not in greedy:
        raise ConfigError(f"unknown solver {name!r}")
    label = spec.pop("label", name)
    if name == "aiht":
        spec.setdefault("step_policy", "adaptive")
    try:
        baselines.GreedyConfig(T=spec.get("T", 1), **{k: v for k, v in spec.items() if k != "T"})
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad {name} solver entry: {err}") from None

    def run(inst):
        cfg = baselines.GreedyConfig(T=spec.get("T", inst.truth.sparsity),
                                     **{k: v for k, v in spec.items() if k != "T"})
        return greedy[name](inst.operator, inst.y, cfg, truth=inst.truth)

    return label, run


def _run_trial(config, T, trial, runner, clock):
    inst, run_seed = make_instance(config, T, trial)
    x_true = inst.truth.dense()
    solver_id, run = runner
    try:
        t0 = clock()
        report = run(inst)
        elapsed = clock() - t0
    except Exception as err:  # recorded per trial, never aborts the sweep
        return MetricRow(solver=solver_id, T=T, R=config.dynamic_range, sigma=config.sigma,
                         trial_seed=run_seed, wall_time_s=math.nan, rel_l2=math.nan,
                         abs_linf=math.nan, exact_support=False, psnr_db=math.nan,
                         status="error", error=repr(err))
    x_hat = report.x_final
    return MetricRow(solver=solver_id, T=T, R=config.dynamic_range, sigma=config.sigma,
                     trial_seed=run_seed, wall_time_s=elapsed,
                     rel_l2=relative_l2(x_hat, x_true), abs_linf=abs_linf(x_hat, x_true),
                     exact_support=exact_support(x_hat, inst.truth.support),
                     psnr_db=psnr(x_hat, x_true), status=report.status)


def run_sweep(config, clock=time.perf_counter, workers=1):
    """Run every (T, solver, trial) cell of the config; returns per-trial rows
    and per-cell aggregates (recovery probability and error medians)."""
    runners = [_solver_runner(s) for s in config.solvers]
    jobs = [(T, runner, trial)
            for T in config.t_values() for runner in runners for trial in range(config.trials)]
    rows = [None] * len(jobs)

    def work(i):
        T, runner, trial = jobs[i]
        rows[i] = _run_trial(config, T, trial, runner, clock)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, range(len(jobs))))
    else:
        for i in range(len(jobs)):
            work(i)

    aggregates = []
    idx = 0
    for T in config.t_values():
        for solver_id, _ in runners:
            cell = rows[idx:idx + config.trials]
            idx += config.trials
            aggregates.append({
                "solver": solver_id, "T": T, "R": config.dynamic_range,
                "sigma": config.sigma, "trials": config.trials,
                "recovery_prob": float(np.mean([r.exact_support for r in cell])),
                "med_rel_l2": _median([r.rel_l2 for r in cell]),
                "med_abs_linf": _median([r.abs_linf for r in cell]),
                "med_time_s": _median([r.wall_time_s for r in cell]),
            })
    return {"rows": rows, "aggregates": aggregates}


def run_trace(config, solver_index=0):
    """Active-set evolution of a continuation run on the trial-0 instance:
    per outer step, how much of the set is inside/outside the true support."""
    entry = config.solvers[solver_index]
    if entry.get("name") != "pdasc":
        raise ConfigError("trace requires a pdasc solver entry")
    T = config.t_values()[0]
    inst, _ = make_instance(config, T, 0)
    _, run = _solver_runner(entry)
    report = run(inst)
    return report


def run_bench(config, clock=time.perf_counter):
    """Median wall time and errors per solver, mirroring the sweep aggregates."""
    result = run_sweep(config, clock=clock, workers=1)
    n, p = config.matrix["n"], config.matrix["p"]
    table = [{
        "solver": agg["solver"], "p": p, "n": n, "T": agg["T"], "R": agg["R"],
        "med_time_s": agg["med_time_s"], "med_rel_l2": agg["med_rel_l2"],
        "med_abs_linf": agg["med_abs_linf"],
    } for agg in result["aggregates"]]
    return {"rows": result["rows"], "table": table}


def _median(values):
    return float(np.median(values))


def _format(value):
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return "" if value is None else str(value)


def _table_csv(columns, dicts):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for d in dicts:
        writer.writerow([_format(d[c]) for c in columns])
    return buf.getvalue()


def sweep_table_csv(aggregates):
    return _table_csv(
        ["solver", "T", "R", "sigma", "trials", "recovery_prob",
         "med_rel_l2", "med_abs_linf", "med_time_s"], aggregates)


def bench_table_csv(table):
    return _table_csv(
        ["solver", "p", "n", "T", "R", "med_time_s", "med_rel_l2", "med_abs_linf"], table)


def trace_csv(report):
    dicts = [{"k": r.k, "lambda": r.lam, "in_true": r.overlap_true,
              "out_true": r.excess_outside_true, "inner_iters": r.inner_iters,
              "residual": r.residual} for r in report.records]
    return _table_csv(["k", "lambda", "in_true", "out_true", "inner_iters", "residual"], dicts)


def rows_csv(rows):
    dicts = [{"solver": r.solver, "T": r.T, "R": r.R, "sigma": r.sigma,
              "trial_seed": r.trial_seed, "wall_time_s": r.wall_time_s,
              "rel_l2": r.rel_l2, "abs_linf": r.abs_linf,
              "exact_support": r.exact_support, "psnr_db": r.psnr_db,
              "status": r.status, "error": r.error} for r in rows]
    return _table_csv(["solver", "T", "R", "sigma", "trial_seed", "wall_time_s",
                       "rel_l2", "abs_linf", "exact_support", "psnr_db", "status", "error"],
                      dicts)


def certify_instance(config, trial=0, rho=None):
    """Theory certificate for one configured instance (rho defaults to the
    midpoint of the admissible interval when it exists)."""
    T = config.t_values()[0]
    inst, _ = make_instance(config, T, trial)
    if rho is None:
        probe = certify(inst.operator, inst.truth, inst.noise_level, 0.5)
        lo = probe.rho_interval[0]
        rho = (lo + 1.0) / 2.0 if lo < 1.0 else 0.5
    return certify(inst.operator, inst.truth, inst.noise_level, rho)

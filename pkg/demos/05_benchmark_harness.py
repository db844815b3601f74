"""Drive the experiment harness: a recovery-probability sweep over sparsity
levels, an active-set evolution trace, and a timing benchmark. The same
configurations run through the `l0kit` CLI (see README)."""

from l0kit.harness import (ExperimentConfig, bench_table_csv, run_bench, run_sweep,
                           run_trace, sweep_table_csv, trace_csv)

sweep_config = ExperimentConfig.from_json({
    "matrix": {"kind": "gaussian", "n": 200, "p": 400},
    "signal": {"T_values": [20, 40, 60], "R": 100.0},
    "sigma": 1e-3,
    "trials": 10,
    "seed": 99,
    "solvers": [{"name": "pdasc", "N": 80, "J_max": 5}, {"name": "omp"}],
})

print("=== recovery-probability sweep ===")
result = run_sweep(sweep_config)
print(sweep_table_csv(result["aggregates"]))

print("=== active-set evolution trace (first instance) ===")
trace_config = ExperimentConfig.from_json({
    "matrix": {"kind": "gaussian", "n": 200, "p": 400},
    "signal": {"T": 40, "R": 100.0},
    "sigma": 1e-3,
    "trials": 1,
    "seed": 99,
    "solvers": [{"name": "pdasc", "N": 80, "J_max": 5}],
})
print(trace_csv(run_trace(trace_config)))

print("=== timing benchmark ===")
bench_config = ExperimentConfig.from_json({
    "matrix": {"kind": "gaussian", "n": 200, "p": 800},
    "signal": {"T": 60, "R": 1000.0},
    "sigma": 1e-2,
    "trials": 5,
    "seed": 123,
    "solvers": [{"name": "pdasc", "N": 50, "J_max": 1}, {"name": "omp"},
                {"name": "htp"}, {"name": "cosamp"}],
})
print(bench_table_csv(run_bench(bench_config)["table"]))

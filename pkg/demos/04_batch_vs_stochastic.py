"""
Batch ADMM against mini-batch SDCA-ADMM
========================================

Both runs use the same number of epochs (one epoch touches every sample
once).  The stochastic version makes K cheap updates per epoch and usually
gets to a given accuracy in fewer passes over the data.
"""
import numpy as np

from sdca_admm import (
    ProblemInstance,
    SolverConfig,
    build_overlapped_group,
    gen_synthetic_grid,
    run_batch_admm,
    run_sdca_admm,
)

rows, cols, n = 8, 8, 400
train, _ = gen_synthetic_grid(rows, cols, n, rng=3)
reg = build_overlapped_group(rows, cols, 0.1 / np.sqrt(n), 0.01)
problem = ProblemInstance(train.Z, train.labels, reg)

# a long batch run stands in for the optimum
_, ref_trace = run_batch_admm(problem, SolverConfig(max_epochs=5000, checkpoint_every=500))
ref = min(r.primal_objective for r in ref_trace)

epochs = 40
_, batch = run_batch_admm(problem, SolverConfig(max_epochs=epochs))
_, stoch = run_sdca_admm(problem, SolverConfig(K=8, max_epochs=epochs))

print("epoch  batch excess  SDCA-ADMM excess")
for b, s in zip(batch[::5], stoch[::5]):
    print(f"{b.epoch:5.0f}  {b.primal_objective - ref:12.3e}  {s.primal_objective - ref:12.3e}")
print(f"\nwall time: batch {batch[-1].wall_seconds:.3f} s, SDCA-ADMM {stoch[-1].wall_seconds:.3f} s")

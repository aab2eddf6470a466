"""SDCA-ADMM: stochastic dual coordinate ascent with linearized ADMM.

Regularized empirical risk minimization with structured penalties
``psi(B^T w)`` such as the overlapped group lasso and graph-guided fused
lasso.
"""
from .data import Dataset, build_edges_by_correlation, gen_synthetic_grid, read_libsvm, write_libsvm
from .linalg import SparseColumnMatrix, matvec, matvec_transpose, select_columns, spectral_norm_gram
from .losses import LossFamily, loss_conjugate, loss_gradient, loss_value, prox_dual_loss
from .regularizers import (
    ElasticNetL1,
    GroupElasticNet,
    StructuredRegularizer,
    build_graph_guided,
    build_overlapped_group,
    eval_psi,
    eval_psi_conjugate,
    prox_psi,
    prox_psi_conjugate,
    read_edges,
)
from .solver import (
    DivergenceError,
    DualState,
    ProblemInstance,
    SolverConfig,
    TraceRecord,
    compute_test_metrics,
    dual_objective,
    duality_gap,
    kkt_residuals,
    make_partition,
    primal_objective,
    run_batch_admm,
    run_sdca_admm,
)

__version__ = "0.1.0"

"""Stochastic dual coordinate ascent with linearized ADMM (SDCA-ADMM).

Solves

    min_w  (1/n) sum_i f_i(z_i^T w) + psi(B^T w)

through its dual

    min_{x, y}  (1/n) sum_i f_i*(x_i) + psi*(y/n)   s.t.  Z x + B y = 0,

where ``w`` plays the role of the multiplier.  One iteration draws a block
``I`` of the sample partition uniformly, then

    q   = y + B^T (w - rho (Z x + B y)) / (rho eta_B)
    y   = q - prox(q | n psi(rho eta_B .) / (rho eta_B))
    p_I = x_I + Z_I^T (w - rho (Z x + B y_new)) / (rho eta_I)
    x_i = prox(p_i | f_i* / (rho eta_I))                      for i in I
    w   = w - gamma rho (n r_new - (n - n/K) r_old),   r = Z x + B y

The quadratic terms ``rho (eta_B I - B^T B)`` and ``rho (eta_I I - Z_I^T Z_I)``
added to the augmented Lagrangian make both subproblems separable.  ``Zx``
is kept as an incrementally updated cache.
"""
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.sparse import linalg as spla

from .linalg import SparseColumnMatrix, spectral_norm_gram
from .losses import (
    LossFamily,
    conjugate_subdifferential,
    loss_conjugate,
    loss_value,
    prox_dual_loss,
)
from .regularizers import StructuredRegularizer

__all__ = [
    "ProblemInstance",
    "SolverConfig",
    "DualState",
    "TraceRecord",
    "DivergenceError",
    "make_partition",
    "draw_block",
    "block_eta_Z",
    "step_y",
    "step_x",
    "step_w",
    "run_sdca_admm",
    "run_batch_admm",
    "primal_objective",
    "dual_objective",
    "kkt_residuals",
    "duality_gap",
    "reference_optimum",
    "compute_test_metrics",
]

# Z blocks at least this dense are multiplied as numpy arrays
_DENSE_THRESHOLD = 0.25


class DivergenceError(FloatingPointError):
    """The iterates became non-finite."""


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Training data plus loss and structured penalty.

    ``Z`` is p x n with one sample per column.
    """

    Z: SparseColumnMatrix
    labels: np.ndarray
    reg: StructuredRegularizer
    loss: LossFamily = LossFamily.SMOOTHED_HINGE

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.float64).ravel()
        if labels.size != self.Z.cols:
            raise ValueError(f"{labels.size} labels for {self.Z.cols} samples")
        if not np.all(np.abs(labels) == 1.0):
            raise ValueError("labels must be +1 or -1")
        if self.Z.rows != self.reg.p:
            raise ValueError(f"Z has {self.Z.rows} features but B has {self.reg.p} rows")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "loss", LossFamily(self.loss))

    @property
    def n(self):
        return self.Z.cols

    @property
    def p(self):
        return self.Z.rows

    @property
    def d(self):
        return self.reg.d


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters of :func:`run_sdca_admm`.

    ``gamma=None`` means ``1/n``, or ``1/(4n)`` when ``eta_Z="theorem-safe"``.
    ``eta_Z`` is ``"default"`` (``1.1 sigma_max(Z_I^T Z_I)``), ``"theorem-safe"``
    (``1.01 (1 + 2 gamma n (1 - 1/K)) sigma_max(Z_I^T Z_I)``), a positive number
    used for every block, or one number per block.  ``eta_B=None`` takes the
    regularizer's ``sigma_max(B B^T) + 1``.  An epoch is ``K`` iterations.
    """

    rho: float = 0.1
    gamma: Optional[float] = None
    K: int = 1
    max_epochs: int = 100
    eta_B: Optional[float] = None
    eta_Z: Union[str, float, Sequence[float]] = "default"
    seed: int = 0
    checkpoint_every: int = 1
    early_stop: bool = False
    tol_feasibility: float = 1e-8
    tol_objective: float = 1e-8
    refresh_every: Optional[int] = None

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if self.max_epochs < 0 or self.checkpoint_every < 1:
            raise ValueError("max_epochs must be >= 0 and checkpoint_every >= 1")
        if isinstance(self.eta_Z, str) and self.eta_Z not in ("default", "theorem-safe"):
            raise ValueError(f"unknown eta_Z policy {self.eta_Z!r}")

    @classmethod
    def theorem_safe(cls, **kwargs):
        """Configuration satisfying the step-size conditions of the linear-rate theorem."""
        return cls(eta_Z="theorem-safe", **kwargs)

    @property
    def is_theorem_safe(self):
        return isinstance(self.eta_Z, str) and self.eta_Z == "theorem-safe"

    def resolved_gamma(self, n):
        if self.gamma is not None:
            return float(self.gamma)
        return 1.0 / (4 * n) if self.is_theorem_safe else 1.0 / n


@dataclass
class DualState:
    """Iterates of one run.  ``zx`` caches ``Z @ x`` and ``by`` caches ``B @ y``."""

    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    zx: np.ndarray
    by: np.ndarray
    eta_Z: np.ndarray
    eta_B: float
    blocks: list = field(default_factory=list)
    iteration: int = 0

    @classmethod
    def zeros(cls, problem, eta_Z, eta_B, blocks):
        n, p, d = problem.n, problem.p, problem.d
        return cls(
            x=np.zeros(n),
            y=np.zeros(d),
            w=np.zeros(p),
            zx=np.zeros(p),
            by=np.zeros(p),
            eta_Z=np.asarray(eta_Z, dtype=np.float64),
            eta_B=float(eta_B),
            blocks=blocks,
        )

    def copy(self):
        return replace(
            self,
            x=self.x.copy(),
            y=self.y.copy(),
            w=self.w.copy(),
            zx=self.zx.copy(),
            by=self.by.copy(),
        )

    def is_finite(self):
        return all(np.all(np.isfinite(a)) for a in (self.x, self.y, self.w, self.zx))


@dataclass(frozen=True)
class TraceRecord:
    epoch: float
    wall_seconds: float
    primal_objective: float
    dual_objective: float
    constraint_residual: float
    test_loss: Optional[float] = None
    test_error: Optional[float] = None


def make_partition(n, K, rng):
    """Split ``range(n)`` into ``K`` blocks of sizes ``floor(n/K)`` or ``ceil(n/K)``.

    Drawing one block uniformly then includes every index with probability
    ``1/K``.
    """
    if not 1 <= K <= n:
        raise ValueError(f"need 1 <= K <= n, got K={K}, n={n}")
    return [np.sort(b) for b in np.array_split(rng.permutation(n), K)]


def draw_block(rng, K):
    """Index of the block used by the next iteration, uniform over ``range(K)``."""
    return int(rng.integers(K))


def block_eta_Z(problem, blocks, config):
    """Per-block ``eta_{Z,I}`` according to ``config.eta_Z``."""
    K = len(blocks)
    if not isinstance(config.eta_Z, str):
        eta = np.broadcast_to(np.asarray(config.eta_Z, dtype=np.float64), (K,)).copy()
        if np.any(eta <= 0):
            raise ValueError("explicit eta_Z must be positive")
        return eta
    sig = np.array(
        [spectral_norm_gram(SparseColumnMatrix(problem.Z.csc[:, b])) for b in blocks]
    )
    if config.is_theorem_safe:
        gamma = config.resolved_gamma(problem.n)
        factor = 1.01 * (1.0 + 2.0 * gamma * problem.n * (1.0 - 1.0 / K))
    else:
        factor = 1.1
    # an all-zero block carries no information; any positive value works
    return np.where(sig > 0, factor * sig, 1.0)


def _block_matrix(Z, block):
    sub = Z.csc[:, block]
    if sub.nnz >= _DENSE_THRESHOLD * sub.shape[0] * sub.shape[1]:
        return sub.toarray()
    return sub.tocsc()


def step_y(state, problem, rho):
    """Return the new ``y`` from the linearized y-subproblem."""
    B = problem.reg.B.csc
    c = rho * state.eta_B
    q = state.y + (B.T @ (state.w - rho * (state.zx + state.by))) / c
    # q - prox(q | n psi(c .)/c) == prox(c q | (n c psi)*) / c
    return problem.reg.simple.prox_conjugate(c * q, problem.n * c) / c


def step_x(state, block, y_new, problem, rho, eta, Z_block=None, by_new=None):
    """Return the new ``x[block]`` from the linearized block subproblem."""
    if Z_block is None:
        Z_block = problem.Z.csc[:, block]
    if by_new is None:
        by_new = problem.reg.B.csc @ y_new
    c = rho * eta
    r = state.w - rho * (state.zx + by_new)
    p_block = state.x[block] + (Z_block.T @ r) / c
    return prox_dual_loss(problem.loss, p_block, problem.labels[block], c)


def step_w(w, zx_new, by_new, zx_old, by_old, gamma, rho, n, K):
    """Multiplier update ``w - gamma rho (n r_new - (n - n/K) r_old)``."""
    return w - gamma * rho * (n * (zx_new + by_new) - (n - n / K) * (zx_old + by_old))


def primal_objective(problem, w):
    """``(1/n) sum_i f_i(z_i^T w) + psi(B^T w)``."""
    margins = problem.Z.csc.T @ w
    risk = float(np.mean(loss_value(problem.loss, margins, problem.labels)))
    return risk + problem.reg.value(w)


def dual_objective(problem, x, y):
    """``(1/n) sum_i f_i*(x_i) + psi*(y/n)``; may be ``inf``.

    At a dual solution satisfying ``Z x + B y = 0`` this equals minus the
    primal optimum.
    """
    conj = float(np.mean(loss_conjugate(problem.loss, x, problem.labels)))
    if not np.isfinite(conj):
        return np.inf
    return conj + problem.reg.simple.conjugate(np.asarray(y) / problem.n)


def _residual(problem, x, y):
    return problem.Z.csc @ x + problem.reg.B.csc @ y


def kkt_residuals(problem, state):
    """Return ``(||Z x + B y||, max_i dist(z_i^T w, subdiff f_i*(x_i)))``.

    Both vanish exactly at a primal-dual optimal triple.  The second is
    ``inf`` if some ``x_i`` has an empty subdifferential.
    """
    feas = float(np.linalg.norm(_residual(problem, state.x, state.y)))
    margins = problem.Z.csc.T @ state.w
    lo, hi = conjugate_subdifferential(problem.loss, state.x, problem.labels)
    with np.errstate(invalid="ignore"):
        dist = np.maximum(np.maximum(lo - margins, margins - hi), 0.0)
    dist = np.where(np.isnan(dist), np.inf, dist)
    return feas, float(np.max(dist)) if dist.size else 0.0


def duality_gap(problem, state):
    """Certified gap ``F_P(w) - (-D(x, y_f))`` with ``y_f`` made feasible.

    ``y_f = y - B^T (B B^T)^{-1} (Z x + B y)`` satisfies ``Z x + B y_f = 0``,
    so ``-D(x, y_f)`` is a lower bound on the primal optimum by weak duality.
    Requires ``B B^T`` to be nonsingular.
    """
    B = problem.reg.B.csc
    solve = spla.factorized((B @ B.T).tocsc())
    r = _residual(problem, state.x, state.y)
    y_f = state.y - B.T @ solve(r)
    lower = -dual_objective(problem, state.x, y_f)
    return primal_objective(problem, state.w) - lower, lower


def compute_test_metrics(w, test, kind):
    """Mean loss and classification error of ``w`` on ``test``.

    ``test`` is anything with ``Z`` (p x m, samples as columns) and
    ``labels``.  A sample counts as an error when ``label * z^T w <= 0``, so
    ties are misclassified.
    """
    labels = np.asarray(test.labels, dtype=np.float64)
    if labels.size == 0:
        raise ValueError("empty test set")
    margins = test.Z.csc.T @ w
    loss = float(np.mean(loss_value(kind, margins, labels)))
    error = float(np.mean(labels * margins <= 0.0))
    return loss, error


def _record(problem, state, epoch, wall, test_set):
    feas = float(np.linalg.norm(_residual(problem, state.x, state.y)))
    test_loss = test_error = None
    if test_set is not None:
        test_loss, test_error = compute_test_metrics(state.w, test_set, problem.loss)
    return TraceRecord(
        epoch=epoch,
        wall_seconds=wall,
        primal_objective=primal_objective(problem, state.w),
        dual_objective=dual_objective(problem, state.x, state.y),
        constraint_residual=feas,
        test_loss=test_loss,
        test_error=test_error,
    )


def run_sdca_admm(
    problem: ProblemInstance,
    config: SolverConfig,
    test_set=None,
    callbacks: Sequence[Callable[[TraceRecord], None]] = (),
):
    """Run SDCA-ADMM from the zero state.

    Parameters
    ----------
    problem : ProblemInstance
    config : SolverConfig
    test_set : object with ``Z`` and ``labels``, optional
        Adds test loss and error to each trace record.
    callbacks : sequence of callables
        Each receives every :class:`TraceRecord` as it is produced.

    Returns
    -------
    state : DualState
    trace : list of TraceRecord
        One record at epoch 0 and every ``checkpoint_every`` epochs after.

    Raises
    ------
    DivergenceError
        If the iterates stop being finite (checked at checkpoints).
    """
    n, K = problem.n, config.K
    if K > n:
        raise ValueError(f"K={K} exceeds the number of samples n={n}")
    rng = np.random.default_rng(config.seed)
    blocks = make_partition(n, K, rng)
    gamma = config.resolved_gamma(n)
    rho = config.rho
    eta_B = problem.reg.eta_B if config.eta_B is None else float(config.eta_B)
    state = DualState.zeros(problem, block_eta_Z(problem, blocks, config), eta_B, blocks)
    Z_blocks = [_block_matrix(problem.Z, b) for b in blocks]
    B = problem.reg.B.csc
    Z = problem.Z.csc
    refresh = config.refresh_every or n

    trace = []

    def emit(rec):
        trace.append(rec)
        for cb in callbacks:
            cb(rec)

    emit(_record(problem, state, 0.0, 0.0, test_set))
    wall = 0.0
    n_iter = int(config.max_epochs) * K
    for t in range(1, n_iter + 1):
        tic = time.perf_counter()
        k = draw_block(rng, K)
        block = blocks[k]
        y_new = step_y(state, problem, rho)
        by_new = B @ y_new
        x_block = step_x(
            state, block, y_new, problem, rho, state.eta_Z[k],
            Z_block=Z_blocks[k], by_new=by_new,
        )
        zx_new = state.zx + Z_blocks[k] @ (x_block - state.x[block])
        state.w = step_w(state.w, zx_new, by_new, state.zx, state.by, gamma, rho, n, K)
        state.x[block] = x_block
        state.y = y_new
        state.by = by_new
        state.zx = Z @ state.x if t % refresh == 0 else zx_new
        state.iteration = t
        wall += time.perf_counter() - tic

        if t % K == 0 and (t // K) % config.checkpoint_every == 0:
            if not state.is_finite():
                raise DivergenceError(
                    f"non-finite iterates at iteration {t}; "
                    f"try a smaller gamma or the theorem-safe eta_Z policy"
                )
            rec = _record(problem, state, t / K, wall, test_set)
            prev = trace[-1]
            emit(rec)
            if config.early_stop and (
                rec.constraint_residual <= config.tol_feasibility
                and abs(rec.primal_objective - prev.primal_objective)
                <= config.tol_objective * (1.0 + abs(rec.primal_objective))
            ):
                break
    if not state.is_finite():
        raise DivergenceError("non-finite iterates at the end of the run")
    return state, trace


def run_batch_admm(problem, config, test_set=None, callbacks=()):
    """Linearized batch ADMM: SDCA-ADMM with a single block (``K=1``).

    Every iteration touches all samples; the linearization terms are kept,
    so the x-update is still a coordinatewise prox.
    """
    return run_sdca_admm(problem, replace(config, K=1), test_set, callbacks)


def reference_optimum(problem, config, budget_epochs, multiplier=50):
    """Estimate ``min_w F_P(w)`` with a long theorem-safe run.

    Runs up to ``multiplier * budget_epochs`` epochs (early stopping once the
    iterates are feasible to 1e-12 and the objective has stalled) and returns
    ``(best_primal, lower_bound)``: the smallest primal value seen and the
    weak-duality certificate of :func:`duality_gap` at the final state
    (``-inf`` if ``B B^T`` is singular).
    """
    cfg = replace(
        config,
        eta_Z="theorem-safe",
        gamma=None,
        max_epochs=max(1, int(multiplier * budget_epochs)),
        early_stop=True,
        tol_feasibility=1e-12,
        tol_objective=1e-15,
        checkpoint_every=max(1, int(budget_epochs) // 10),
    )
    state, trace = run_sdca_admm(problem, cfg)
    best = min(rec.primal_objective for rec in trace)
    try:
        _, lower = duality_gap(problem, state)
    except RuntimeError:
        # singular B B^T: no cheap feasible dual point
        lower = -np.inf
    return best, lower

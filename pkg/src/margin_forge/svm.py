"""Soft-margin SVM: dual solver (pairwise updates) and trained-model operations.

The solver maximizes the dual objective

    W(alpha) = sum_i alpha_i - 1/2 sum_ij alpha_i alpha_j y_i y_j K(x_i, x_j)

subject to 0 <= alpha_i <= C and sum_i alpha_i y_i = 0, by repeatedly solving
the two-variable subproblem for the pair that most violates optimality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from margin_forge.errors import (
    ConvergenceError,
    DimensionError,
    InvalidDataError,
    MarginForgeError,
    SingleClassError,
)
from margin_forge.kernels import Kernel, LinearKernel, RbfKernel, kernel_matrix
from margin_forge.vectors import FeatureVector, check_label, dataset_matrix

#: Training-set balance |sum_i alpha_i y_i| must stay below this.
BALANCE_TOL = 1e-6

# Alphas this close to a box bound are snapped onto it exactly, so that
# bound membership tests can use exact comparisons afterwards.
_BOUND_SNAP = 1e-12

Dataset = Sequence[tuple[FeatureVector, int]]


@dataclass(frozen=True)
class TrainConfig:
    """Everything a training run varies: penalty, kernel, tolerances, seed."""

    c_bound: float
    kernel: Kernel = LinearKernel()
    kkt_tolerance: float = 1e-3
    max_passes: int = 10_000_000
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.c_bound) and self.c_bound > 0):
            raise ValueError(f"c_bound must be finite and > 0, got {self.c_bound!r}")
        if not (math.isfinite(self.kkt_tolerance) and self.kkt_tolerance > 0):
            raise ValueError(
                f"kkt_tolerance must be finite and > 0, got {self.kkt_tolerance!r}"
            )
        if self.max_passes < 1:
            raise ValueError(f"max_passes must be >= 1, got {self.max_passes!r}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed!r}")


@dataclass(frozen=True)
class TrainDiagnostics:
    """Solver health report for one training run.

    ``alphas`` holds the final dual variables in training order, which lets
    callers re-verify feasibility and optimality without reaching into the
    solver. ``objective_trajectory`` is populated only when the run was asked
    to record it (one dual objective value per pair update).
    """

    dual_objective: float
    iterations: int
    n_support_vectors: int
    n_bounded_svs: int
    total_slack: float
    max_kkt_violation: float
    alphas: tuple[float, ...] = ()
    objective_trajectory: tuple[float, ...] | None = None


@dataclass(frozen=True)
class Model:
    """A trained maximal-margin classifier in dual form.

    ``sv_coefficients[i]`` equals alpha_i * y_i for support vector i, so the
    decision function is f(x) = sum_i coef_i K(sv_i, x) + bias. For the
    linear kernel ``explicit_weights`` carries the collapsed weight vector
    sum_i coef_i * sv_i, which predict uses as a fast path.
    """

    kernel: Kernel
    bias: float
    support_vectors: tuple[FeatureVector, ...]
    sv_coefficients: tuple[float, ...]
    dim: int
    explicit_weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if len(self.support_vectors) != len(self.sv_coefficients):
            raise ValueError("support_vectors and sv_coefficients lengths differ")
        if len(self.support_vectors) < 1:
            raise ValueError("a model needs at least one support vector")
        if not math.isfinite(self.bias):
            raise ValueError("bias must be finite")
        for sv in self.support_vectors:
            if sv.dim != self.dim:
                raise DimensionError(
                    f"support vector dim {sv.dim} != model dim {self.dim}"
                )
        if self.explicit_weights is not None and len(self.explicit_weights) != self.dim:
            raise DimensionError("explicit_weights length must equal dim")

    @cached_property
    def _sv_matrix(self) -> np.ndarray:
        return dataset_matrix(self.support_vectors)

    @cached_property
    def _coef_array(self) -> np.ndarray:
        return np.asarray(self.sv_coefficients)

    @cached_property
    def _weight_array(self) -> np.ndarray | None:
        if self.explicit_weights is None:
            return None
        return np.asarray(self.explicit_weights)


def linear_weights(
    support_vectors: Sequence[FeatureVector], coefficients: Sequence[float], dim: int
) -> tuple[float, ...]:
    """Collapse a linear-kernel expansion into one dense weight vector."""
    w = np.zeros(dim)
    for coef, sv in zip(coefficients, support_vectors):
        for index, value in sv.entries:
            w[index - 1] += coef * value
    return tuple(float(v) for v in w)


def _probe_matrix(model: Model, vectors: Sequence[FeatureVector]) -> np.ndarray:
    for vec in vectors:
        if vec.dim != model.dim:
            raise DimensionError(f"probe dim {vec.dim} != model dim {model.dim}")
    return dataset_matrix(vectors)


def expansion_decision_values(
    model: Model, vectors: Sequence[FeatureVector]
) -> np.ndarray:
    """Decision values via the kernel expansion, ignoring any fast path."""
    probes = _probe_matrix(model, vectors)
    k = kernel_matrix(model.kernel, probes, model._sv_matrix)
    return k @ model._coef_array + model.bias


def decision_values(model: Model, vectors: Sequence[FeatureVector]) -> np.ndarray:
    """Batch decision function f(x) for a sequence of probes."""
    if model._weight_array is not None:
        probes = _probe_matrix(model, vectors)
        return probes @ model._weight_array + model.bias
    return expansion_decision_values(model, vectors)


def decision_value(model: Model, x: FeatureVector) -> float:
    """f(x) = sum_i coef_i K(sv_i, x) + bias, via the fast path if present."""
    return float(decision_values(model, [x])[0])


def predict(model: Model, x: FeatureVector) -> int:
    """Classify a probe: +1 when f(x) >= 0 (ties go to +1), else -1."""
    return 1 if decision_value(model, x) >= 0.0 else -1


def predict_all(model: Model, vectors: Sequence[FeatureVector]) -> np.ndarray:
    return np.where(decision_values(model, vectors) >= 0.0, 1, -1)


def total_slack(model: Model, data: Dataset) -> float:
    """Sum of hinge losses max(0, 1 - y * f(x)) over a labeled dataset."""
    if not data:
        return 0.0
    vectors = [x for x, _ in data]
    labels = np.array([check_label(y) for _, y in data], dtype=float)
    f = decision_values(model, vectors)
    return float(np.maximum(0.0, 1.0 - labels * f).sum())


class _PairSolver:
    """State of one dual optimization run.

    Keeps the bias-free margins u_k = sum_j alpha_j y_j K(x_j, x_k)
    incrementally up to date, plus a kernel-row cache holding only the rows
    of the two indices touched by the latest update.
    """

    def __init__(self, x: np.ndarray, y: np.ndarray, config: TrainConfig):
        self.x = x
        self.y = y
        self.c = config.c_bound
        self.kernel = config.kernel
        self.alpha = np.zeros(len(y))
        self.u = np.zeros(len(y))
        self._row_cache: dict[int, np.ndarray] = {}
        self._sqnorms = (
            np.einsum("ij,ij->i", x, x) if isinstance(config.kernel, RbfKernel) else None
        )

    def kernel_row(self, i: int) -> np.ndarray:
        row = self._row_cache.get(i)
        if row is None:
            point_sqnorm = None if self._sqnorms is None else self._sqnorms[i : i + 1]
            row = kernel_matrix(
                self.kernel,
                self.x,
                self.x[i : i + 1],
                a_sqnorms=self._sqnorms,
                b_sqnorms=point_sqnorm,
            ).ravel()
        return row

    def objective(self) -> float:
        return float(self.alpha.sum() - 0.5 * ((self.alpha * self.y) @ self.u))

    def movable_masks(self) -> tuple[np.ndarray, np.ndarray]:
        pos, neg = self.y > 0, self.y < 0
        below_c, above_0 = self.alpha < self.c, self.alpha > 0
        up = (below_c & pos) | (above_0 & neg)
        low = (below_c & neg) | (above_0 & pos)
        return up, low

    def _snap(self, value: float, lo: float, hi: float) -> float:
        # Snap only onto the true box corners when the pair bound allows it.
        if lo == 0.0 and value <= _BOUND_SNAP:
            return 0.0
        if hi == self.c and value >= self.c - _BOUND_SNAP:
            return self.c
        return min(max(value, lo), hi)

    def take_step(self, i: int, j: int) -> bool:
        """Solve the two-variable subproblem for (i, j). True if alpha moved."""
        if i == j:
            return False
        alpha, y, c = self.alpha, self.y, self.c
        if y[i] * y[j] > 0:
            gamma = alpha[i] + alpha[j]
            lo, hi = max(0.0, gamma - c), min(c, gamma)
        else:
            diff = alpha[j] - alpha[i]
            lo, hi = max(0.0, diff), min(c, c + diff)
        if lo >= hi:
            return False
        row_i, row_j = self.kernel_row(i), self.kernel_row(j)
        curvature = row_i[i] + row_j[j] - 2.0 * row_i[j]
        if curvature <= 0.0:
            # PSD kernels give curvature >= 0; zero means duplicate rows, and
            # the guard turns the step into a jump to the better box edge.
            curvature = 1e-12
        err_i = self.u[i] - y[i]
        err_j = self.u[j] - y[j]
        aj_new = self._snap(alpha[j] + y[j] * (err_i - err_j) / curvature, lo, hi)
        delta_j = aj_new - alpha[j]
        if delta_j == 0.0:
            return False
        # Deriving alpha_i from the pair's conserved y_i a_i + y_j a_j keeps
        # the balance constraint exact in floating point.
        ai_new = alpha[i] + y[i] * y[j] * (alpha[j] - aj_new)
        if ai_new <= _BOUND_SNAP:
            ai_new = 0.0
        elif ai_new >= c - _BOUND_SNAP:
            ai_new = c
        delta_i = ai_new - alpha[i]
        self.u += (delta_i * y[i]) * row_i + (delta_j * y[j]) * row_j
        alpha[i], alpha[j] = ai_new, aj_new
        self._row_cache = {i: row_i, j: row_j}
        return True

    def bias(self) -> float:
        """Average bias implied by free SVs; midpoint of the feasible
        interval when every support vector sits on a box bound."""
        g = self.y - self.u
        free = (self.alpha > 0) & (self.alpha < self.c)
        if free.any():
            return float(g[free].mean())
        up, low = self.movable_masks()
        hi = float(g[up].max()) if up.any() else 0.0
        lo = float(g[low].min()) if low.any() else 0.0
        return (hi + lo) / 2.0

    def diagnostics(
        self, iterations: int, trajectory: list[float] | None
    ) -> TrainDiagnostics:
        b = self.bias()
        yf = self.y * (self.u + b)
        at_zero = self.alpha == 0.0
        at_c = self.alpha == self.c
        violation = np.where(
            at_zero,
            np.maximum(0.0, 1.0 - yf),
            np.where(at_c, np.maximum(0.0, yf - 1.0), np.abs(yf - 1.0)),
        )
        return TrainDiagnostics(
            dual_objective=self.objective(),
            iterations=iterations,
            n_support_vectors=int((self.alpha > 0).sum()),
            n_bounded_svs=int(at_c.sum()),
            total_slack=float(np.maximum(0.0, 1.0 - yf).sum()),
            max_kkt_violation=float(violation.max()),
            alphas=tuple(float(a) for a in self.alpha),
            objective_trajectory=None if trajectory is None else tuple(trajectory),
        )


def _validate_training_data(data: Dataset) -> tuple[np.ndarray, np.ndarray]:
    if len(data) < 2:
        raise InvalidDataError(f"need at least 2 samples, got {len(data)}")
    labels = np.array([check_label(y) for _, y in data], dtype=float)
    if not (labels > 0).any() or not (labels < 0).any():
        raise SingleClassError("training data must contain both labels")
    x = dataset_matrix([v for v, _ in data])
    if not np.isfinite(x).all():
        raise InvalidDataError("training data contains non-finite features")
    return x, labels


def train(
    data: Dataset, config: TrainConfig, *, record_objective: bool = False
) -> tuple[Model, TrainDiagnostics]:
    """Fit a soft-margin SVM on labeled feature vectors.

    Runs pairwise dual updates until the largest optimality-bound violation
    drops to ``config.kkt_tolerance``. The first working index is the worst
    violator; the second maximizes the error gap |E_i - E_j| among indices
    that can still move in the complementary direction. A seeded random
    fallback reselects the pair if a numerically stalled update ever stops
    making progress. Deterministic for fixed data order, config, and seed.

    Returns the trained model and its diagnostics; raises ConvergenceError
    (carrying best-so-far diagnostics) if ``config.max_passes`` pair updates
    are exhausted first.
    """
    x, y = _validate_training_data(data)
    state = _PairSolver(x, y, config)
    rng = np.random.default_rng(config.seed)
    trajectory: list[float] | None = [] if record_objective else None
    iterations = 0
    neg_inf = float("-inf")

    while True:
        g = y - state.u
        up, low = state.movable_masks()
        if not up.any() or not low.any():
            break  # one side fully pinned: nothing can move, optimal for C
        i = int(np.argmax(np.where(up, g, neg_inf)))
        j = int(np.argmin(np.where(low, g, -neg_inf)))
        if g[i] - g[j] <= config.kkt_tolerance:
            break
        if iterations >= config.max_passes:
            raise ConvergenceError(
                f"no convergence after {iterations} pair updates "
                f"(optimality gap {g[i] - g[j]:.3e} > {config.kkt_tolerance:g})",
                diagnostics=state.diagnostics(iterations, trajectory),
            )
        if not state.take_step(i, j):
            if not _random_fallback(state, rng, i, g, low):
                raise ConvergenceError(
                    "solver stalled: no pair admits further progress "
                    f"(optimality gap {g[i] - g[j]:.3e})",
                    diagnostics=state.diagnostics(iterations, trajectory),
                )
        iterations += 1
        if trajectory is not None:
            trajectory.append(state.objective())

    diag = state.diagnostics(iterations, trajectory)
    balance = float((state.alpha * y).sum())
    if abs(balance) > BALANCE_TOL:
        raise MarginForgeError(
            f"internal error: balance constraint drifted to {balance:.3e}"
        )
    model = _build_model(data, x, y, state.alpha, state.bias(), config)
    return model, diag


def _random_fallback(
    state: _PairSolver,
    rng: np.random.Generator,
    i: int,
    g: np.ndarray,
    low: np.ndarray,
) -> bool:
    """Seeded reselection after a stalled update: random second index first,
    then random first index, mirroring the usual heuristic cascade."""
    candidates = np.flatnonzero(low)
    for j in rng.permutation(candidates):
        if g[i] - g[j] > 0 and state.take_step(i, int(j)):
            return True
    up, low = state.movable_masks()
    for i2 in rng.permutation(np.flatnonzero(up)):
        for j2 in rng.permutation(np.flatnonzero(low)):
            if g[int(i2)] - g[int(j2)] > 0 and state.take_step(int(i2), int(j2)):
                return True
    return False


def _build_model(
    data: Dataset,
    x: np.ndarray,
    y: np.ndarray,
    alpha: np.ndarray,
    bias: float,
    config: TrainConfig,
) -> Model:
    sv_mask = alpha > 0
    if not sv_mask.any():
        raise MarginForgeError("internal error: converged with no support vectors")
    support_vectors = tuple(vec for (vec, _), keep in zip(data, sv_mask) if keep)
    coefficients = tuple(float(v) for v in (alpha * y)[sv_mask])
    dim = support_vectors[0].dim
    weights = None
    if isinstance(config.kernel, LinearKernel):
        weights = linear_weights(support_vectors, coefficients, dim)
    return Model(
        kernel=config.kernel,
        bias=bias,
        support_vectors=support_vectors,
        sv_coefficients=coefficients,
        dim=dim,
        explicit_weights=weights,
    )

"""Soft-margin SVM on precomputed kernels, plus the classical RBF baseline.

Training solves the standard C-form dual

    min_a  (1/2) a^T Q a - sum(a)   s.t.  0 <= a_i <= C,  sum(a_i y_i) = 0

with Q_ij = y_i y_j K_ij, by sequential minimal optimization on the
maximal-KKT-violation pair (ties broken toward the lowest index).  The
regularized hinge objective the dual descends from is reported alongside
the model with lambda = 1 / (2 m C), the usual correspondence between the
penalty and constraint formulations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

_BOX_EPS = 1e-12


@dataclass(frozen=True)
class HingeObjectiveReport:
    """lambda * ||w||^2 + mean hinge loss evaluated at the trained solution."""

    objective: float
    regularizer: float
    mean_hinge_loss: float
    hinge_losses: np.ndarray
    lam: float


@dataclass(frozen=True)
class SvmModel:
    """Trained dual solution over a precomputed kernel.

    dual_coef holds alpha_i * y_i (the representer weights), so decision
    values are K_rows @ dual_coef + bias.
    """

    dual_coef: np.ndarray
    bias: float
    support: tuple[int, ...]
    c: float
    labels: np.ndarray
    hinge_report: HingeObjectiveReport | None = None
    spectrum_clipped: bool = False

    @property
    def alphas(self) -> np.ndarray:
        return self.dual_coef * self.labels

    def dual_objective(self, kernel: np.ndarray) -> float:
        """(1/2) a^T Q a - sum(a) at this solution."""
        coef = self.dual_coef
        return float(0.5 * coef @ kernel @ coef - np.sum(self.alphas))

    def to_json(self) -> dict:
        return {
            "alpha_y": [float(v) for v in self.dual_coef],
            "b": float(self.bias),
            "support": list(self.support),
            "C": float(self.c),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SvmModel":
        dual = np.asarray(data["alpha_y"], dtype=float)
        labels = np.where(dual >= 0, 1, -1).astype(int)
        return cls(
            dual_coef=dual,
            bias=float(data["b"]),
            support=tuple(int(i) for i in data["support"]),
            c=float(data["C"]),
            labels=labels,
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _validate_training_inputs(kernel: np.ndarray, y: np.ndarray, c: float):
    if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1]:
        raise ValidationError("training kernel must be square")
    if not np.all(np.isfinite(kernel)):
        raise ValidationError("kernel contains non-finite entries")
    if kernel.shape[0] != y.shape[0]:
        raise ValidationError("kernel size and label count differ")
    if not set(np.unique(y)) <= {-1, 1}:
        raise ValidationError("labels must be +1/-1")
    if len(np.unique(y)) < 2:
        raise ValidationError("training needs both classes present")
    if np.max(np.abs(kernel - kernel.T)) > 1e-6:
        raise ValidationError("kernel is not symmetric within 1e-6")
    if not c > 0:
        raise ValidationError("C must be positive")


def _smo(kernel: np.ndarray, y: np.ndarray, c: float, tol: float, max_iter: int):
    """Maximal-violating-pair SMO.

    Works on the feasible directions d = y_i e_i - y_j e_j, which preserve
    sum(alpha * y).  Returns (alphas, bias, converged).
    """
    m = len(y)
    yf = y.astype(float)
    alphas = np.zeros(m)
    grad = -np.ones(m)  # gradient of the dual objective, (Q a)_t - 1

    converged = False
    for _ in range(max_iter):
        score = -yf * grad  # equals y_t - f_t
        up = ((yf > 0) & (alphas < c - _BOX_EPS)) | ((yf < 0) & (alphas > _BOX_EPS))
        low = ((yf > 0) & (alphas > _BOX_EPS)) | ((yf < 0) & (alphas < c - _BOX_EPS))
        if not up.any() or not low.any():
            converged = True
            break
        up_scores = np.where(up, score, -np.inf)
        low_scores = np.where(low, score, np.inf)
        i = int(np.argmax(up_scores))  # argmax/argmin take the lowest tied index
        j = int(np.argmin(low_scores))
        gap = up_scores[i] - low_scores[j]
        if gap <= tol:
            converged = True
            break
        quad = kernel[i, i] + kernel[j, j] - 2.0 * kernel[i, j]
        delta = gap / max(quad, _BOX_EPS)
        # Box room along the direction: alpha_i moves by +delta*y_i,
        # alpha_j by -delta*y_j.
        delta = min(delta, (c - alphas[i]) if yf[i] > 0 else alphas[i])
        delta = min(delta, alphas[j] if yf[j] > 0 else (c - alphas[j]))
        alphas[i] += delta * yf[i]
        alphas[j] -= delta * yf[j]
        grad += delta * yf * (kernel[:, i] - kernel[:, j])
    else:
        return alphas, 0.0, False

    decision = kernel @ (alphas * yf)
    free = (alphas > _BOX_EPS) & (alphas < c - _BOX_EPS)
    if free.any():
        bias = float(np.mean(yf[free] - decision[free]))
    else:
        score = yf - decision
        up = ((yf > 0) & (alphas < c - _BOX_EPS)) | ((yf < 0) & (alphas > _BOX_EPS))
        low = ((yf > 0) & (alphas > _BOX_EPS)) | ((yf < 0) & (alphas < c - _BOX_EPS))
        hi = np.max(score[up]) if up.any() else 0.0
        lo = np.min(score[low]) if low.any() else 0.0
        bias = float((hi + lo) / 2.0)
    return alphas, bias, converged


def _canonicalize_duplicates(kernel: np.ndarray, y: np.ndarray, alphas: np.ndarray):
    """Average coefficients within groups of exactly identical samples.

    Identical kernel rows with equal labels span a degenerate face of the
    dual optimum; the group mean is the canonical point on it (objective
    and feasibility depend only on the group sum).
    """
    groups: dict[bytes, list[int]] = {}
    for idx in range(len(y)):
        key = kernel[idx].tobytes() + bytes([y[idx] + 1])
        groups.setdefault(key, []).append(idx)
    for members in groups.values():
        if len(members) > 1:
            alphas[members] = float(np.mean(alphas[members]))
    return alphas


def hinge_objective(
    kernel: np.ndarray, y: np.ndarray, dual_coef: np.ndarray, bias: float, c: float
) -> HingeObjectiveReport:
    """Regularized hinge objective with lambda = 1/(2 m C)."""
    m = len(y)
    lam = 1.0 / (2.0 * m * c)
    regularizer = float(dual_coef @ kernel @ dual_coef)
    decision = kernel @ dual_coef + bias
    losses = np.maximum(0.0, 1.0 - y * decision)
    return HingeObjectiveReport(
        objective=float(lam * regularizer + losses.mean()),
        regularizer=regularizer,
        mean_hinge_loss=float(losses.mean()),
        hinge_losses=losses,
        lam=lam,
    )


def clip_spectrum(kernel: np.ndarray) -> np.ndarray:
    """Project a symmetric matrix onto the PSD cone (negative eigenvalues
    to zero).  Only used when the solver fails on a noisy estimate."""
    vals, vecs = np.linalg.eigh(kernel)
    return (vecs * np.maximum(vals, 0.0)) @ vecs.T


def train(
    kernel,
    y,
    c: float = 1.0,
    tol: float = 1e-3,
    max_iter: int = 1_000_000,
) -> SvmModel:
    """Train a C-SVM on a precomputed kernel.

    The kernel is symmetrized as (K + K^T)/2 before solving.  If SMO fails
    to converge (possible on strongly indefinite shot-noise estimates),
    the spectrum is clipped to PSD and training retried once.
    """
    kernel = np.asarray(kernel, dtype=float)
    y = np.asarray(y, dtype=int)
    _validate_training_inputs(kernel, y, c)
    kernel = 0.5 * (kernel + kernel.T)

    alphas, bias, converged = _smo(kernel, y, c, tol, max_iter)
    clipped = False
    if not converged:
        kernel = clip_spectrum(kernel)
        alphas, bias, converged = _smo(kernel, y, c, tol, max_iter)
        clipped = True
        if not converged:
            raise NumericalError("SMO failed to converge even on the clipped kernel")
    alphas = _canonicalize_duplicates(kernel, y, alphas)
    dual_coef = alphas * y
    support = tuple(int(i) for i in np.nonzero(alphas > 1e-8)[0])
    report = hinge_objective(kernel, y, dual_coef, bias, c)
    return SvmModel(
        dual_coef=dual_coef,
        bias=bias,
        support=support,
        c=c,
        labels=y,
        hinge_report=report,
        spectrum_clipped=clipped,
    )


def decision_values(model: SvmModel, k_rows) -> np.ndarray:
    """Raw decision function over rows of a test kernel (rows x train)."""
    k_rows = np.atleast_2d(np.asarray(k_rows, dtype=float))
    return k_rows @ model.dual_coef + model.bias


def predict(model: SvmModel, k_rows) -> np.ndarray:
    """Sign of the decision values with 0 mapped to +1."""
    values = decision_values(model, k_rows)
    return np.where(values >= 0.0, 1, -1)


def accuracy(predicted, truth) -> float:
    predicted = np.asarray(predicted, dtype=int)
    truth = np.asarray(truth, dtype=int)
    if predicted.shape != truth.shape:
        raise ValidationError("prediction and truth lengths differ")
    if predicted.size == 0:
        raise ValidationError("cannot score an empty prediction set")
    return float(np.mean(predicted == truth))


def gamma_scale(features) -> float:
    """The 'scale' heuristic: 1 / (n_features * variance of all entries)."""
    features = np.asarray(features, dtype=float)
    variance = float(features.var())
    if variance == 0.0:
        return 1.0
    return 1.0 / (features.shape[1] * variance)


def rbf_kernel(x1, x2, gamma: float | None = None) -> np.ndarray:
    """Gaussian kernel exp(-gamma ||a - b||^2), shape (len(x1), len(x2)).

    gamma=None applies the 'scale' heuristic computed from x2, the
    training-side features in both the train (K_M) and test (K_S) blocks.
    """
    x1 = np.atleast_2d(np.asarray(x1, dtype=float))
    x2 = np.atleast_2d(np.asarray(x2, dtype=float))
    if gamma is None:
        gamma = gamma_scale(x2)
    sq = (
        np.sum(x1**2, axis=1)[:, None]
        + np.sum(x2**2, axis=1)[None, :]
        - 2.0 * x1 @ x2.T
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))

"""Multi-class linear max-margin classifier on document codes.

The classifier scores a document code theta with one weight row per class and
no bias. Training minimizes 0.5*||eta||^2 + C * mean cost-augmented hinge,
where the hinge for a document is the best margin violation over all labels
(the true label contributes zero, so the risk is never negative).

The solver works on the dual: each document owns a non-negative dual vector
that sums to C/D, and exactly maximizing the dual over one document's vector
is a Euclidean projection onto that scaled simplex. Cycling these exact block
updates in document order is deterministic and drives the concave dual to its
optimum; the returned weights are the best primal iterate seen across epochs.
"""

from __future__ import annotations

import numpy as np

from .numerics import project_to_simplex

__all__ = [
    "discriminant",
    "loss_augmented_predict",
    "margin_violation",
    "hinge_risk",
    "svm_objective",
    "train_svm",
    "predict",
    "predict_many",
]


def _check_eta_theta(eta, theta):
    eta = np.asarray(eta, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if eta.ndim != 2:
        raise ValueError("eta must be a (num_classes, K) matrix")
    if theta.ndim != 1 or theta.size != eta.shape[1]:
        raise ValueError("theta length must match eta's column count")
    return eta, theta


def discriminant(eta, theta, y: int) -> float:
    """Score of class y on document code theta: eta[y] . theta."""
    eta, theta = _check_eta_theta(eta, theta)
    if not 0 <= y < eta.shape[0]:
        raise ValueError("class index out of range")
    return float(eta[y] @ theta)


def loss_augmented_predict(eta, theta, y_true: int, cost_ell: float) -> int:
    """Label with the best score after adding `cost_ell` to every wrong label.

    Ties break toward the smallest label index. With cost_ell = 0 this is the
    plain prediction.
    """
    eta, theta = _check_eta_theta(eta, theta)
    if not 0 <= y_true < eta.shape[0]:
        raise ValueError("y_true out of range")
    scores = eta @ theta + cost_ell * (np.arange(eta.shape[0]) != y_true)
    return int(np.argmax(scores))


def margin_violation(eta, theta, y_true: int, cost_ell: float) -> float:
    """Cost-augmented hinge for one document: max over labels of
    cost*[y != y_true] + score(y) - score(y_true). Never negative because the
    true label contributes zero."""
    eta, theta = _check_eta_theta(eta, theta)
    scores = eta @ theta
    augmented = scores + cost_ell * (np.arange(eta.shape[0]) != y_true)
    return float(np.max(augmented) - scores[y_true])


def hinge_risk(eta, thetas, labels, cost_ell: float) -> float:
    """Mean cost-augmented hinge over a collection of coded documents."""
    eta = np.asarray(eta, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    if thetas.ndim != 2 or thetas.shape[0] == 0:
        raise ValueError("need at least one document code")
    if labels.shape != (thetas.shape[0],):
        raise ValueError("need exactly one label per document code")
    num_docs = thetas.shape[0]
    num_classes = eta.shape[0]
    if labels.min() < 0 or labels.max() >= num_classes:
        raise ValueError("labels out of range for eta")
    scores = thetas @ eta.T
    augmented = scores + cost_ell * (labels[:, None] != np.arange(num_classes)[None, :])
    true_scores = scores[np.arange(num_docs), labels]
    return float(np.mean(np.max(augmented, axis=1) - true_scores))


def svm_objective(eta, thetas, labels, svm_c: float, cost_ell: float) -> float:
    """0.5*||eta||^2 + svm_c * hinge_risk."""
    eta = np.asarray(eta, dtype=float)
    return 0.5 * float(np.sum(eta * eta)) + svm_c * hinge_risk(eta, thetas, labels, cost_ell)


def predict(eta, theta) -> int:
    """Highest-scoring label for one document code (smallest index on ties)."""
    eta, theta = _check_eta_theta(eta, theta)
    return int(np.argmax(eta @ theta))


def predict_many(eta, thetas) -> np.ndarray:
    """Highest-scoring label per row of `thetas` (smallest index on ties)."""
    eta = np.asarray(eta, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim != 2:
        raise ValueError("thetas must be a (num_docs, K) matrix")
    return np.argmax(thetas @ eta.T, axis=1)


def _dual_solve(thetas, labels, svm_c, cost_ell, max_epochs, tol, num_classes):
    num_docs, num_topics = thetas.shape
    per_doc_c = svm_c / num_docs
    # start with all dual mass on the true label, which corresponds to eta = 0
    alpha = np.zeros((num_docs, num_classes))
    alpha[np.arange(num_docs), labels] = per_doc_c
    eta = np.zeros((num_classes, num_topics))
    sq_norms = np.einsum("dk,dk->d", thetas, thetas)
    costs = cost_ell * (labels[:, None] != np.arange(num_classes)[None, :])

    best_obj = svm_objective(eta, thetas, labels, svm_c, cost_ell)
    best_eta = eta.copy()
    trace = [best_obj]
    for _ in range(max_epochs):
        moved = 0.0
        for d in range(num_docs):
            theta_d = thetas[d]
            if sq_norms[d] <= 0.0:
                # theta = 0: eta does not depend on this block, put the mass
                # where the cost term wants it (smallest index on ties)
                new = np.zeros(num_classes)
                new[int(np.argmax(costs[d]))] = per_doc_c
            else:
                scores = eta @ theta_d
                center = (scores + alpha[d] * sq_norms[d] + costs[d]) / sq_norms[d]
                new = per_doc_c * project_to_simplex(center / per_doc_c)
            diff = new - alpha[d]
            if np.any(diff):
                eta -= np.outer(diff, theta_d)
                moved += float(np.abs(diff).sum())
            alpha[d] = new
        obj = svm_objective(eta, thetas, labels, svm_c, cost_ell)
        if obj < best_obj:
            best_obj = obj
            best_eta = eta.copy()
        trace.append(best_obj)
        # exact block maximization makes the dual ascend monotonically; the
        # duality gap against the best primal certifies how close we are
        # (the primal alone can move non-monotonically between epochs)
        dual = float(np.sum(alpha * costs)) - 0.5 * float(np.sum(eta * eta))
        if moved == 0.0 or best_obj - dual <= tol * (1.0 + abs(best_obj)):
            break
    return best_eta, trace


def train_svm(
    thetas,
    labels,
    svm_c: float,
    cost_ell: float,
    max_epochs: int = 200,
    tol: float = 1e-6,
    num_classes: int | None = None,
) -> np.ndarray:
    """Fit classifier weights on fixed document codes.

    Deterministic: documents are visited in order and every block update is
    exact, so reruns on the same inputs give identical weights. Returns the
    weights achieving the best objective seen across epochs. svm_c = 0 returns
    all-zero weights. Inputs with a single distinct label are rejected.
    """
    thetas = np.asarray(thetas, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    if thetas.ndim != 2 or thetas.shape[0] == 0:
        raise ValueError("need at least one document code")
    if labels.shape != (thetas.shape[0],):
        raise ValueError("need exactly one label per document code")
    if labels.min() < 0:
        raise ValueError("labels must be non-negative")
    if num_classes is None:
        num_classes = int(labels.max()) + 1
    if num_classes < 2:
        raise ValueError("need at least two classes")
    if labels.max() >= num_classes:
        raise ValueError("labels out of range")
    if np.unique(labels).size < 2:
        raise ValueError("training labels contain a single class")
    if svm_c < 0:
        raise ValueError("svm_c must be non-negative")
    if svm_c == 0:
        return np.zeros((num_classes, thetas.shape[1]))
    eta, _ = _dual_solve(thetas, labels, svm_c, cost_ell, max_epochs, tol, num_classes)
    return eta

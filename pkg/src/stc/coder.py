"""Per-document sparse coding against a fixed topical dictionary.

A document's code has two levels: one non-negative vector per observed word
(the word code, length K) and one non-negative summary vector for the whole
document (the document code theta). Word counts are modeled as Poisson with
rate s_n . beta_:n, word codes are tied to theta by a quadratic coupling, and
both levels carry their own sparsity penalty. For a fixed dictionary the
problem is solved by coordinate descent: every word-code coordinate has a
closed-form non-negative minimizer (the larger root of a scalar quadratic,
clamped at zero), and the document code is a truncated or rescaled average of
the word codes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .svm import loss_augmented_predict, margin_violation

__all__ = [
    "Hyperparams",
    "DocEncoding",
    "NumericsError",
    "BETA_ZERO_TOL",
    "update_word_code_element",
    "update_word_code",
    "update_document_code",
    "document_objective",
    "encode_document",
    "encode_document_supervised",
]

# below this weight a dictionary entry is treated as exactly zero in the
# coordinate update, where the quadratic degenerates to its explicit limit
BETA_ZERO_TOL = 1e-12


class NumericsError(RuntimeError):
    """Non-finite values encountered while encoding or training."""


@dataclass(frozen=True)
class Hyperparams:
    """Weights, regularizer modes, and schedule knobs shared across training.

    `gamma` (code/document coupling) and `rho` (word-code penalty) default to
    `lam` when left as None. `tol_obj` is the relative objective tolerance of
    the outer training loop; `inner_tol` is the per-document encoding
    tolerance. `mean_floor` bounds reconstructions away from zero inside the
    log of the Poisson loss and nowhere else.
    """

    lam: float = 0.1
    gamma: Optional[float] = None
    rho: Optional[float] = None
    theta_reg: str = "l1"
    s_reg: str = "l1"
    svm_c: float = 1.0
    cost_ell: float = 3600.0
    inner_sweeps: int = 25
    outer_iters: int = 50
    tol_obj: float = 1e-4
    inner_tol: float = 1e-5
    mean_floor: float = 1e-12
    pg_steps: int = 10
    pg_step0: float = 1.0
    svm_max_epochs: int = 200
    svm_tol: float = 1e-6

    def __post_init__(self):
        if self.gamma is None:
            object.__setattr__(self, "gamma", self.lam)
        if self.rho is None:
            object.__setattr__(self, "rho", self.lam)
        object.__setattr__(self, "theta_reg", str(self.theta_reg).lower())
        object.__setattr__(self, "s_reg", str(self.s_reg).lower())
        if self.lam < 0:
            raise ValueError("lam must be non-negative")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive (set it explicitly when lam is 0)")
        if self.rho < 0:
            raise ValueError("rho must be non-negative")
        if self.theta_reg not in ("l1", "l2"):
            raise ValueError("theta_reg must be 'l1' or 'l2'")
        if self.s_reg not in ("l1", "l2"):
            raise ValueError("s_reg must be 'l1' or 'l2'")
        if self.svm_c < 0:
            raise ValueError("svm_c must be non-negative")
        if self.cost_ell < 0:
            raise ValueError("cost_ell must be non-negative")
        if self.inner_sweeps < 1:
            raise ValueError("inner_sweeps must be at least 1")
        if self.outer_iters < 0:
            raise ValueError("outer_iters must be non-negative")
        if self.tol_obj <= 0 or self.inner_tol <= 0:
            raise ValueError("objective tolerances must be positive")
        if not 0 < self.mean_floor <= 1e-6:
            raise ValueError("mean_floor must lie in (0, 1e-6]")
        if self.pg_steps < 1:
            raise ValueError("pg_steps must be at least 1")
        if self.pg_step0 <= 0:
            raise ValueError("pg_step0 must be positive")
        if self.svm_max_epochs < 1:
            raise ValueError("svm_max_epochs must be at least 1")
        if self.svm_tol <= 0:
            raise ValueError("svm_tol must be positive")


@dataclass(frozen=True)
class DocEncoding:
    """Codes for one document: theta (K,), word_codes (|I|, K), and the
    per-document objective value they achieve."""

    theta: np.ndarray
    word_codes: np.ndarray
    objective: float


def _element_root(mu, beta_kn, count, theta_k, hp: Hyperparams):
    """Non-negative minimizer of the single-coordinate code objective.

    `mu` is the word's reconstruction from every other coordinate. Solves the
    stationarity quadratic and keeps the larger root; where the dictionary
    weight is (numerically) zero the quadratic degenerates and the explicit
    limit applies. The clamp at zero is exact: the objective is strictly
    convex in the coordinate, so the constrained minimizer is the positive
    part of the unconstrained one. Operates elementwise on arrays.
    """
    gamma, rho = hp.gamma, hp.rho
    if hp.s_reg == "l1":
        curve = gamma
        tau = beta_kn + rho - 2.0 * gamma * theta_k
        limit = theta_k - rho / (2.0 * gamma)
    else:
        curve = gamma + rho
        tau = beta_kn - 2.0 * gamma * theta_k
        limit = gamma * theta_k / curve
    degenerate = beta_kn < BETA_ZERO_TOL
    a = 2.0 * curve * beta_kn
    b = 2.0 * curve * mu + beta_kn * tau
    c = mu * tau - count * beta_kn
    disc = b * b - 4.0 * a * c
    # analytically non-negative; rounding can push it a hair below zero
    root_disc = np.sqrt(np.maximum(disc, 0.0))
    # larger root, computed without the -b + sqrt cancellation: when b > 0
    # use the c/q form (stable as a -> 0), otherwise the direct form
    safe_a = np.where(degenerate, 1.0, a)
    direct = (-b + root_disc) / (2.0 * safe_a)
    alt = -2.0 * c / np.where(b + root_disc > 0.0, b + root_disc, 1.0)
    root = np.where(b > 0.0, alt, direct)
    nu = np.where(degenerate, limit, root)
    return np.maximum(nu, 0.0)


def update_word_code_element(k, word_code, theta, beta_col, count, hp: Hyperparams) -> float:
    """Exact coordinate update of entry `k` of one word's code.

    `beta_col` is the dictionary column for this word (one weight per topic)
    and `count` the word's observed count. The other entries of `word_code`
    enter only through the residual reconstruction.
    """
    s = np.asarray(word_code, dtype=float)
    b = np.asarray(beta_col, dtype=float)
    mu = max(float(s @ b) - float(s[k] * b[k]), 0.0)
    return float(_element_root(mu, float(b[k]), float(count), float(theta[k]), hp))


def update_word_code(word_code, theta, beta_col, count, hp: Hyperparams) -> np.ndarray:
    """One full coordinate sweep (k = 0..K-1, in order) over a word's code."""
    s = np.array(word_code, dtype=float, copy=True)
    b = np.asarray(beta_col, dtype=float)
    recon = float(s @ b)
    for k in range(s.size):
        mu = max(recon - float(s[k] * b[k]), 0.0)
        new = float(_element_root(mu, float(b[k]), float(count), float(theta[k]), hp))
        recon = mu + new * float(b[k])
        s[k] = new
    return s


def update_document_code(word_codes, hp: Hyperparams, shift=None) -> np.ndarray:
    """Closed-form document-code update from the word codes of one document.

    With the l1 document penalty this is the word-code average, soft-shifted
    down by lam/(2*gamma*|I|) and clamped at zero; with the l2 penalty the
    average is rescaled by gamma/(lam/|I| + gamma) and clamped. `shift` is
    added to the average first (used by the supervised coder).
    """
    codes = np.asarray(word_codes, dtype=float)
    if codes.ndim != 2 or codes.shape[0] == 0:
        raise ValueError("need at least one word code")
    num_words = codes.shape[0]
    mean = codes.mean(axis=0)
    if shift is not None:
        mean = mean + shift
    if hp.theta_reg == "l1":
        theta = mean - hp.lam / (2.0 * hp.gamma * num_words)
    else:
        theta = (hp.gamma / (hp.lam / num_words + hp.gamma)) * mean
    return np.maximum(theta, 0.0)


def _doc_objective(counts, recon, word_codes, theta, hp: Hyperparams) -> float:
    floored = np.maximum(recon, hp.mean_floor)
    loss = float(np.sum(floored - counts * np.log(floored)))
    if hp.theta_reg == "l1":
        theta_pen = float(theta.sum())
    else:
        theta_pen = float(theta @ theta)
    if hp.s_reg == "l1":
        s_pen = float(word_codes.sum())
    else:
        s_pen = float(np.sum(word_codes * word_codes))
    coupling = float(np.sum((word_codes - theta) ** 2))
    return loss + hp.lam * theta_pen + hp.gamma * coupling + hp.rho * s_pen


def document_objective(doc, beta, theta, word_codes, hp: Hyperparams) -> float:
    """Per-document objective: floored Poisson loss + document penalty +
    coupling + word-code penalty."""
    counts = doc.counts.astype(float)
    cols = beta[:, doc.word_indices]
    recon = np.einsum("nk,kn->n", np.asarray(word_codes, dtype=float), cols)
    return _doc_objective(counts, recon, np.asarray(word_codes, dtype=float),
                          np.asarray(theta, dtype=float), hp)


def _sweep_word_codes(S, recon, cols, counts, theta, hp: Hyperparams):
    """One in-place coordinate sweep over every word code of a document.

    Word codes are decoupled given theta, so updating coordinate k for all
    words at once is the same computation as visiting words one by one.
    """
    for k in range(S.shape[1]):
        bk = cols[k]
        mu = np.maximum(recon - S[:, k] * bk, 0.0)
        new = _element_root(mu, bk, counts, float(theta[k]), hp)
        recon = mu + new * bk
        S[:, k] = new
    return recon


def _initial_state(doc, beta, hp, init):
    idx = doc.word_indices
    num_topics = beta.shape[0]
    if idx[-1] >= beta.shape[1]:
        raise ValueError(
            f"document uses word id {int(idx[-1])} beyond the dictionary's {beta.shape[1]} words"
        )
    cols = beta[:, idx]
    counts = doc.counts.astype(float)
    if init is not None:
        S = np.array(init.word_codes, dtype=float, copy=True)
        theta = np.array(init.theta, dtype=float, copy=True)
        if S.shape != (idx.size, num_topics) or theta.shape != (num_topics,):
            raise ValueError("warm-start encoding does not match this document and dictionary")
    else:
        S = np.full((idx.size, num_topics), 1.0 / num_topics)
        theta = np.full(num_topics, 1.0 / num_topics)
    recon = np.einsum("nk,kn->n", S, cols)
    return cols, counts, S, theta, recon


def encode_document(doc, beta, hp: Hyperparams, init=None, doc_index=None) -> DocEncoding:
    """Sparse-code one document against a fixed dictionary.

    Alternates one coordinate sweep over all word codes with one document-code
    update, stopping when the per-document objective improves by less than
    `inner_tol` (relative) or after `inner_sweeps` rounds. `init` warm-starts
    from a previous encoding; otherwise every code entry starts at 1/K.
    """
    cols, counts, S, theta, recon = _initial_state(doc, beta, hp, init)
    prev = _doc_objective(counts, recon, S, theta, hp)
    obj = prev
    for sweep in range(1, hp.inner_sweeps + 1):
        recon = _sweep_word_codes(S, recon, cols, counts, theta, hp)
        theta = update_document_code(S, hp)
        obj = _doc_objective(counts, recon, S, theta, hp)
        if not np.isfinite(obj):
            where = "?" if doc_index is None else doc_index
            raise NumericsError(f"document {where}: non-finite objective in sweep {sweep}")
        if prev - obj < hp.inner_tol * max(1.0, abs(prev)):
            break
        prev = obj
    return DocEncoding(theta=theta, word_codes=S, objective=float(obj))


def encode_document_supervised(
    doc,
    beta,
    hp: Hyperparams,
    eta,
    y_true: int,
    num_docs: int,
    init=None,
    doc_index=None,
) -> DocEncoding:
    """Sparse-code one document with the classifier coupled in.

    Word-code updates are unchanged (the classifier sees only theta). Each
    document-code update first finds the cost-augmented competing label at the
    current theta, then shifts the word-code average toward the true label's
    weights and away from the competitor before the usual truncation. A
    proposal that would increase this document's share of the supervised
    objective is discarded, which keeps training monotone even when the
    competing label flips. With svm_c = 0 this is exactly `encode_document`.
    """
    if hp.svm_c == 0:
        return encode_document(doc, beta, hp, init=init, doc_index=doc_index)
    if hp.lam <= 0:
        raise ValueError("supervised encoding requires lam > 0 (the shifted average divides by it)")
    eta = np.asarray(eta, dtype=float)
    if eta.ndim != 2 or eta.shape[1] != beta.shape[0]:
        raise ValueError("eta must have one row per class and one column per topic")
    if not 0 <= y_true < eta.shape[0]:
        raise ValueError("y_true out of range")
    if num_docs < 1:
        raise ValueError("num_docs must be positive")

    cols, counts, S, theta, recon = _initial_state(doc, beta, hp, init)
    scale = hp.svm_c / num_docs
    shift_coef = hp.svm_c / (2.0 * num_docs * len(doc) * hp.lam)

    def total(theta_vec):
        return _doc_objective(counts, recon, S, theta_vec, hp) + scale * margin_violation(
            eta, theta_vec, y_true, hp.cost_ell
        )

    prev = total(theta)
    obj = prev
    for sweep in range(1, hp.inner_sweeps + 1):
        recon = _sweep_word_codes(S, recon, cols, counts, theta, hp)
        competing = loss_augmented_predict(eta, theta, y_true, hp.cost_ell)
        shift = shift_coef * (eta[y_true] - eta[competing])
        obj_keep = total(theta)
        obj = obj_keep
        # shifted proposal first; if it overshoots, the plain truncated mean
        # still makes unsupervised progress, so try that before giving up
        for proposal in (update_document_code(S, hp, shift=shift),
                         update_document_code(S, hp)):
            obj_prop = total(proposal)
            if obj_prop <= obj_keep + 1e-12 * max(1.0, abs(obj_keep)):
                theta, obj = proposal, obj_prop
                break
        if not np.isfinite(obj):
            where = "?" if doc_index is None else doc_index
            raise NumericsError(f"document {where}: non-finite objective in sweep {sweep}")
        if prev - obj < hp.inner_tol * max(1.0, abs(prev)):
            break
        prev = obj
    return DocEncoding(theta=theta, word_codes=S, objective=float(obj))

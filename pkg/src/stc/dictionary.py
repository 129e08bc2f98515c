"""Dictionary learning: projected gradient descent on the reconstruction loss.

With all codes held fixed, the only objective term touching the dictionary is
the Poisson reconstruction loss, and each topic row is constrained to the
probability simplex. Updates take plain gradient steps followed by a per-row
simplex projection, with Armijo backtracking on the step size so the (floored)
total loss never increases.
"""

from __future__ import annotations

import numpy as np

from .numerics import project_rows_to_simplex

__all__ = [
    "total_reconstruction_loss",
    "reconstruction_gradient",
    "update_dictionary",
]

ARMIJO_C1 = 1e-4
MAX_HALVINGS = 30


def _check_alignment(beta, encodings, corpus):
    beta = np.asarray(beta, dtype=float)
    if beta.ndim != 2:
        raise ValueError("beta must be a (K, N) matrix")
    if len(encodings) != len(corpus):
        raise ValueError(
            f"got {len(encodings)} encodings for {len(corpus)} documents"
        )
    num_topics = beta.shape[0]
    for i, (doc, enc) in enumerate(zip(corpus, encodings)):
        if enc.word_codes.shape != (len(doc), num_topics):
            raise ValueError(f"encoding {i} does not match its document and beta")
        if doc.word_indices[-1] >= beta.shape[1]:
            raise ValueError(f"document {i} uses word ids beyond beta's columns")
    return beta


def total_reconstruction_loss(beta, encodings, corpus, mean_floor: float = 1e-12) -> float:
    """Sum of floored Poisson losses over every (document, word) occurrence."""
    beta = _check_alignment(beta, encodings, corpus)
    total = 0.0
    for doc, enc in zip(corpus, encodings):
        cols = beta[:, doc.word_indices]
        recon = np.einsum("nk,kn->n", enc.word_codes, cols)
        floored = np.maximum(recon, mean_floor)
        total += float(np.sum(floored - doc.counts * np.log(floored)))
    return total


def reconstruction_gradient(beta, encodings, corpus, mean_floor: float = 1e-12) -> np.ndarray:
    """Gradient of the reconstruction loss in beta.

    Entry (k, n) accumulates s_dnk * (1 - count/reconstruction) over the
    documents containing word n; columns of words that never occur stay zero.
    """
    beta = _check_alignment(beta, encodings, corpus)
    grad = np.zeros_like(beta)
    for doc, enc in zip(corpus, encodings):
        idx = doc.word_indices
        cols = beta[:, idx]
        recon = np.einsum("nk,kn->n", enc.word_codes, cols)
        floored = np.maximum(recon, mean_floor)
        coef = 1.0 - doc.counts / floored
        # word ids are unique within a document, so fancy-index += is safe
        grad[:, idx] += (enc.word_codes * coef[:, None]).T
    return grad


def update_dictionary(
    beta,
    encodings,
    corpus,
    pg_steps: int = 10,
    step0: float = 1.0,
    mean_floor: float = 1e-12,
) -> tuple[np.ndarray, bool]:
    """Run `pg_steps` projected gradient steps with Armijo backtracking.

    Each step tries step0 and halves up to 30 times until the projected
    candidate satisfies the sufficient-decrease condition; projection onto the
    simplex guarantees the reference direction is non-ascending, so accepted
    steps never increase the loss. Returns (new_beta, stalled) where stalled
    means no step was ever accepted and the input is returned unchanged.
    """
    beta = _check_alignment(beta, encodings, corpus).copy()
    current = total_reconstruction_loss(beta, encodings, corpus, mean_floor)
    any_accepted = False
    for _ in range(pg_steps):
        grad = reconstruction_gradient(beta, encodings, corpus, mean_floor)
        accepted = False
        step = step0
        for _ in range(MAX_HALVINGS + 1):
            candidate = project_rows_to_simplex(beta - step * grad)
            cand_loss = total_reconstruction_loss(candidate, encodings, corpus, mean_floor)
            decrease_ref = float(np.sum(grad * (candidate - beta)))
            if cand_loss <= current + ARMIJO_C1 * decrease_ref:
                beta = candidate
                current = cand_loss
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        any_accepted = True
    return beta, not any_accepted

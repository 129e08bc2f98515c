"""Evaluation and inspection: sparsity, aggregated codes, accuracy, top words."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SparsityReport",
    "sparsity_ratio",
    "sparsity_report",
    "average_word_code",
    "average_document_code",
    "accuracy",
    "top_words",
    "format_sparsity_tsv",
    "format_class_codes_tsv",
    "format_top_words_tsv",
]


@dataclass(frozen=True)
class SparsityReport:
    """Mean fraction of zero entries in word codes and document codes."""

    per_word_ratio: float
    per_doc_ratio: float
    zero_tolerance: float


def sparsity_ratio(code, zero_tol: float = 0.0) -> float:
    """Fraction of entries with magnitude at most `zero_tol`.

    The default tolerance is 0: the coder produces exact zeros, so nothing
    needs to be blurred away.
    """
    code = np.asarray(code, dtype=float)
    if code.size == 0:
        raise ValueError("empty code")
    if zero_tol < 0:
        raise ValueError("zero_tol must be non-negative")
    return float(np.mean(np.abs(code) <= zero_tol))


def sparsity_report(encodings, zero_tol: float = 0.0) -> SparsityReport:
    """Aggregate sparsity over a corpus' encodings."""
    if len(encodings) == 0:
        raise ValueError("no encodings")
    word_ratios = [sparsity_ratio(enc.word_codes, zero_tol) for enc in encodings]
    doc_ratios = [sparsity_ratio(enc.theta, zero_tol) for enc in encodings]
    return SparsityReport(
        per_word_ratio=float(np.mean(word_ratios)),
        per_doc_ratio=float(np.mean(doc_ratios)),
        zero_tolerance=zero_tol,
    )


def average_word_code(word: int, encodings, corpus) -> np.ndarray:
    """Mean code of one word over the documents that contain it."""
    if len(encodings) != len(corpus):
        raise ValueError("encodings and corpus are misaligned")
    rows = []
    for doc, enc in zip(corpus, encodings):
        pos = np.searchsorted(doc.word_indices, word)
        if pos < len(doc) and doc.word_indices[pos] == word:
            rows.append(enc.word_codes[pos])
    if not rows:
        raise ValueError(f"word {word} appears in no document")
    return np.mean(rows, axis=0)


def average_document_code(encodings, labels, y: int) -> tuple[np.ndarray, bool]:
    """L1-normalized mean document code of class y.

    Returns (code, degenerate); a class whose mean code is all zero comes back
    as all zero with the degenerate flag set instead of dividing by zero.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if len(encodings) != labels.size:
        raise ValueError("encodings and labels are misaligned")
    members = [enc.theta for enc, label in zip(encodings, labels) if label == y]
    if not members:
        raise ValueError(f"class {y} has no documents")
    mean = np.mean(members, axis=0)
    norm = float(np.abs(mean).sum())
    if norm == 0.0:
        return mean, True
    return mean / norm, False


def accuracy(predictions, labels) -> float:
    """Fraction of matching entries."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape or predictions.size == 0:
        raise ValueError("predictions and labels must be aligned and non-empty")
    return float(np.mean(predictions == labels))


def top_words(beta, topic: int, how_many: int, vocab=None):
    """The `how_many` heaviest words of one topic as (term_or_id, weight) pairs.

    Sorted by weight descending; equal weights break toward the smaller word
    id. Without a vocabulary the word ids themselves are returned.
    """
    beta = np.asarray(beta, dtype=float)
    if not 0 <= topic < beta.shape[0]:
        raise ValueError("topic out of range")
    if how_many < 1:
        raise ValueError("how_many must be positive")
    row = beta[topic]
    order = np.lexsort((np.arange(row.size), -row))
    picked = order[: min(how_many, row.size)]
    if vocab is None:
        return [(int(n), float(row[n])) for n in picked]
    return [(vocab[int(n)], float(row[n])) for n in picked]


def format_sparsity_tsv(report: SparsityReport) -> str:
    header = "# per_word_sparsity\tper_doc_sparsity\tzero_tolerance"
    row = f"{report.per_word_ratio:.17g}\t{report.per_doc_ratio:.17g}\t{report.zero_tolerance:.17g}"
    return header + "\n" + row + "\n"


def format_class_codes_tsv(class_codes, degenerate_flags) -> str:
    """One row per class: class id, degenerate flag, then the K code entries."""
    lines = ["# class\tdegenerate\tcode"]
    for y, (code, flag) in enumerate(zip(class_codes, degenerate_flags)):
        entries = " ".join(f"{v:.17g}" for v in code)
        lines.append(f"{y}\t{int(flag)}\t{entries}")
    return "\n".join(lines) + "\n"


def format_top_words_tsv(beta, vocab, how_many: int) -> str:
    lines = ["# topic\tterm\tweight"]
    for topic in range(np.asarray(beta).shape[0]):
        for term, weight in top_words(beta, topic, how_many, vocab):
            lines.append(f"{topic}\t{term}\t{weight:.17g}")
    return "\n".join(lines) + "\n"

"""Training loops: alternate encoding, dictionary updates, and classifier fits.

Unsupervised training alternates two half-steps (encode every document with
the dictionary fixed, then update the dictionary with codes fixed), each of
which cannot increase the overall objective. Supervised training adds a third
half-step that refits the classifier on the current document codes; documents
are then encoded with the classifier coupled in. Every half-step appends the
full objective to the model's trace and logs one line of the form
``iter=<i> step=<encode|dict|svm> objective=<f>``.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coder import (
    DocEncoding,
    Hyperparams,
    document_objective,
    encode_document,
    encode_document_supervised,
)
from .corpus import Corpus, LabeledCorpus, as_corpus
from .dictionary import update_dictionary
from .numerics import is_on_simplex, project_rows_to_simplex
from .svm import hinge_risk, svm_objective, train_svm

__all__ = [
    "StcModel",
    "MedStcModel",
    "stc_objective",
    "medstc_objective",
    "init_model",
    "encode_corpus",
    "train_stc",
    "train_medstc",
]

logger = logging.getLogger("stc.trainer")


@dataclass
class StcModel:
    """A learned dictionary plus the settings and objective trace that made it."""

    beta: np.ndarray
    hp: Hyperparams
    objective_trace: list[float] = field(default_factory=list)
    seed: int = 0

    @property
    def num_topics(self) -> int:
        return self.beta.shape[0]

    @property
    def num_words(self) -> int:
        return self.beta.shape[1]


@dataclass
class MedStcModel(StcModel):
    """A dictionary plus max-margin classifier weights (one row per class)."""

    eta: np.ndarray = None
    num_classes: int = 0

    def __post_init__(self):
        if self.eta is None:
            raise ValueError("a supervised model needs classifier weights")
        if self.num_classes < 2:
            raise ValueError("a supervised model needs at least two classes")


def _check_model_state(beta, encodings, corpus):
    if len(encodings) != len(corpus):
        raise ValueError(f"got {len(encodings)} encodings for {len(corpus)} documents")
    num_topics = beta.shape[0]
    for k in range(num_topics):
        if not is_on_simplex(beta[k], tol=1e-8):
            raise ValueError(f"dictionary row {k} is not on the probability simplex")
    for i, (doc, enc) in enumerate(zip(corpus, encodings)):
        if enc.word_codes.shape != (len(doc), num_topics) or enc.theta.shape != (num_topics,):
            raise ValueError(f"encoding {i} does not match its document and beta")
        if np.any(enc.word_codes < 0) or np.any(enc.theta < 0):
            raise ValueError(f"encoding {i} contains negative codes")


def stc_objective(beta, encodings, corpus, hp: Hyperparams) -> float:
    """Full unsupervised objective: summed per-document objectives.

    Validates the block-constraint invariants (codes non-negative, dictionary
    rows on the simplex) before evaluating. An empty corpus scores 0.
    """
    corpus = as_corpus(corpus)
    if len(corpus) == 0:
        return 0.0
    beta = np.asarray(beta, dtype=float)
    _check_model_state(beta, encodings, corpus)
    return sum(
        document_objective(doc, beta, enc.theta, enc.word_codes, hp)
        for doc, enc in zip(corpus, encodings)
    )


def medstc_objective(beta, encodings, corpus, labels, eta, hp: Hyperparams) -> float:
    """Supervised objective: unsupervised value + svm_c * hinge risk + 0.5*||eta||^2."""
    base = stc_objective(beta, encodings, corpus, hp)
    eta = np.asarray(eta, dtype=float)
    thetas = np.stack([enc.theta for enc in encodings]) if len(encodings) else np.zeros((0, beta.shape[0]))
    risk = hp.svm_c * hinge_risk(eta, thetas, labels, hp.cost_ell) if hp.svm_c > 0 else 0.0
    return base + risk + 0.5 * float(np.sum(eta * eta))


def init_model(num_topics: int, num_words: int, seed: int, jitter: float = 1e-3):
    """Seeded dictionary and code initialization.

    Every dictionary row starts uniform at 1/N plus independent U(0, jitter/N)
    noise, then is projected back onto the simplex; jitter = 0 keeps the rows
    exactly uniform (and never touches the generator). Codes start at 1/K.
    Returns (beta, code_init).
    """
    if num_topics < 1 or num_words < 1:
        raise ValueError("need at least one topic and one word")
    base = np.full((num_topics, num_words), 1.0 / num_words)
    if jitter > 0:
        rng = np.random.default_rng(seed)
        base = base + rng.uniform(0.0, jitter / num_words, size=base.shape)
    beta = project_rows_to_simplex(base)
    return beta, 1.0 / num_topics


def _resolve_threads(threads) -> int:
    if threads is None:
        return os.cpu_count() or 1
    return max(1, int(threads))


def _map_documents(fn, corpus, threads):
    """Apply fn(index, document) to every document, in parallel when asked.

    Results land in a list slot by document index, so the outcome does not
    depend on thread scheduling.
    """
    workers = _resolve_threads(threads)
    results = [None] * len(corpus)
    if workers == 1 or len(corpus) <= 1:
        for i, doc in enumerate(corpus):
            results[i] = fn(i, doc)
        return results
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(fn, i, doc): i for i, doc in enumerate(corpus)}
        for future, i in futures.items():
            results[i] = future.result()
    return results


def encode_corpus(corpus, beta, hp: Hyperparams, inits=None, threads=1) -> list[DocEncoding]:
    """Encode every document against a fixed dictionary (unsupervised coder)."""
    corpus = as_corpus(corpus)

    def job(i, doc):
        init = inits[i] if inits is not None else None
        return encode_document(doc, beta, hp, init=init, doc_index=i)

    return _map_documents(job, corpus, threads)


def _encode_corpus_supervised(corpus, beta, hp, eta, labels, inits, threads):
    def job(i, doc):
        init = inits[i] if inits is not None else None
        return encode_document_supervised(
            doc, beta, hp, eta, int(labels[i]), len(corpus), init=init, doc_index=i
        )

    return _map_documents(job, corpus, threads)


def _initial_encodings(corpus, beta, hp, code_init):
    encodings = []
    for doc in corpus:
        theta = np.full(beta.shape[0], code_init)
        codes = np.full((len(doc), beta.shape[0]), code_init)
        obj = document_objective(doc, beta, theta, codes, hp)
        encodings.append(DocEncoding(theta=theta, word_codes=codes, objective=obj))
    return encodings


def _log_step(iteration, step, objective):
    logger.info("iter=%d step=%s objective=%.17g", iteration, step, objective)


def train_stc(corpus, num_topics: int, hp: Hyperparams | None = None, seed: int = 0, threads=1):
    """Learn an unsupervised model; returns (StcModel, final encodings).

    Stops after `hp.outer_iters` rounds or when the objective's relative
    improvement over one round drops below `hp.tol_obj`. With outer_iters = 0
    the initialized model and untouched initial encodings are returned.
    """
    corpus = as_corpus(corpus)
    if len(corpus) == 0:
        raise ValueError("cannot train on an empty corpus")
    hp = hp or Hyperparams()
    beta, code_init = init_model(num_topics, corpus.num_words, seed)
    trace: list[float] = []
    if hp.outer_iters == 0:
        return StcModel(beta=beta, hp=hp, objective_trace=trace, seed=seed), _initial_encodings(
            corpus, beta, hp, code_init
        )
    encodings = None
    prev = None
    for iteration in range(1, hp.outer_iters + 1):
        encodings = encode_corpus(corpus, beta, hp, inits=encodings, threads=threads)
        objective = stc_objective(beta, encodings, corpus, hp)
        trace.append(objective)
        _log_step(iteration, "encode", objective)

        beta, _ = update_dictionary(
            beta, encodings, corpus, hp.pg_steps, hp.pg_step0, hp.mean_floor
        )
        objective = stc_objective(beta, encodings, corpus, hp)
        trace.append(objective)
        _log_step(iteration, "dict", objective)

        if prev is not None and prev - objective < hp.tol_obj * max(1.0, abs(prev)):
            break
        prev = objective
    return StcModel(beta=beta, hp=hp, objective_trace=trace, seed=seed), encodings


def train_medstc(labeled: LabeledCorpus, num_topics: int, hp: Hyperparams | None = None,
                 seed: int = 0, threads=1):
    """Learn a supervised model; returns (MedStcModel, final encodings).

    Each round encodes with the classifier coupled in, updates the dictionary,
    then refits the classifier on the round's document codes, keeping the
    previous weights when they score better (so the trace stays monotone even
    at the solver's tolerance). With svm_c = 0 the supervised terms vanish and
    the run reduces exactly to `train_stc`.
    """
    if not isinstance(labeled, LabeledCorpus):
        raise TypeError("train_medstc expects a LabeledCorpus")
    corpus = labeled.corpus
    if len(corpus) == 0:
        raise ValueError("cannot train on an empty corpus")
    if labeled.num_classes < 2:
        raise ValueError("supervised training needs at least two classes")
    hp = hp or Hyperparams()
    num_classes = labeled.num_classes

    if hp.svm_c == 0:
        base, encodings = train_stc(corpus, num_topics, hp, seed=seed, threads=threads)
        model = MedStcModel(
            beta=base.beta,
            hp=hp,
            objective_trace=base.objective_trace,
            seed=seed,
            eta=np.zeros((num_classes, num_topics)),
            num_classes=num_classes,
        )
        return model, encodings

    labels = labeled.labels
    beta, code_init = init_model(num_topics, corpus.num_words, seed)
    eta = np.zeros((num_classes, num_topics))
    trace: list[float] = []
    if hp.outer_iters == 0:
        model = MedStcModel(beta=beta, hp=hp, objective_trace=trace, seed=seed,
                            eta=eta, num_classes=num_classes)
        return model, _initial_encodings(corpus, beta, hp, code_init)
    encodings = None
    prev = None
    for iteration in range(1, hp.outer_iters + 1):
        encodings = _encode_corpus_supervised(corpus, beta, hp, eta, labels, encodings, threads)
        objective = medstc_objective(beta, encodings, corpus, labels, eta, hp)
        trace.append(objective)
        _log_step(iteration, "encode", objective)

        beta, _ = update_dictionary(
            beta, encodings, corpus, hp.pg_steps, hp.pg_step0, hp.mean_floor
        )
        objective = medstc_objective(beta, encodings, corpus, labels, eta, hp)
        trace.append(objective)
        _log_step(iteration, "dict", objective)

        thetas = np.stack([enc.theta for enc in encodings])
        candidate = train_svm(
            thetas, labels, hp.svm_c, hp.cost_ell,
            max_epochs=hp.svm_max_epochs, tol=hp.svm_tol, num_classes=num_classes,
        )
        if svm_objective(candidate, thetas, labels, hp.svm_c, hp.cost_ell) <= svm_objective(
            eta, thetas, labels, hp.svm_c, hp.cost_ell
        ):
            eta = candidate
        objective = medstc_objective(beta, encodings, corpus, labels, eta, hp)
        trace.append(objective)
        _log_step(iteration, "svm", objective)

        if prev is not None and prev - objective < hp.tol_obj * max(1.0, abs(prev)):
            break
        prev = objective
    model = MedStcModel(beta=beta, hp=hp, objective_trace=trace, seed=seed,
                        eta=eta, num_classes=num_classes)
    return model, encodings

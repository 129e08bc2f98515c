"""Estimator wrappers with the usual fit/transform/predict surface.

These adapt the functional training API to the scikit-learn conventions:
constructor stores hyperparameters untouched, ``fit`` learns state stored in
trailing-underscore attributes, and inputs may be count matrices (dense or
scipy sparse) as well as the package's own corpus types.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .coder import Hyperparams
from .corpus import LabeledCorpus, as_corpus
from .svm import predict_many
from .trainer import encode_corpus, train_medstc, train_stc


def _resolve_threads(n_jobs):
    if n_jobs is None or n_jobs == -1:
        return None  # all cores
    if not isinstance(n_jobs, (int, np.integer)) or n_jobs < 1:
        raise ValueError(f"n_jobs must be a positive int or -1, got {n_jobs!r}")
    return int(n_jobs)


class SparseTopicalCoder(TransformerMixin, BaseEstimator):
    """Learns a topical dictionary and produces sparse document codes.

    ``fit`` alternates sparse coding of every document with projected
    gradient refits of the dictionary. ``transform`` returns each document's
    non-negative code vector (one row per document, one column per topic).
    """

    def __init__(
        self,
        n_topics: int = 10,
        lam: float = 0.1,
        gamma: float | None = None,
        rho: float | None = None,
        theta_reg: str = "l1",
        s_reg: str = "l1",
        inner_sweeps: int = 25,
        outer_iters: int = 50,
        tol: float = 1e-4,
        inner_tol: float = 1e-5,
        mean_floor: float = 1e-12,
        pg_steps: int = 10,
        pg_step0: float = 1.0,
        random_state: int = 0,
        n_jobs: int | None = 1,
    ):
        self.n_topics = n_topics
        self.lam = lam
        self.gamma = gamma
        self.rho = rho
        self.theta_reg = theta_reg
        self.s_reg = s_reg
        self.inner_sweeps = inner_sweeps
        self.outer_iters = outer_iters
        self.tol = tol
        self.inner_tol = inner_tol
        self.mean_floor = mean_floor
        self.pg_steps = pg_steps
        self.pg_step0 = pg_step0
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _hyperparams(self, svm_c: float = 0.0, cost_ell: float = 3600.0,
                     svm_max_epochs: int = 200, svm_tol: float = 1e-6) -> Hyperparams:
        return Hyperparams(
            lam=self.lam,
            gamma=self.gamma,
            rho=self.rho,
            theta_reg=self.theta_reg,
            s_reg=self.s_reg,
            svm_c=svm_c,
            cost_ell=cost_ell,
            inner_sweeps=self.inner_sweeps,
            outer_iters=self.outer_iters,
            tol_obj=self.tol,
            inner_tol=self.inner_tol,
            mean_floor=self.mean_floor,
            pg_steps=self.pg_steps,
            pg_step0=self.pg_step0,
            svm_max_epochs=svm_max_epochs,
            svm_tol=svm_tol,
        )

    def fit(self, X, y=None):
        corpus = as_corpus(X)
        model, encodings = train_stc(
            corpus, self.n_topics, self._hyperparams(),
            seed=self.random_state, threads=_resolve_threads(self.n_jobs),
        )
        self.model_ = model
        self.components_ = model.beta
        self.objective_trace_ = list(model.objective_trace)
        self.n_features_in_ = model.num_words
        self.doc_codes_ = np.stack([enc.theta for enc in encodings])
        return self

    def transform(self, X):
        check_is_fitted(self, "model_")
        corpus = as_corpus(X)
        if corpus.num_words != self.n_features_in_:
            raise ValueError(
                f"X has {corpus.num_words} features but the model was fit with "
                f"{self.n_features_in_}"
            )
        encodings = encode_corpus(corpus, self.model_.beta, self.model_.hp)
        return np.stack([enc.theta for enc in encodings])


class MaxMarginSparseTopicalCoder(SparseTopicalCoder):
    """Supervised variant: the code of each document is also pushed to be
    separable by a multi-class linear classifier trained alongside the
    dictionary. ``predict`` scores codes with that classifier.
    """

    def __init__(
        self,
        n_topics: int = 10,
        lam: float = 0.1,
        gamma: float | None = None,
        rho: float | None = None,
        theta_reg: str = "l1",
        s_reg: str = "l1",
        svm_c: float = 1.0,
        cost_ell: float = 3600.0,
        svm_max_epochs: int = 200,
        svm_tol: float = 1e-6,
        inner_sweeps: int = 25,
        outer_iters: int = 50,
        tol: float = 1e-4,
        inner_tol: float = 1e-5,
        mean_floor: float = 1e-12,
        pg_steps: int = 10,
        pg_step0: float = 1.0,
        random_state: int = 0,
        n_jobs: int | None = 1,
    ):
        super().__init__(
            n_topics=n_topics, lam=lam, gamma=gamma, rho=rho,
            theta_reg=theta_reg, s_reg=s_reg, inner_sweeps=inner_sweeps,
            outer_iters=outer_iters, tol=tol, inner_tol=inner_tol,
            mean_floor=mean_floor, pg_steps=pg_steps, pg_step0=pg_step0,
            random_state=random_state, n_jobs=n_jobs,
        )
        self.svm_c = svm_c
        self.cost_ell = cost_ell
        self.svm_max_epochs = svm_max_epochs
        self.svm_tol = svm_tol

    def fit(self, X, y):
        if y is None:
            raise ValueError("supervised fitting requires labels")
        corpus = as_corpus(X)
        y = np.asarray(y)
        if y.ndim != 1 or len(y) != len(corpus):
            raise ValueError(
                f"y must be 1-d with one label per document, got shape {y.shape} "
                f"for {len(corpus)} documents"
            )
        self.classes_ = np.unique(y)
        if len(self.classes_) < 2:
            raise ValueError("supervised fitting needs at least two distinct classes")
        indices = np.searchsorted(self.classes_, y)
        labeled = LabeledCorpus(corpus, indices.astype(np.int64), len(self.classes_))
        hp = self._hyperparams(
            svm_c=self.svm_c, cost_ell=self.cost_ell,
            svm_max_epochs=self.svm_max_epochs, svm_tol=self.svm_tol,
        )
        model, encodings = train_medstc(
            labeled, self.n_topics, hp,
            seed=self.random_state, threads=_resolve_threads(self.n_jobs),
        )
        self.model_ = model
        self.components_ = model.beta
        self.coef_ = model.eta
        self.objective_trace_ = list(model.objective_trace)
        self.n_features_in_ = model.num_words
        self.doc_codes_ = np.stack([enc.theta for enc in encodings])
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        thetas = self.transform(X)
        return self.classes_[predict_many(self.coef_, thetas)]

    def score(self, X, y):
        y = np.asarray(y)
        return float(np.mean(self.predict(X) == y))

"""Sparse topical coding for bag-of-words corpora.

Documents are represented by non-negative sparse codes over a learned
row-stochastic dictionary of topics. Counts are modeled through a Poisson
reconstruction loss at the word level; training alternates sparse coding of
all documents with projected gradient refits of the dictionary. A supervised
variant couples the codes to a multi-class max-margin classifier so the
learned representation also separates labeled classes.

Typical use goes through :class:`SparseTopicalCoder` /
:class:`MaxMarginSparseTopicalCoder` (fit/transform/predict), the functional
API in :mod:`stc.trainer`, or the ``stc`` command line tool.
"""

from .coder import (
    BETA_ZERO_TOL,
    DocEncoding,
    Hyperparams,
    NumericsError,
    document_objective,
    encode_document,
    encode_document_supervised,
    update_document_code,
    update_word_code,
    update_word_code_element,
)
from .corpus import (
    Corpus,
    Document,
    LabeledCorpus,
    ParseError,
    Vocabulary,
    as_corpus,
    corpus_to_matrix,
    load_corpus,
    load_labels,
    load_vocabulary,
    save_corpus,
)
from .dictionary import (
    reconstruction_gradient,
    total_reconstruction_loss,
    update_dictionary,
)
from .estimators import MaxMarginSparseTopicalCoder, SparseTopicalCoder
from .metrics import (
    SparsityReport,
    accuracy,
    average_document_code,
    average_word_code,
    sparsity_ratio,
    sparsity_report,
    top_words,
)
from .model_io import FORMAT_VERSION, load_model, save_model
from .numerics import (
    is_on_simplex,
    poisson_loss,
    project_rows_to_simplex,
    project_to_simplex,
    unnorm_kl,
)
from .svm import (
    discriminant,
    hinge_risk,
    loss_augmented_predict,
    margin_violation,
    predict,
    predict_many,
    svm_objective,
    train_svm,
)
from .trainer import (
    MedStcModel,
    StcModel,
    encode_corpus,
    init_model,
    medstc_objective,
    stc_objective,
    train_medstc,
    train_stc,
)

__version__ = "0.1.0"

__all__ = [
    "BETA_ZERO_TOL",
    "Corpus",
    "DocEncoding",
    "Document",
    "FORMAT_VERSION",
    "Hyperparams",
    "LabeledCorpus",
    "MaxMarginSparseTopicalCoder",
    "MedStcModel",
    "NumericsError",
    "ParseError",
    "SparseTopicalCoder",
    "SparsityReport",
    "StcModel",
    "Vocabulary",
    "accuracy",
    "as_corpus",
    "average_document_code",
    "average_word_code",
    "corpus_to_matrix",
    "discriminant",
    "document_objective",
    "encode_corpus",
    "encode_document",
    "encode_document_supervised",
    "hinge_risk",
    "init_model",
    "is_on_simplex",
    "load_corpus",
    "load_labels",
    "load_model",
    "load_vocabulary",
    "loss_augmented_predict",
    "margin_violation",
    "medstc_objective",
    "poisson_loss",
    "predict",
    "predict_many",
    "project_rows_to_simplex",
    "project_to_simplex",
    "reconstruction_gradient",
    "save_corpus",
    "save_model",
    "sparsity_ratio",
    "sparsity_report",
    "stc_objective",
    "svm_objective",
    "top_words",
    "total_reconstruction_loss",
    "train_medstc",
    "train_stc",
    "train_svm",
    "unnorm_kl",
    "update_dictionary",
    "update_document_code",
    "update_word_code",
    "update_word_code_element",
]

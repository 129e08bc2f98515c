"""Bag-of-words corpus ingestion and validation.

File formats follow the UCI bag-of-words layout: a docword file whose first
three lines give the document count D, vocabulary size W, and the number of
`docID wordID count` triples that follow; a vocabulary file with one term per
line (line number = 1-based word id); and a label file with one 0-based class
index per document line. Ids are 1-based on disk and 0-based everywhere in
memory; the conversion happens here and nowhere else.
"""

from __future__ import annotations

import contextlib
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "ParseError",
    "Document",
    "Corpus",
    "LabeledCorpus",
    "Vocabulary",
    "load_corpus",
    "save_corpus",
    "load_vocabulary",
    "load_labels",
    "as_corpus",
    "corpus_to_matrix",
]


class ParseError(ValueError):
    """Malformed corpus, vocabulary, or label file."""


@contextlib.contextmanager
def _open_text(source, mode="r"):
    if isinstance(source, (str, Path)):
        with open(source, mode, encoding="utf-8") as handle:
            yield handle
    else:
        yield source


@dataclass(frozen=True)
class Document:
    """One document as the sparse set of its distinct words and their counts.

    `word_indices` is strictly increasing and 0-based; `counts` is aligned
    with it and every entry is at least one. Documents are never empty.
    """

    word_indices: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.word_indices, dtype=np.int64)
        cnt = np.asarray(self.counts, dtype=np.int64)
        if idx.ndim != 1 or cnt.ndim != 1 or idx.shape != cnt.shape:
            raise ValueError("word_indices and counts must be aligned 1-d sequences")
        if idx.size == 0:
            raise ValueError("document has no entries")
        if idx[0] < 0:
            raise ValueError("word indices must be non-negative")
        if idx.size > 1 and np.any(idx[:-1] >= idx[1:]):
            raise ValueError("word indices must be strictly increasing")
        if np.any(cnt < 1):
            raise ValueError("every count must be at least 1")
        idx.setflags(write=False)
        cnt.setflags(write=False)
        object.__setattr__(self, "word_indices", idx)
        object.__setattr__(self, "counts", cnt)

    def __len__(self) -> int:
        return int(self.word_indices.size)

    @property
    def total_count(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class Corpus:
    """An ordered, immutable collection of documents over `num_words` word ids."""

    documents: tuple[Document, ...]
    num_words: int

    def __post_init__(self):
        docs = tuple(self.documents)
        if self.num_words < 0:
            raise ValueError("num_words must be non-negative")
        for i, doc in enumerate(docs):
            if not isinstance(doc, Document):
                raise TypeError(f"document {i} is not a Document")
            if doc.word_indices[-1] >= self.num_words:
                raise ValueError(
                    f"document {i} uses word id {int(doc.word_indices[-1])}, "
                    f"but the corpus has only {self.num_words} words"
                )
        object.__setattr__(self, "documents", docs)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __getitem__(self, i) -> Document:
        return self.documents[i]

    @property
    def total_tokens(self) -> int:
        return sum(doc.total_count for doc in self.documents)


@dataclass(frozen=True)
class LabeledCorpus:
    """A corpus paired with one 0-based class label per document."""

    corpus: Corpus
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.size != len(self.corpus):
            raise ValueError("need exactly one label per document")
        if self.num_classes < 1:
            raise ValueError("num_classes must be positive")
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise ValueError("labels must lie in [0, num_classes)")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.corpus)


@dataclass(frozen=True)
class Vocabulary:
    """Terms indexed by 0-based word id."""

    terms: tuple[str, ...]
    _index: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        terms = tuple(self.terms)
        index = {t: i for i, t in enumerate(terms)}
        if len(index) != len(terms):
            raise ValueError("vocabulary terms must be unique")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.terms)

    def __getitem__(self, word_id: int) -> str:
        return self.terms[word_id]

    def index(self, term: str) -> int:
        return self._index[term]

    def __contains__(self, term: str) -> bool:
        return term in self._index


def _parse_int(token: str, line_no: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"line {line_no}: expected an integer {what}, got {token!r}") from None


def load_corpus(source) -> Corpus:
    """Parse a docword file into a Corpus.

    Raises ParseError with a 1-based line number for malformed headers or
    triples, ids out of range, non-positive counts, duplicate (doc, word)
    pairs, a triple count that disagrees with the declared total, and for
    declared documents that end up with no entries.
    """
    with _open_text(source) as handle:
        lines = handle.read().split("\n")

    header: list[int] = []
    pos = 0
    for name in ("document count", "vocabulary size", "triple count"):
        if pos >= len(lines) or lines[pos].strip() == "":
            raise ParseError(f"line {pos + 1}: missing {name} in header")
        tokens = lines[pos].split()
        if len(tokens) != 1:
            raise ParseError(f"line {pos + 1}: expected a single integer {name}")
        header.append(_parse_int(tokens[0], pos + 1, name))
        pos += 1
    num_docs, num_words, num_triples = header
    if num_docs < 0 or num_words < 0 or num_triples < 0:
        raise ParseError("header values must be non-negative")

    per_doc: list[dict[int, int]] = [dict() for _ in range(num_docs)]
    seen = 0
    for line_no in range(pos + 1, len(lines) + 1):
        raw = lines[line_no - 1]
        if raw.strip() == "":
            if seen < num_triples:
                # a blank line in the middle of the triple block is malformed;
                # trailing blank lines are fine
                if any(l.strip() for l in lines[line_no:]):
                    raise ParseError(f"line {line_no}: blank line inside triple block")
            continue
        if seen >= num_triples:
            raise ParseError(f"line {line_no}: more triples than the declared {num_triples}")
        tokens = raw.split()
        if len(tokens) != 3:
            raise ParseError(f"line {line_no}: expected 'docID wordID count', got {raw!r}")
        doc_id = _parse_int(tokens[0], line_no, "docID")
        word_id = _parse_int(tokens[1], line_no, "wordID")
        count = _parse_int(tokens[2], line_no, "count")
        if not 1 <= doc_id <= num_docs:
            raise ParseError(f"line {line_no}: docID {doc_id} out of range 1..{num_docs}")
        if not 1 <= word_id <= num_words:
            raise ParseError(f"line {line_no}: wordID {word_id} out of range 1..{num_words}")
        if count <= 0:
            raise ParseError(f"line {line_no}: count must be positive, got {count}")
        entries = per_doc[doc_id - 1]
        if word_id - 1 in entries:
            raise ParseError(f"line {line_no}: duplicate wordID {word_id} for document {doc_id}")
        entries[word_id - 1] = count
        seen += 1
    if seen != num_triples:
        raise ParseError(f"expected {num_triples} triples, found {seen}")

    documents = []
    for i, entries in enumerate(per_doc):
        if not entries:
            raise ParseError(f"document {i + 1} is empty")
        idx = np.array(sorted(entries), dtype=np.int64)
        cnt = np.array([entries[j] for j in idx], dtype=np.int64)
        documents.append(Document(idx, cnt))
    return Corpus(tuple(documents), num_words)


def save_corpus(corpus: Corpus, dest) -> None:
    """Write a Corpus back out in docword layout (1-based ids, doc-major order)."""
    triples = sum(len(doc) for doc in corpus)
    with _open_text(dest, "w") as handle:
        handle.write(f"{len(corpus)}\n{corpus.num_words}\n{triples}\n")
        for d, doc in enumerate(corpus, start=1):
            for w, c in zip(doc.word_indices, doc.counts):
                handle.write(f"{d} {int(w) + 1} {int(c)}\n")


def load_vocabulary(source) -> Vocabulary:
    """Parse a one-term-per-line vocabulary file.

    Line numbers are 1-based word ids; trailing blank lines are ignored but a
    blank line between terms is malformed. Duplicate terms are rejected.
    """
    with _open_text(source) as handle:
        lines = handle.read().split("\n")
    terms: list[str] = []
    first_seen: dict[str, int] = {}
    pending_blank: int | None = None
    for line_no, raw in enumerate(lines, start=1):
        term = raw.strip()
        if not term:
            if pending_blank is None:
                pending_blank = line_no
            continue
        if pending_blank is not None:
            raise ParseError(f"line {pending_blank}: empty term")
        if term in first_seen:
            raise ParseError(
                f"line {line_no}: duplicate term {term!r} (first at line {first_seen[term]})"
            )
        first_seen[term] = line_no
        terms.append(term)
    return Vocabulary(tuple(terms))


def load_labels(source, num_docs: int) -> tuple[np.ndarray, int]:
    """Parse one 0-based integer label per line; returns (labels, num_classes).

    num_classes is 1 + max(labels). Warns when some class below the maximum
    never occurs, and rejects negative labels or a count that differs from
    `num_docs`.
    """
    with _open_text(source) as handle:
        lines = handle.read().split("\n")
    labels: list[int] = []
    pending_blank: int | None = None
    for line_no, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            if pending_blank is None:
                pending_blank = line_no
            continue
        if pending_blank is not None:
            raise ParseError(f"line {pending_blank}: blank line between labels")
        value = _parse_int(text, line_no, "label")
        if value < 0:
            raise ParseError(f"line {line_no}: negative label {value}")
        labels.append(value)
    if len(labels) != num_docs:
        raise ParseError(f"expected {num_docs} labels, found {len(labels)}")
    arr = np.array(labels, dtype=np.int64)
    num_classes = int(arr.max()) + 1 if arr.size else 0
    if arr.size:
        missing = sorted(set(range(num_classes)) - set(arr.tolist()))
        if missing:
            warnings.warn(
                f"labels never use classes {missing}; they are kept as empty classes",
                stacklevel=2,
            )
    return arr, num_classes


def as_corpus(data, num_words: int | None = None) -> Corpus:
    """Coerce corpus-like input to a Corpus.

    Accepts a Corpus (returned as is), a sequence of Documents, or a 2-d count
    matrix (dense array or scipy sparse) with documents as rows. Matrix counts
    must be non-negative integers and every document needs at least one word.
    """
    if isinstance(data, Corpus):
        if num_words is not None and data.num_words != num_words:
            raise ValueError(
                f"corpus has {data.num_words} words, expected {num_words}"
            )
        return data
    if isinstance(data, LabeledCorpus):
        return as_corpus(data.corpus, num_words)

    import scipy.sparse as sp

    if sp.issparse(data) or (hasattr(data, "ndim") and getattr(data, "ndim", 0) == 2):
        mat = sp.csr_matrix(data)
        if num_words is not None and mat.shape[1] != num_words:
            raise ValueError(f"matrix has {mat.shape[1]} columns, expected {num_words}")
        dense_counts = mat.data
        if dense_counts.size and (
            np.any(dense_counts < 0) or np.any(dense_counts != np.round(dense_counts))
        ):
            raise ValueError("counts must be non-negative integers")
        docs = []
        for i in range(mat.shape[0]):
            row = mat.getrow(i).tocoo()
            keep = row.data > 0
            idx = row.col[keep]
            cnt = row.data[keep]
            if idx.size == 0:
                raise ValueError(f"document {i} has no words")
            order = np.argsort(idx)
            docs.append(Document(idx[order].astype(np.int64), np.round(cnt[order]).astype(np.int64)))
        return Corpus(tuple(docs), mat.shape[1])

    docs = list(data)
    if not all(isinstance(d, Document) for d in docs):
        raise TypeError("expected a Corpus, a sequence of Documents, or a 2-d count matrix")
    if num_words is None:
        num_words = 1 + max(int(d.word_indices[-1]) for d in docs) if docs else 0
    return Corpus(tuple(docs), num_words)


def corpus_to_matrix(corpus: Corpus):
    """Return the corpus as a scipy CSR count matrix with documents as rows."""
    import scipy.sparse as sp

    rows, cols, vals = [], [], []
    for i, doc in enumerate(corpus):
        rows.extend([i] * len(doc))
        cols.extend(doc.word_indices.tolist())
        vals.extend(doc.counts.tolist())
    return sp.csr_matrix(
        (vals, (rows, cols)), shape=(len(corpus), corpus.num_words), dtype=np.int64
    )

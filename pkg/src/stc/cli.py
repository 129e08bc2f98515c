"""Command line entry points.

Subcommands: train, train-sup, encode, predict, eval, topics. Training
progress goes to stderr; TSV results go to --out files or stdout. Document
and word ids in TSV output are 1-based to match the docword convention;
topic and class indices are 0-based.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .coder import Hyperparams, NumericsError
from .corpus import LabeledCorpus, ParseError, load_corpus, load_labels, load_vocabulary
from .metrics import format_sparsity_tsv, format_top_words_tsv, sparsity_report
from .model_io import load_model, save_model
from .svm import predict_many, train_svm
from .trainer import MedStcModel, encode_corpus, train_medstc, train_stc


def _add_train_flags(parser, supervised: bool):
    parser.add_argument("--docword", required=True, help="docword counts file")
    parser.add_argument("--vocab", required=True, help="vocabulary file, one term per line")
    if supervised:
        parser.add_argument("--labels", required=True, help="labels file, one 0-based class per line")
    parser.add_argument("--k", type=int, required=True, help="number of topics")
    parser.add_argument("--lambda", dest="lam", type=float, default=0.1,
                        help="document-code penalty weight (default 0.1)")
    parser.add_argument("--gamma", type=float, default=None,
                        help="code/document coupling weight (default: same as --lambda)")
    parser.add_argument("--rho", type=float, default=None,
                        help="word-code penalty weight (default: same as --lambda)")
    parser.add_argument("--theta-reg", choices=["l1", "l2"], default="l1")
    parser.add_argument("--s-reg", choices=["l1", "l2"], default="l1")
    if supervised:
        parser.add_argument("--svm-c", type=float, default=1.0, help="classifier weight C")
        parser.add_argument("--cost-ell", type=float, default=3600.0,
                            help="cost charged for a wrong label inside the hinge")
    parser.add_argument("--outer", type=int, default=50, help="max training rounds")
    parser.add_argument("--inner", type=int, default=25, help="max sweeps per document encode")
    parser.add_argument("--tol", type=float, default=1e-4,
                        help="relative objective tolerance of the outer loop")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=None,
                        help="parallel document encodes (default: all cores)")
    parser.add_argument("--out", required=True, help="where to write the model")


def _hyperparams(args, supervised: bool) -> Hyperparams:
    return Hyperparams(
        lam=args.lam,
        gamma=args.gamma,
        rho=args.rho,
        theta_reg=args.theta_reg,
        s_reg=args.s_reg,
        svm_c=args.svm_c if supervised else 0.0,
        cost_ell=args.cost_ell if supervised else 3600.0,
        inner_sweeps=args.inner,
        outer_iters=args.outer,
        tol_obj=args.tol,
    )


def _load_training_inputs(args):
    corpus = load_corpus(args.docword)
    vocab = load_vocabulary(args.vocab)
    if len(vocab) != corpus.num_words:
        raise ValueError(
            f"vocabulary has {len(vocab)} terms but the docword header declares {corpus.num_words}"
        )
    return corpus, vocab


def _cmd_train(args) -> int:
    corpus, _ = _load_training_inputs(args)
    hp = _hyperparams(args, supervised=False)
    model, _ = train_stc(corpus, args.k, hp, seed=args.seed, threads=args.threads)
    save_model(model, args.out)
    return 0


def _cmd_train_sup(args) -> int:
    corpus, _ = _load_training_inputs(args)
    labels, num_classes = load_labels(args.labels, len(corpus))
    if num_classes < 2:
        raise ValueError("supervised training needs at least two classes")
    labeled = LabeledCorpus(corpus, labels, num_classes)
    hp = _hyperparams(args, supervised=True)
    model, _ = train_medstc(labeled, args.k, hp, seed=args.seed, threads=args.threads)
    save_model(model, args.out)
    return 0


def _sparse_entries(vector) -> str:
    return " ".join(f"{k}:{float(v):.17g}" for k, v in enumerate(vector) if v != 0.0)


def _cmd_encode(args) -> int:
    model = load_model(args.model)
    corpus = load_corpus(args.docword)
    if corpus.num_words != model.num_words:
        raise ValueError(
            f"corpus has {corpus.num_words} words but the model was trained on {model.num_words}"
        )
    encodings = encode_corpus(corpus, model.beta, model.hp)
    lines = ["# doc\tword\tcode"]
    for d, (doc, enc) in enumerate(zip(corpus, encodings), start=1):
        lines.append(f"{d}\ttheta\t{_sparse_entries(enc.theta)}")
        for pos, word in enumerate(doc.word_indices):
            lines.append(f"{d}\t{int(word) + 1}\t{_sparse_entries(enc.word_codes[pos])}")
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
    return 0


def _cmd_predict(args) -> int:
    model = load_model(args.model, expected_kind="medstc")
    corpus = load_corpus(args.docword)
    if corpus.num_words != model.num_words:
        raise ValueError(
            f"corpus has {corpus.num_words} words but the model was trained on {model.num_words}"
        )
    encodings = encode_corpus(corpus, model.beta, model.hp)
    thetas = np.stack([enc.theta for enc in encodings])
    predicted = predict_many(model.eta, thetas)
    lines = ["# doc\tlabel"]
    lines.extend(f"{d}\t{int(label)}" for d, label in enumerate(predicted, start=1))
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
    return 0


def _cmd_eval(args) -> int:
    model = load_model(args.model)
    corpus = load_corpus(args.docword)
    if corpus.num_words != model.num_words:
        raise ValueError(
            f"corpus has {corpus.num_words} words but the model was trained on {model.num_words}"
        )
    labels, _ = load_labels(args.labels, len(corpus))
    encodings = encode_corpus(corpus, model.beta, model.hp)
    thetas = np.stack([enc.theta for enc in encodings])
    if isinstance(model, MedStcModel):
        predicted = predict_many(model.eta, thetas)
        kind = "classifier"
    else:
        # no stored classifier: fit one on these codes and report how well it
        # separates them (a training accuracy, labeled as such)
        svm_c = model.hp.svm_c if model.hp.svm_c > 0 else 1.0
        eta = train_svm(thetas, labels, svm_c, model.hp.cost_ell,
                        max_epochs=model.hp.svm_max_epochs, tol=model.hp.svm_tol)
        predicted = predict_many(eta, thetas)
        kind = "posthoc_svm_train"
    correct = float(np.mean(predicted == labels))
    report = sparsity_report(encodings)
    out = ["# metric\tvalue"]
    out.append(f"accuracy\t{correct:.17g}")
    out.append(f"accuracy_kind\t{kind}")
    out.append(f"per_word_sparsity\t{report.per_word_ratio:.17g}")
    out.append(f"per_doc_sparsity\t{report.per_doc_ratio:.17g}")
    out.append(f"zero_tolerance\t{report.zero_tolerance:.17g}")
    out.append(f"num_docs\t{len(corpus)}")
    sys.stdout.write("\n".join(out) + "\n")
    return 0


def _cmd_topics(args) -> int:
    model = load_model(args.model)
    vocab = load_vocabulary(args.vocab)
    if len(vocab) != model.num_words:
        raise ValueError(
            f"vocabulary has {len(vocab)} terms but the model was trained on {model.num_words}"
        )
    sys.stdout.write(format_top_words_tsv(model.beta, vocab, args.top))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stc",
        description="Sparse topical coding over bag-of-words corpora",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="learn an unsupervised model")
    _add_train_flags(p, supervised=False)
    p.set_defaults(run=_cmd_train)

    p = sub.add_parser("train-sup", help="learn a max-margin supervised model")
    _add_train_flags(p, supervised=True)
    p.set_defaults(run=_cmd_train_sup)

    p = sub.add_parser("encode", help="write sparse codes for a corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--docword", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(run=_cmd_encode)

    p = sub.add_parser("predict", help="predict labels with a supervised model")
    p.add_argument("--model", required=True)
    p.add_argument("--docword", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(run=_cmd_predict)

    p = sub.add_parser("eval", help="report accuracy and code sparsity")
    p.add_argument("--model", required=True)
    p.add_argument("--docword", required=True)
    p.add_argument("--labels", required=True)
    p.set_defaults(run=_cmd_eval)

    p = sub.add_parser("topics", help="print each topic's heaviest terms")
    p.add_argument("--model", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--top", type=int, default=10, help="terms per topic")
    p.set_defaults(run=_cmd_topics)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(message)s")
    try:
        return args.run(args)
    except (ParseError, NumericsError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Model persistence: a line-oriented text format that round-trips exactly.

Line 1 is a JSON header ({format_version, kind, K, N, L, seed, hyperparams});
then K dictionary rows of N numbers; supervised models append L classifier
rows of K numbers. Numbers are written with 17 significant digits, which
round-trips IEEE doubles exactly, and the header uses sorted keys, so
save -> load -> save reproduces the file byte for byte.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .coder import Hyperparams
from .trainer import MedStcModel, StcModel
from .numerics import project_to_simplex

__all__ = ["save_model", "load_model", "FORMAT_VERSION"]

FORMAT_VERSION = 1

# rows whose sum drifts at most this far from 1 are silently re-projected;
# anything worse is rejected as corrupt
ROW_SUM_FIX_TOL = 1e-6
# re-projection below this drift would only churn bits that are already fine
ROW_SUM_EXACT_TOL = 1e-12


def _format_row(row) -> str:
    return " ".join(f"{float(x):.17g}" for x in row)


def save_model(model: StcModel, path) -> None:
    """Write a model to `path`; the kind is medstc when classifier weights exist."""
    is_supervised = isinstance(model, MedStcModel)
    header = {
        "format_version": FORMAT_VERSION,
        "kind": "medstc" if is_supervised else "stc",
        "K": int(model.beta.shape[0]),
        "N": int(model.beta.shape[1]),
        "L": int(model.num_classes) if is_supervised else None,
        "seed": int(model.seed),
        "hyperparams": dataclasses.asdict(model.hp),
    }
    lines = [json.dumps(header, sort_keys=True)]
    lines.extend(_format_row(row) for row in model.beta)
    if is_supervised:
        lines.extend(_format_row(row) for row in model.eta)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_rows(lines, start, count, width, what):
    rows = np.empty((count, width))
    for r in range(count):
        pos = start + r
        if pos >= len(lines):
            raise ValueError(f"truncated model file: missing {what} row {r}")
        parts = lines[pos].split()
        if len(parts) != width:
            raise ValueError(
                f"{what} row {r} has {len(parts)} entries, expected {width}"
            )
        try:
            rows[r] = [float(p) for p in parts]
        except ValueError:
            raise ValueError(f"{what} row {r} contains a non-numeric entry") from None
    if not np.all(np.isfinite(rows)):
        raise ValueError(f"{what} rows contain non-finite entries")
    return rows


def load_model(path, expected_kind: str | None = None):
    """Read a model; `expected_kind` ('stc' or 'medstc') rejects the other kind.

    Dictionary rows must sit on the simplex: a row whose sum drifts by at most
    1e-6 is re-projected, anything beyond that is rejected with its row index.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if not lines or not lines[0].strip():
        raise ValueError("empty model file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as err:
        raise ValueError(f"malformed model header: {err}") from None
    if not isinstance(header, dict):
        raise ValueError("malformed model header: expected an object")
    for key in ("format_version", "kind", "K", "N", "seed", "hyperparams"):
        if key not in header:
            raise ValueError(f"model header is missing {key!r}")
    if header["format_version"] != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {header['format_version']!r}")
    kind = header["kind"]
    if kind not in ("stc", "medstc"):
        raise ValueError(f"unknown model kind {kind!r}")
    if expected_kind is not None and kind != expected_kind:
        raise ValueError(f"model kind is {kind!r}, expected {expected_kind!r}")
    num_topics, num_words = int(header["K"]), int(header["N"])
    if num_topics < 1 or num_words < 1:
        raise ValueError("model header declares an empty dictionary")
    hp = Hyperparams(**header["hyperparams"])
    seed = int(header["seed"])

    beta = _parse_rows(lines, 1, num_topics, num_words, "dictionary")
    for k in range(num_topics):
        drift = abs(float(beta[k].sum()) - 1.0)
        if drift > ROW_SUM_FIX_TOL or float(beta[k].min()) < -ROW_SUM_FIX_TOL:
            raise ValueError(
                f"dictionary row {k} is not on the simplex (sum drift {drift:.3g})"
            )
        if drift > ROW_SUM_EXACT_TOL or float(beta[k].min()) < 0.0:
            beta[k] = project_to_simplex(beta[k])

    consumed = 1 + num_topics
    if kind == "medstc":
        if header.get("L") is None:
            raise ValueError("supervised model header is missing L")
        num_classes = int(header["L"])
        if num_classes < 2:
            raise ValueError("supervised model needs at least two classes")
        eta = _parse_rows(lines, consumed, num_classes, num_topics, "classifier")
        consumed += num_classes
        model = MedStcModel(beta=beta, hp=hp, objective_trace=[], seed=seed,
                            eta=eta, num_classes=num_classes)
    else:
        model = StcModel(beta=beta, hp=hp, objective_trace=[], seed=seed)
    if any(line.strip() for line in lines[consumed:]):
        raise ValueError("unexpected trailing content in model file")
    return model

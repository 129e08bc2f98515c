"""Tests for the line-oriented model file format."""

import json

import numpy as np
import pytest

from stc.coder import Hyperparams
from stc.model_io import FORMAT_VERSION, load_model, save_model
from stc.trainer import MedStcModel, StcModel, train_medstc, train_stc
from synthetic_corpora import planted_corpus, random_corpus


def small_stc_model(seed=0):
    corpus = random_corpus(8, 10, seed=seed)
    hp = Hyperparams(outer_iters=2)
    model, _ = train_stc(corpus, 3, hp=hp, seed=seed)
    return model


def small_medstc_model(seed=0):
    labeled, _ = planted_corpus(num_docs=16, num_topics=3, words_per_topic=5, seed=seed)
    hp = Hyperparams(outer_iters=2, svm_c=1.0)
    model, _ = train_medstc(labeled, 3, hp=hp, seed=seed)
    return model


class TestRoundTrip:
    def test_stc_exact(self, tmp_path):
        model = small_stc_model()
        path = tmp_path / "m.model"
        save_model(model, path)
        loaded = load_model(path)
        assert isinstance(loaded, StcModel)
        assert not isinstance(loaded, MedStcModel)
        assert np.array_equal(loaded.beta, model.beta)
        assert loaded.hp == model.hp
        assert loaded.seed == model.seed

    def test_medstc_exact(self, tmp_path):
        model = small_medstc_model()
        path = tmp_path / "m.model"
        save_model(model, path)
        loaded = load_model(path)
        assert isinstance(loaded, MedStcModel)
        assert np.array_equal(loaded.beta, model.beta)
        assert np.array_equal(loaded.eta, model.eta)
        assert loaded.num_classes == model.num_classes
        assert loaded.hp == model.hp

    def test_save_load_save_is_byte_identical(self, tmp_path):
        for build, name in ((small_stc_model, "a"), (small_medstc_model, "b")):
            model = build()
            first = tmp_path / f"{name}1.model"
            second = tmp_path / f"{name}2.model"
            save_model(model, first)
            save_model(load_model(first), second)
            assert first.read_bytes() == second.read_bytes()

    def test_extreme_values_round_trip(self, tmp_path):
        # denormal-adjacent and near-one entries survive the 17-digit format
        beta = np.array([[1e-300, 1.0 - 1e-16, 0.0, 1e-17]])
        beta = beta / beta.sum()
        model = StcModel(beta=beta, hp=Hyperparams())
        path = tmp_path / "m.model"
        save_model(model, path)
        assert np.array_equal(load_model(path).beta, beta)


class TestExpectedKind:
    def test_accepts_matching_kind(self, tmp_path):
        path = tmp_path / "m.model"
        save_model(small_stc_model(), path)
        assert load_model(path, expected_kind="stc") is not None

    def test_rejects_other_kind(self, tmp_path):
        path = tmp_path / "m.model"
        save_model(small_stc_model(), path)
        with pytest.raises(ValueError, match="expected 'medstc'"):
            load_model(path, expected_kind="medstc")

    def test_rejects_stc_expectation_on_supervised_file(self, tmp_path):
        path = tmp_path / "m.model"
        save_model(small_medstc_model(), path)
        with pytest.raises(ValueError, match="expected 'stc'"):
            load_model(path, expected_kind="stc")


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def valid_file_lines(tmp_path):
    path = tmp_path / "base.model"
    save_model(small_stc_model(), path)
    return path.read_text(encoding="utf-8").rstrip("\n").split("\n")


class TestRowSumValidation:
    def header_and_row(self, row):
        header = json.dumps(
            {
                "format_version": FORMAT_VERSION,
                "kind": "stc",
                "K": 1,
                "N": len(row),
                "L": None,
                "seed": 0,
                "hyperparams": None,
            },
            sort_keys=True,
        )
        # dataclasses.asdict is a dict; None round-trips through Hyperparams(**{}) poorly,
        # so use the real defaults
        header = json.loads(header)
        import dataclasses

        header["hyperparams"] = dataclasses.asdict(Hyperparams())
        return [json.dumps(header, sort_keys=True), " ".join(f"{v:.17g}" for v in row)]

    def test_gross_drift_rejected_with_row_index(self, tmp_path):
        path = tmp_path / "bad.model"
        write_lines(path, self.header_and_row([0.75, 0.75]))
        with pytest.raises(ValueError, match="row 0"):
            load_model(path)

    def test_small_drift_reprojected(self, tmp_path):
        path = tmp_path / "drift.model"
        row = [0.5 + 5e-8, 0.5 + 5e-8]
        write_lines(path, self.header_and_row(row))
        loaded = load_model(path)
        assert loaded.beta[0].sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(loaded.beta >= 0)

    def test_exact_row_left_untouched(self, tmp_path):
        path = tmp_path / "exact.model"
        row = [0.25, 0.75]
        write_lines(path, self.header_and_row(row))
        assert np.array_equal(load_model(path).beta[0], np.array(row))

    def test_negative_entry_beyond_tolerance_rejected(self, tmp_path):
        path = tmp_path / "neg.model"
        write_lines(path, self.header_and_row([1.1, -0.1]))
        with pytest.raises(ValueError, match="row 0"):
            load_model(path)

    def test_tiny_negative_entry_reprojected(self, tmp_path):
        path = tmp_path / "tinyneg.model"
        write_lines(path, self.header_and_row([1.0 + 1e-9, -1e-9]))
        loaded = load_model(path)
        assert np.all(loaded.beta >= 0)
        assert loaded.beta[0].sum() == pytest.approx(1.0, abs=1e-12)


class TestMalformedFiles:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.model"
        path.write_text("", encoding="utf-8")
        with pytest.raises(ValueError, match="empty model file"):
            load_model(path)

    def test_bad_json_header(self, tmp_path):
        path = tmp_path / "bad.model"
        path.write_text("not json\n", encoding="utf-8")
        with pytest.raises(ValueError, match="malformed model header"):
            load_model(path)

    def test_header_not_object(self, tmp_path):
        path = tmp_path / "arr.model"
        path.write_text("[1, 2]\n", encoding="utf-8")
        with pytest.raises(ValueError, match="expected an object"):
            load_model(path)

    def test_missing_key(self, tmp_path):
        lines = valid_file_lines(tmp_path)
        header = json.loads(lines[0])
        del header["K"]
        lines[0] = json.dumps(header, sort_keys=True)
        path = tmp_path / "nokey.model"
        write_lines(path, lines)
        with pytest.raises(ValueError, match="missing 'K'"):
            load_model(path)

    def test_version_mismatch(self, tmp_path):
        lines = valid_file_lines(tmp_path)
        header = json.loads(lines[0])
        header["format_version"] = 99
        lines[0] = json.dumps(header, sort_keys=True)
        path = tmp_path / "ver.model"
        write_lines(path, lines)
        with pytest.raises(ValueError, match="version"):
            load_model(path)

    def test_unknown_kind(self, tmp_path):
        lines = valid_file_lines(tmp_path)
        header = json.loads(lines[0])
        header["kind"] = "lda"
        lines[0] = json.dumps(header, sort_keys=True)
        path = tmp_path / "kind.model"
        write_lines(path, lines)
        with pytest.raises(ValueError, match="unknown model kind"):
            load_model(path)

    def test_truncated_dictionary(self, tmp_path):
        lines = valid_file_lines(tmp_path)
        path = tmp_path / "trunc.model"
        path.write_text("\n".join(lines[:-1]), encoding="utf-8")
        with pytest.raises(ValueError, match="truncated"):
            load_model(path)

    def test_blank_line_in_place_of_row(self, tmp_path):
        lines = valid_file_lines(tmp_path)
        lines[-1] = ""
        path = tmp_path / "blankrow.model"
        write_lines(path, lines)
        with pytest.raises(ValueError, match="entries, expected"):
            load_model(path)

    def test_wrong_row_width(self, tmp_path):
        lines = valid_file_lines(tmp_path)
        lines[1] = lines[1] + " 0.5"
        path = tmp_path / "wide.model"
        write_lines(path, lines)
        with pytest.raises(ValueError, match="entries, expected"):
            load_model(path)

    def test_non_numeric_entry(self, tmp_path):
        lines = valid_file_lines(tmp_path)
        parts = lines[1].split()
        parts[0] = "spam"
        lines[1] = " ".join(parts)
        path = tmp_path / "nan.model"
        write_lines(path, lines)
        with pytest.raises(ValueError, match="non-numeric"):
            load_model(path)

    def test_non_finite_entry(self, tmp_path):
        lines = valid_file_lines(tmp_path)
        parts = lines[1].split()
        parts[0] = "inf"
        lines[1] = " ".join(parts)
        path = tmp_path / "inf.model"
        write_lines(path, lines)
        with pytest.raises(ValueError, match="non-finite"):
            load_model(path)

    def test_trailing_content(self, tmp_path):
        lines = valid_file_lines(tmp_path)
        lines.append("0.5 0.5")
        path = tmp_path / "extra.model"
        write_lines(path, lines)
        with pytest.raises(ValueError, match="trailing"):
            load_model(path)

    def test_trailing_blank_lines_ok(self, tmp_path):
        lines = valid_file_lines(tmp_path)
        path = tmp_path / "blank.model"
        path.write_text("\n".join(lines) + "\n\n\n", encoding="utf-8")
        assert load_model(path) is not None

    def test_supervised_header_without_classifier_count(self, tmp_path):
        path = tmp_path / "noL.model"
        save_model(small_medstc_model(), path)
        lines = path.read_text(encoding="utf-8").rstrip("\n").split("\n")
        header = json.loads(lines[0])
        header["L"] = None
        lines[0] = json.dumps(header, sort_keys=True)
        write_lines(path, lines)
        with pytest.raises(ValueError, match="missing L"):
            load_model(path)

    def test_supervised_missing_classifier_rows(self, tmp_path):
        path = tmp_path / "noeta.model"
        model = small_medstc_model()
        save_model(model, path)
        lines = path.read_text(encoding="utf-8").rstrip("\n").split("\n")
        write_lines(path, lines[: 1 + model.beta.shape[0]])
        with pytest.raises(ValueError, match="classifier"):
            load_model(path)

    def test_bad_topic_count(self, tmp_path):
        lines = valid_file_lines(tmp_path)
        header = json.loads(lines[0])
        header["K"] = 0
        lines[0] = json.dumps(header, sort_keys=True)
        path = tmp_path / "k0.model"
        write_lines(path, lines)
        with pytest.raises(ValueError, match="empty dictionary"):
            load_model(path)

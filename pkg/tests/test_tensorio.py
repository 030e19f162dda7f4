import numpy as np
import pytest

from omap_eval import (
    EvaluationReport,
    LabelMatrix,
    PerClassResult,
    ReportMetadata,
    ScoreMatrix,
    ValidationError,
    WeightMatrix,
    read_matrix,
    read_report,
    write_matrix,
    write_report,
)


def sample_report(omap=None):
    per_class = (
        PerClassResult(class_id="a", ap=0.5, oap=(0.5, 0.75)),
        PerClassResult(class_id="b", ap=1.0, oap=(1.0, 1.0)),
        PerClassResult(class_id="c", ap=None, oap=(None, None)),
    )
    level_means = (0.75, 0.875)
    return EvaluationReport(
        map=0.75,
        omap=0.8125 if omap is None else omap,
        omap0=0.75,
        omap_level=((0, level_means[0]), (1, level_means[1])),
        per_class=per_class,
        metadata=ReportMetadata(
            ontology_digest="deadbeef",
            levels=(0, 1),
            d_max=2,
            n_samples=4,
            n_classes=3,
            skipped_classes=("c",),
        ),
    )


class TestMatrixValidation:
    def test_score_range(self):
        with pytest.raises(ValidationError) as err:
            ScoreMatrix.from_values([[0.2, 1.2], [0.0, 0.5]])
        assert err.value.code == "value-out-of-range"
        assert "row 0, col 1" in str(err.value)

    def test_label_binarity(self):
        with pytest.raises(ValidationError) as err:
            LabelMatrix.from_values([[0.0, 0.5]])
        assert err.value.code == "not-binary-label"

    def test_nan_rejected(self):
        with pytest.raises(ValidationError) as err:
            ScoreMatrix.from_values([[0.1, float("nan")]])
        assert err.value.code == "non-finite-value"
        with pytest.raises(ValidationError):
            LabelMatrix.from_values([[1.0, float("inf")]])

    def test_empty_rejected(self):
        with pytest.raises(ValidationError) as err:
            ScoreMatrix.from_values(np.empty((0, 3), dtype=np.float32))
        assert err.value.code == "empty-matrix"

    def test_label_sets_match_matrix(self):
        labels = LabelMatrix.from_values([[1, 0, 1], [0, 0, 1], [1, 1, 1]])
        assert labels.label_sets == ((0, 2), (2,), (0, 1, 2))
        assert labels.label_set(1) == (2,)


class TestBinaryFormat:
    def test_round_trip_2x3(self, tmp_path):
        scores = ScoreMatrix.from_values([[0.1, 0.2, 0.3], [0.4, 0.5, 0.6]])
        path = tmp_path / "m.omap"
        write_matrix(scores, path)
        again = read_matrix(path, "scores")
        assert isinstance(again, ScoreMatrix)
        np.testing.assert_array_equal(again.values, scores.values)

    def test_round_trip_random(self, tmp_path, rng):
        for i in range(25):
            n = int(rng.integers(1, 40))
            c = int(rng.integers(1, 20))
            scores = ScoreMatrix.from_values(rng.random((n, c), dtype=np.float32))
            path = tmp_path / f"m{i}.omap"
            write_matrix(scores, path)
            first = path.read_bytes()
            write_matrix(read_matrix(path, "scores"), path)
            assert path.read_bytes() == first

    def test_minimal_file(self, tmp_path):
        path = tmp_path / "one.omap"
        write_matrix(ScoreMatrix.from_values([[0.0]]), path)
        assert read_matrix(path, "scores").values.shape == (1, 1)
        # header is 24 bytes, payload one float32
        assert path.stat().st_size == 28

    def test_kind_mismatch(self, tmp_path):
        path = tmp_path / "m.omap"
        write_matrix(ScoreMatrix.from_values([[0.5]]), path)
        with pytest.raises(ValidationError) as err:
            read_matrix(path, "labels")
        assert err.value.code == "kind-mismatch"

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "m.omap"
        write_matrix(ScoreMatrix.from_values([[0.5, 0.5]]), path)
        path.write_bytes(path.read_bytes()[:-2])
        with pytest.raises(ValidationError) as err:
            read_matrix(path, "scores")
        assert err.value.code == "truncated-matrix"

    def test_bad_version(self, tmp_path):
        path = tmp_path / "m.omap"
        write_matrix(ScoreMatrix.from_values([[0.5]]), path)
        blob = bytearray(path.read_bytes())
        blob[4] = 9
        path.write_bytes(bytes(blob))
        with pytest.raises(ValidationError) as err:
            read_matrix(path, "scores")
        assert err.value.code == "unsupported-version"

    def test_binary_values_validated(self, tmp_path):
        path = tmp_path / "m.omap"
        write_matrix(ScoreMatrix.from_values([[0.5, 1.0]]), path)
        blob = bytearray(path.read_bytes())
        blob[24:28] = np.float32(1.5).tobytes()
        path.write_bytes(bytes(blob))
        with pytest.raises(ValidationError) as err:
            read_matrix(path, "scores")
        assert err.value.code == "value-out-of-range"

    def test_weights_kind(self, tmp_path):
        weights = WeightMatrix.from_values([[2.5, 0.0], [1.0, 4.0]])
        path = tmp_path / "w.omap"
        write_matrix(weights, path)
        again = read_matrix(path, "weights")
        assert isinstance(again, WeightMatrix)
        np.testing.assert_array_equal(again.values, weights.values)


class TestCsvFormat:
    def test_round_trip_exact_for_float32(self, tmp_path, rng):
        scores = ScoreMatrix.from_values(rng.random((7, 5), dtype=np.float32))
        path = tmp_path / "m.csv"
        write_matrix(scores, path, fmt="csv")
        again = read_matrix(path, "scores")
        np.testing.assert_array_equal(again.values, scores.values)

    def test_header_layout(self, tmp_path):
        path = tmp_path / "m.csv"
        write_matrix(LabelMatrix.from_values([[1, 0]]), path, fmt="csv")
        text = path.read_text()
        assert text.splitlines()[0] == "sample_id,class_0,class_1"

    def test_out_of_range_reports_position(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("sample_id,class_0,class_1\n0,0.5,1.2\n")
        with pytest.raises(ValidationError) as err:
            read_matrix(path, "scores")
        assert err.value.code == "value-out-of-range"
        assert "row 0, col 1" in str(err.value)

    def test_label_binarity_checked(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("sample_id,class_0\n0,0.5\n")
        with pytest.raises(ValidationError) as err:
            read_matrix(path, "labels")
        assert err.value.code == "not-binary-label"

    def test_ragged_rows(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("sample_id,class_0,class_1\n0,0.5\n")
        with pytest.raises(ValidationError) as err:
            read_matrix(path, "scores")
        assert err.value.code == "shape-mismatch"


class TestReports:
    def test_round_trip(self, tmp_path):
        report = sample_report()
        path = tmp_path / "r.json"
        write_report(report, path)
        again = read_report(path)
        assert again == report

    def test_unknown_schema(self, tmp_path):
        report = sample_report()
        path = tmp_path / "r.json"
        write_report(report, path)
        path.write_text(path.read_text().replace("omap_report_v1", "omap_report_v9"))
        with pytest.raises(ValidationError) as err:
            read_report(path)
        assert err.value.code == "report-schema-version"

    def test_integrity_check_on_read(self, tmp_path):
        report = sample_report()
        path = tmp_path / "r.json"
        write_report(report, path)
        path.write_text(path.read_text().replace('"omap": 0.8125', '"omap": 0.58125'))
        with pytest.raises(ValidationError) as err:
            read_report(path)
        assert err.value.code == "report-integrity"

    def test_tampered_omap_rejected_on_write(self, tmp_path):
        with pytest.raises(ValidationError):
            write_report(sample_report(omap=0.9), tmp_path / "r.json")

    def test_out_of_range_metric_rejected(self, tmp_path):
        report = sample_report()
        path = tmp_path / "r.json"
        write_report(report, path)
        path.write_text(path.read_text().replace('"map": 0.75', '"map": 1.75'))
        with pytest.raises(ValidationError) as err:
            read_report(path)
        assert err.value.code == "metric-out-of-range"

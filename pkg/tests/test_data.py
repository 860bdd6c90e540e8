import numpy as np
import pytest

from splr.data import DataError, DataMatrix, load_labels, load_matrix, scale_features


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestLoadMatrix:
    def test_csv(self, tmp_path):
        X = load_matrix(_write(tmp_path, "m.csv", "1,2\n3,4\n5,6"), "csv")
        np.testing.assert_array_equal(X.values, [[1, 2], [3, 4], [5, 6]])
        assert (X.n, X.d) == (3, 2)

    def test_empty_file(self, tmp_path):
        with pytest.raises(DataError, match="no rows"):
            load_matrix(_write(tmp_path, "e.csv", ""), "csv")

    def test_ragged(self, tmp_path):
        with pytest.raises(DataError, match="ragged row at line 2"):
            load_matrix(_write(tmp_path, "r.csv", "1,2\n3"), "csv")

    def test_non_numeric_reports_position(self, tmp_path):
        with pytest.raises(DataError, match="line 3, column 2"):
            load_matrix(_write(tmp_path, "n.csv", "1,2\n3,4\n5,x"), "csv")

    def test_header_is_skipped(self, tmp_path):
        X = load_matrix(_write(tmp_path, "h.csv", "a,b\n1,2\n3,4\n"), "csv")
        np.testing.assert_array_equal(X.values, [[1, 2], [3, 4]])

    def test_tsv_and_whitespace(self, tmp_path):
        a = load_matrix(_write(tmp_path, "t.tsv", "1\t2.5\n-3\t4e1\n"))
        b = load_matrix(_write(tmp_path, "t.txt", "1  2.5\n -3 4e1\n"))
        np.testing.assert_array_equal(a.values, [[1, 2.5], [-3, 40]])
        np.testing.assert_array_equal(a.values, b.values)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_matrix(tmp_path / "absent.csv")

    def test_round_trip(self, tmp_path, rng):
        M = np.round(rng.normal(size=(7, 4)), 6)
        text = "\n".join(",".join(repr(float(x)) for x in row) for row in M)
        X = load_matrix(_write(tmp_path, "rt.csv", text))
        np.testing.assert_array_equal(X.values, M)

    def test_rejects_non_finite(self):
        with pytest.raises(DataError):
            DataMatrix(np.array([[1.0, np.nan], [0.0, 1.0]]))


class TestLoadLabels:
    def test_dense_first_appearance(self, tmp_path):
        y = load_labels(_write(tmp_path, "y.txt", "a\nb\na\n"))
        np.testing.assert_array_equal(y.labels, [0, 1, 0])
        assert y.c == 2

    def test_single(self, tmp_path):
        y = load_labels(_write(tmp_path, "y.txt", "x"))
        np.testing.assert_array_equal(y.labels, [0])
        assert y.c == 1

    def test_empty(self, tmp_path):
        with pytest.raises(DataError):
            load_labels(_write(tmp_path, "y.txt", "\n"))

    def test_length_mismatch_at_pairing(self, tmp_path):
        y = load_labels(_write(tmp_path, "y.txt", "1\n2\n1\n2\n1\n"))
        X = DataMatrix(np.ones((4, 2)))
        with pytest.raises(DataError, match="does not match"):
            y.check_pairs_with(X)


class TestScaleFeatures:
    def test_examples(self):
        X = DataMatrix(np.array([[1, 7, -1], [3, 7, 0], [5, 7, 1]], dtype=float))
        np.testing.assert_array_equal(
            scale_features(X).values, [[0, 0, 0], [0.5, 0, 0.5], [1, 0, 1]]
        )

    def test_idempotent_and_nonnegative(self, rng):
        X = scale_features(DataMatrix(rng.normal(size=(20, 6)) * 5 - 3))
        assert X.values.min() >= 0 and X.values.max() <= 1
        np.testing.assert_array_equal(scale_features(X).values, X.values)

import numpy as np
import pytest

from hdcausal.data import (
    ColumnRoles,
    Dataset,
    FeatureMeta,
    correlation_filter,
    drop_constant_features,
    load_csv,
    standardize,
    write_csv,
)
from hdcausal.errors import DataError


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


ROLES = ColumnRoles(treatment="A", outcome="Y")


class TestLoadCsv:
    def test_four_row_file(self, tmp_path):
        path = _write(tmp_path, "A,Y,X1,X2\n1,2.0,0.1,3\n1,1.5,0.2,2\n0,0.3,0.4,1\n0,0.1,0.3,5\n")
        ds = load_csv(path, ROLES)
        assert (ds.n, ds.p) == (4, 2)
        assert (ds.n_treated, ds.n_control) == (2, 2)
        assert ds.feature_names == ("X1", "X2")
        assert ds.outcome_kind == "continuous"

    def test_single_treatment_level(self, tmp_path):
        path = _write(tmp_path, "A,Y,X1\n1,2,0.1\n1,1,0.2\n1,3,0.4\n1,0,0.5\n")
        with pytest.raises(DataError, match="single level"):
            load_csv(path, ROLES)

    def test_na_cell_names_row_and_column(self, tmp_path):
        path = _write(tmp_path, "A,Y,X1,X2\n1,2,0.1,3\n0,1,NA,2\n")
        with pytest.raises(DataError, match=r"data row 2.*'X1'"):
            load_csv(path, ROLES)

    def test_empty_cell_is_missing(self, tmp_path):
        path = _write(tmp_path, "A,Y,X1\n1,2,\n0,1,0.2\n")
        with pytest.raises(DataError, match="missing value at data row 1"):
            load_csv(path, ROLES)

    def test_nan_and_inf_rejected(self, tmp_path):
        path = _write(tmp_path, "A,Y,X1\n1,2,NaN\n0,1,0.2\n")
        with pytest.raises(DataError, match="missing value"):
            load_csv(path, ROLES)
        path = _write(tmp_path, "A,Y,X1\n1,2,inf\n0,1,0.2\n")
        with pytest.raises(DataError, match="non-finite"):
            load_csv(path, ROLES)

    def test_treatment_outside_binary(self, tmp_path):
        path = _write(tmp_path, "A,Y,X1\n2,2,0.1\n0,1,0.2\n")
        with pytest.raises(DataError, match=r"outside \{0,1\}"):
            load_csv(path, ROLES)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="cannot open"):
            load_csv(tmp_path / "nope.csv", ROLES)

    def test_binary_outcome_inferred_and_overridable(self, tmp_path):
        path = _write(tmp_path, "A,Y,X1\n1,1,0.1\n0,0,0.2\n1,0,0.5\n0,1,0.7\n")
        assert load_csv(path, ROLES).outcome_kind == "binary"
        forced = load_csv(
            path, ColumnRoles(treatment="A", outcome="Y", outcome_kind="continuous")
        )
        assert forced.outcome_kind == "continuous"

    def test_explicit_feature_subset(self, tmp_path):
        path = _write(tmp_path, "A,Y,X1,X2,junk\n1,2,0.1,3,9\n0,1,0.2,2,9\n")
        ds = load_csv(
            path, ColumnRoles(treatment="A", outcome="Y", features=("X1", "X2"))
        )
        assert ds.feature_names == ("X1", "X2")

    def test_round_trip_exact(self, tmp_path, toy_dataset):
        out = tmp_path / "round.csv"
        write_csv(toy_dataset, out)
        back = load_csv(out, ROLES)
        assert np.array_equal(back.X, toy_dataset.X)
        assert np.array_equal(back.A, toy_dataset.A)
        assert np.array_equal(back.Y, toy_dataset.Y)
        assert back.feature_names == toy_dataset.feature_names
        assert back.outcome_kind == toy_dataset.outcome_kind


class TestDatasetInvariants:
    def test_rejects_nonbinary_treatment(self):
        with pytest.raises(DataError):
            Dataset(
                X=np.ones((3, 1)), A=np.array([0, 1, 2]), Y=np.zeros(3),
                feature_names=("X1",),
            )

    def test_rejects_duplicate_names(self):
        with pytest.raises(DataError, match="unique"):
            Dataset(
                X=np.ones((2, 2)), A=np.array([0, 1]), Y=np.zeros(2),
                feature_names=("X1", "X1"),
            )

    def test_arrays_frozen(self, toy_dataset):
        with pytest.raises(ValueError):
            toy_dataset.X[0, 0] = 99.0


class TestStandardize:
    def test_small_column(self):
        ds = Dataset(
            X=np.array([[1.0], [2.0], [3.0]]),
            A=np.array([1, 1, 0]),
            Y=np.zeros(3),
            feature_names=("X1",),
        )
        out = standardize(ds)
        assert np.allclose(out.X[:, 0], [-1.0, 0.0, 1.0])

    def test_moments_and_passthrough(self, toy_dataset):
        out = standardize(toy_dataset)
        assert np.allclose(out.X.mean(axis=0), 0.0, atol=1e-12)
        assert np.allclose(out.X.std(axis=0, ddof=1), 1.0, atol=1e-12)
        assert np.array_equal(out.A, toy_dataset.A)
        assert np.array_equal(out.Y, toy_dataset.Y)

    def test_idempotent(self, toy_dataset):
        once = standardize(toy_dataset)
        twice = standardize(once)
        assert np.max(np.abs(twice.X - once.X)) < 1e-12

    def test_constant_column_named(self):
        X = np.column_stack([np.arange(5.0), np.arange(5.0), np.full(5, 7.0)])
        ds = Dataset(
            X=X, A=np.array([1, 1, 0, 0, 1]), Y=np.zeros(5),
            feature_names=("X1", "X2", "X3"),
        )
        with pytest.raises(DataError, match="constant column X3"):
            standardize(ds)

    def test_drop_constant_features_audit(self):
        X = np.column_stack([np.arange(5.0), np.full(5, 7.0)])
        ds = Dataset(
            X=X, A=np.array([1, 1, 0, 0, 1]), Y=np.zeros(5),
            feature_names=("X1", "X2"),
        )
        kept, meta = drop_constant_features(ds)
        assert kept.feature_names == ("X1",)
        assert [m.kept for m in meta] == [True, False]
        assert meta[1].removal_reason == "constant"


class TestCorrelationFilter:
    def _dataset(self, X):
        n = X.shape[0]
        A = np.zeros(n, dtype=int)
        A[: n // 2] = 1
        names = tuple(f"X{j + 1}" for j in range(X.shape[1]))
        return Dataset(X=X, A=A, Y=np.zeros(n), feature_names=names)

    def test_duplicate_column_drops_exactly_one(self):
        rng = np.random.default_rng(0)
        base = rng.standard_normal((40, 3))
        X = np.column_stack([base, base[:, 1]])  # X4 duplicates X2
        filtered, meta = correlation_filter(standardize(self._dataset(X)), 0.95)
        assert filtered.p == 3
        removed = [m for m in meta if not m.kept]
        assert len(removed) == 1
        # tie on mean |corr| resolves to the higher index
        assert removed[0].name == "X4"
        assert removed[0].removal_reason == "redundant_correlation"

    def test_no_op_below_cutoff(self):
        rng = np.random.default_rng(1)
        ds = standardize(self._dataset(rng.standard_normal((60, 5))))
        filtered, meta = correlation_filter(ds, 0.95)
        assert filtered.p == 5
        assert np.array_equal(filtered.X, ds.X)
        assert all(m.kept for m in meta)

    def test_postcondition_no_pair_above_cutoff(self):
        rng = np.random.default_rng(2)
        base = rng.standard_normal((50, 4))
        # several highly collinear variants of the same columns
        X = np.column_stack(
            [
                base,
                base[:, 0] + 0.05 * rng.standard_normal(50),
                base[:, 1] + 0.03 * rng.standard_normal(50),
                base[:, 0] - 0.04 * rng.standard_normal(50),
            ]
        )
        ds = standardize(self._dataset(X))
        filtered, _ = correlation_filter(ds, 0.9)
        corr = np.abs(np.corrcoef(filtered.X, rowvar=False))
        np.fill_diagonal(corr, 0.0)
        assert corr.max() <= 0.9

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        base = rng.standard_normal((50, 6))
        X = np.column_stack([base, base @ rng.standard_normal((6, 3)) * 0.2 + base[:, :3]])
        ds = standardize(self._dataset(X))
        first, meta1 = correlation_filter(ds, 0.8)
        second, meta2 = correlation_filter(ds, 0.8)
        assert first.feature_names == second.feature_names
        assert meta1 == meta2

    def test_invalid_cutoff(self, toy_dataset):
        with pytest.raises(DataError):
            correlation_filter(toy_dataset, 0.0)


def test_feature_meta_consistency():
    with pytest.raises(ValueError):
        FeatureMeta(index=0, name="X1", kept=True, removal_reason="constant")

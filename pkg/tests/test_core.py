import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memvec.core import Dataset, MemoryIndex, MemoryUnit, QueryModel, inner, normalize
from memvec.errors import (
    DimensionError,
    EmptyUnitError,
    ModelError,
    NormalizationError,
)


class TestNormalize:
    def test_unit_norm(self):
        v = normalize([3.0, 4.0])
        assert np.allclose(v, [0.6, 0.8])
        assert abs(np.linalg.norm(v) - 1.0) <= 1e-9

    def test_zero_vector_rejected(self):
        with pytest.raises(NormalizationError):
            normalize([0.0, 0.0, 0.0])

    def test_non_finite_rejected(self):
        with pytest.raises(NormalizationError):
            normalize([1.0, np.nan])
        with pytest.raises(NormalizationError):
            normalize([1.0, np.inf])

    def test_shape_rejected(self):
        with pytest.raises(DimensionError):
            normalize(np.ones((2, 2)))
        with pytest.raises(DimensionError):
            normalize([])

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=16))
    def test_idempotent_and_unit(self, coeffs):
        arr = np.asarray(coeffs)
        if np.linalg.norm(arr) == 0.0:
            return
        v = normalize(arr)
        assert abs(np.linalg.norm(v) - 1.0) <= 1e-9
        assert np.allclose(normalize(v), v, atol=1e-12)


class TestInner:
    def test_value(self):
        assert inner([1.0, 2.0], [3.0, -1.0]) == pytest.approx(1.0)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            inner([1.0], [1.0, 2.0])


class TestDataset:
    def test_basic(self):
        ds = Dataset(np.eye(3))
        assert ds.size == 3 and ds.dim == 3 and len(ds) == 3

    def test_rejects_non_unit_rows(self):
        with pytest.raises(NormalizationError):
            Dataset(2.0 * np.eye(3))

    def test_accepts_float32_rounding(self):
        rng = np.random.default_rng(0)
        g = rng.standard_normal((5, 33))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        Dataset(g.astype(np.float32).astype(np.float64))  # no raise

    def test_rejects_empty_and_nan(self):
        with pytest.raises(DimensionError):
            Dataset(np.zeros((0, 3)))
        with pytest.raises(NormalizationError):
            Dataset(np.array([[np.nan, 0.0]]))

    def test_vectors_write_protected(self):
        ds = Dataset(np.eye(2))
        with pytest.raises(ValueError):
            ds.vectors[0, 0] = 5.0


class TestMemoryUnit:
    def test_rejects_empty_and_duplicates(self):
        with pytest.raises(EmptyUnitError):
            MemoryUnit(member_ids=np.array([], dtype=np.int64),
                       representative=np.ones(3))
        with pytest.raises(EmptyUnitError):
            MemoryUnit(member_ids=np.array([1, 1]), representative=np.ones(3))

    def test_size(self):
        u = MemoryUnit(member_ids=np.array([4, 0, 2]), representative=np.ones(3))
        assert u.size == 3


class TestMemoryIndex:
    def _unit(self, ids, d=3):
        return MemoryUnit(member_ids=np.asarray(ids), representative=np.ones(d))

    def test_partition_enforced(self):
        units = (self._unit([0, 1]), self._unit([2]))
        idx = MemoryIndex(units=units, construction="sum", dim=3, total=3)
        assert idx.num_units == 2
        assert idx.representatives().shape == (2, 3)

    def test_gap_rejected(self):
        with pytest.raises(ModelError):
            MemoryIndex(units=(self._unit([0, 2]),), construction="sum",
                        dim=3, total=3)

    def test_overlap_rejected(self):
        with pytest.raises(ModelError):
            MemoryIndex(units=(self._unit([0, 1]), self._unit([1, 2])),
                        construction="sum", dim=3, total=3)

    def test_bad_construction_tag(self):
        with pytest.raises(ModelError):
            MemoryIndex(units=(self._unit([0]),), construction="mean",
                        dim=3, total=1)


class TestQueryModel:
    def test_beta_complement(self):
        q = QueryModel("H1", alpha=0.6, planted_id=0)
        assert q.beta == pytest.approx(0.8)

    def test_h1_requires_planted(self):
        with pytest.raises(ModelError):
            QueryModel("H1", alpha=0.5)

    def test_unknown_hypothesis(self):
        with pytest.raises(ModelError):
            QueryModel("H2")

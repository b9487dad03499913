"""Tests for the PCA embedding."""
import numpy as np
import pandas as pd
import pytest

from netdomain.core.exceptions import EmbeddingError
from netdomain.services.embedding import pca_embed, standardize


def _frame(values, prefix="f"):
    values = np.asarray(values, dtype=float)
    return pd.DataFrame(values, columns=[f"{prefix}{j}" for j in range(values.shape[1])],
                        index=[f"n{i:03d}" for i in range(values.shape[0])])


def test_standardize_drops_constant_columns():
    frame = pd.DataFrame({"a": [1.0, 2.0, 3.0], "b": [4.0, 4.0, 4.0]})
    z, kept, dropped = standardize(frame)
    assert kept == ["a"]
    assert dropped == ["b"]
    assert z.mean() == pytest.approx(0.0)
    assert z.std() == pytest.approx(1.0)


def test_components_are_orthonormal(rng):
    emb = pca_embed(_frame(rng.normal(size=(60, 6))), dims=3)
    gram = emb.components @ emb.components.T
    np.testing.assert_allclose(gram, np.eye(3), atol=1e-10)
    assert list(emb.coordinates.columns) == ["pc1", "pc2", "pc3"]


def test_explained_fractions(rng):
    emb = pca_embed(_frame(rng.normal(size=(50, 5))))
    assert emb.explained.sum() <= 1.0 + 1e-12
    assert emb.explained[0] >= emb.explained[1]


def test_rank_one_data_is_fully_explained(rng):
    t = rng.normal(size=40)
    values = np.column_stack([t, 2 * t + 1, -t])
    emb = pca_embed(_frame(values))
    assert emb.explained[0] == pytest.approx(1.0)


def test_axis_orientation_is_fixed(rng):
    emb = pca_embed(_frame(rng.normal(size=(30, 4))))
    for axis in emb.components:
        assert axis[np.argmax(np.abs(axis))] > 0


def test_coordinates_keep_row_index(rng):
    frame = _frame(rng.normal(size=(20, 3)))
    emb = pca_embed(frame)
    assert list(emb.coordinates.index) == list(frame.index)


def test_duplicate_rows_share_coordinates(rng):
    values = rng.normal(size=(10, 3))
    values = np.vstack([values, values[:1]])
    emb = pca_embed(_frame(values))
    np.testing.assert_allclose(emb.coordinates.iloc[0], emb.coordinates.iloc[-1])


def test_embedding_preconditions(rng):
    with pytest.raises(EmbeddingError):
        pca_embed(_frame([[1.0, 2.0]]))
    gaps = _frame(rng.normal(size=(5, 3)))
    gaps.iloc[0, 0] = np.nan
    with pytest.raises(EmbeddingError):
        pca_embed(gaps)
    with pytest.raises(EmbeddingError):
        pca_embed(pd.DataFrame({"a": [1.0, 2.0, 3.0], "b": [5.0, 5.0, 5.0]}))

"""PCA embedding of the feature matrix for the separability check."""
import logging

import numpy as np
import pandas as pd

from netdomain.core.constants import EMBED_DIMS
from netdomain.core.exceptions import EmbeddingError
from netdomain.schemas import Embedding

logger = logging.getLogger(__name__)


def standardize(frame: pd.DataFrame):
    """Zero mean, unit (population) variance; zero-variance columns are dropped."""
    values = frame.to_numpy(dtype=np.float64)
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    keep = std > 0
    dropped = [c for c, k in zip(frame.columns, keep) if not k]
    z = (values[:, keep] - mean[keep]) / std[keep]
    return z, [c for c, k in zip(frame.columns, keep) if k], dropped


def pca_embed(frame: pd.DataFrame, dims: int = EMBED_DIMS) -> Embedding:
    """
    Project standardized rows onto the top `dims` principal axes.

    Each axis is oriented so its largest-magnitude loading is positive.

    Args:
        frame: imputed rows (networks) x features
        dims: number of axes

    Returns:
        Embedding with coordinates indexed like `frame`
    """
    if len(frame) < 2:
        raise EmbeddingError(f"PCA needs at least 2 rows, got {len(frame)}")
    if frame.isna().values.any():
        raise EmbeddingError("PCA input must be fully imputed")

    z, features, dropped = standardize(frame)
    if dropped:
        logger.debug(f"PCA drops {len(dropped)} zero-variance features")
    if len(features) < dims:
        raise EmbeddingError(f"PCA needs at least {dims} varying features, got {len(features)}")

    _, singular, vt = np.linalg.svd(z, full_matrices=False)
    if vt.shape[0] < dims:
        raise EmbeddingError(f"Only {vt.shape[0]} principal axes exist, {dims} requested")
    variance = singular ** 2
    total = variance.sum()
    if total == 0:
        raise EmbeddingError("PCA input has no variance")

    components = vt[:dims].copy()
    for axis in components:
        if axis[np.argmax(np.abs(axis))] < 0:
            axis *= -1.0

    coordinates = pd.DataFrame(
        z @ components.T,
        index=frame.index,
        columns=[f"pc{i + 1}" for i in range(dims)],
    )
    return Embedding(
        coordinates=coordinates,
        components=components,
        explained=variance[:dims] / total,
        features=features,
        dropped=dropped,
    )

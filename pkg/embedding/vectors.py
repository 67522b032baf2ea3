"""Unit-sphere embedding math."""

from typing import Sequence, Union

import numpy as np
import numpy.typing as npt

from data_store.errors import DegenerateEmbeddingError, EmbeddingDimensionError

EmbeddingVector = npt.NDArray[np.float64]
VectorLike = Union[EmbeddingVector, Sequence[float]]

DEFAULT_DIM = 64
UNIT_TOLERANCE = 1e-6


def as_vector(values: VectorLike) -> EmbeddingVector:
    """Coerce to a 1-D float64 array."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise EmbeddingDimensionError(f"expected a 1-D vector, got shape {arr.shape}")
    return arr


def normalize(values: VectorLike) -> EmbeddingVector:
    """Project a vector onto the unit sphere."""
    arr = as_vector(values)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0 or not np.isfinite(norm):
        raise DegenerateEmbeddingError()
    return arr / norm


def is_unit(values: VectorLike, tol: float = UNIT_TOLERANCE) -> bool:
    """True when the vector norm is within tol of one."""
    return abs(float(np.linalg.norm(as_vector(values))) - 1.0) <= tol


def _check_dims(a: EmbeddingVector, b: EmbeddingVector) -> None:
    if a.shape != b.shape:
        raise EmbeddingDimensionError(
            f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}"
        )


def cosine_similarity(a: VectorLike, b: VectorLike) -> float:
    """Dot product of two unit vectors, clipped to [-1, 1]."""
    va, vb = as_vector(a), as_vector(b)
    _check_dims(va, vb)
    return float(np.clip(np.dot(va, vb), -1.0, 1.0))


def alignment_loss(z_motion: VectorLike, z_text: VectorLike) -> float:
    """Cosine distance between a motion and a text embedding."""
    return 1.0 - cosine_similarity(z_motion, z_text)


def similarity_matrix(query: VectorLike, keys: npt.NDArray[np.float64]) -> EmbeddingVector:
    """Cosine similarity of one query against a stack of unit keys."""
    q = as_vector(query)
    if keys.size == 0:
        return np.zeros(0, dtype=np.float64)
    if keys.ndim != 2 or keys.shape[1] != q.shape[0]:
        raise EmbeddingDimensionError(
            f"dimension mismatch: query {q.shape[0]} vs keys {keys.shape}"
        )
    return np.clip(keys @ q, -1.0, 1.0)

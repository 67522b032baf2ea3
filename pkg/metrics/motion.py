"""Motion features, average pairwise distance and Frechet distance."""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np
from scipy import linalg
from scipy.spatial.distance import pdist

from data_store.errors import MetricInputError
from fsm.state import ExecutionTrace
from skills.character import JOINT_ORDER

logger = logging.getLogger(__name__)

COV_EPS = 1e-6
TRACE_TOLERANCE = 1e-6


def motion_features(trace: ExecutionTrace) -> np.ndarray:
    """Frames x dim: joint quaternions, then root-relative joint positions."""
    rows: List[np.ndarray] = []
    for record in trace.records:
        root = np.asarray(record.root_pos)
        quats = [
            record.joint_rotations[j.value]
            for j in JOINT_ORDER
            if j.value in record.joint_rotations
        ]
        positions = [
            np.asarray(record.joints[j.value]) - root
            for j in JOINT_ORDER
            if j.value in record.joints
        ]
        rows.append(np.concatenate([np.ravel(quats), np.ravel(positions)]))
    if not rows:
        return np.zeros((0, len(JOINT_ORDER) * 7))
    return np.vstack(rows)


def apd(samples: Sequence[np.ndarray]) -> float:
    """Mean L2 distance over unordered pairs of flattened samples.

    Sequences are truncated to the shortest one before flattening.
    """
    if len(samples) < 2:
        raise MetricInputError(f"apd needs at least 2 samples, got {len(samples)}")
    arrays = [np.atleast_1d(np.asarray(s, dtype=np.float64)) for s in samples]
    shapes = {a.shape[1:] for a in arrays}
    if len(shapes) != 1:
        raise MetricInputError(f"apd samples have mismatched feature dims: {sorted(shapes)}")
    length = min(a.shape[0] for a in arrays)
    flat = np.stack([a[:length].reshape(-1) for a in arrays])
    return float(np.mean(pdist(flat)))


@dataclass(frozen=True)
class GaussianStats:
    """Mean vector and covariance of per-frame features."""

    mu: np.ndarray
    sigma: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.mu.shape[0])


def gaussian_stats(features: np.ndarray) -> GaussianStats:
    """Fit mean and covariance; small samples get +1e-6 I on the covariance."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] == 0:
        raise MetricInputError("no frames to fit")
    if not np.all(np.isfinite(x)):
        raise MetricInputError("non-finite motion features")
    n, d = x.shape
    mu = x.mean(axis=0)
    if n > 1:
        sigma = np.atleast_2d(np.cov(x, rowvar=False))
    else:
        sigma = np.zeros((d, d))
    if n < d + 1:
        sigma = sigma + COV_EPS * np.eye(d)
    return GaussianStats(mu, (sigma + sigma.T) / 2.0)


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    values, vectors = linalg.eigh(matrix)
    values = np.clip(values, 0.0, None)
    return (vectors * np.sqrt(values)) @ vectors.T


def frechet_distance(a: GaussianStats, b: GaussianStats) -> float:
    """||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2))."""
    if a.dim != b.dim:
        raise MetricInputError(f"dimension mismatch: {a.dim} vs {b.dim}")
    diff = a.mu - b.mu
    root_a = _psd_sqrt(a.sigma)
    inner = root_a @ b.sigma @ root_a
    eigen = np.clip(linalg.eigvalsh((inner + inner.T) / 2.0), 0.0, None)
    tr_covmean = float(np.sum(np.sqrt(eigen)))
    value = float(diff @ diff + np.trace(a.sigma) + np.trace(b.sigma) - 2.0 * tr_covmean)
    if value < 0.0:
        if value < -TRACE_TOLERANCE:
            logger.warning(f"Frechet distance residue {value:.3e} below tolerance")
        return 0.0
    return value


def fid(set_a: np.ndarray, set_b: np.ndarray) -> float:
    """Frechet distance between Gaussians fitted to two per-frame feature sets."""
    a = np.asarray(set_a, dtype=np.float64)
    b = np.asarray(set_b, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.shape[1] != b.shape[1]:
        raise MetricInputError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    return frechet_distance(gaussian_stats(a), gaussian_stats(b))


def pooled_features(traces: Iterable[ExecutionTrace]) -> np.ndarray:
    """Per-frame features of several traces stacked together."""
    blocks = [motion_features(t) for t in traces]
    blocks = [b for b in blocks if len(b)]
    if not blocks:
        return np.zeros((0, len(JOINT_ORDER) * 7))
    return np.vstack(blocks)

"""Boxes, voxelized surfaces and nearest-point queries."""

import math
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np
import numpy.typing as npt

PointCloud = npt.NDArray[np.float64]

EPS = 1e-9


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box, meters, z-up."""

    min: Tuple[float, float, float]
    max: Tuple[float, float, float]

    def __post_init__(self) -> None:
        if any(lo > hi for lo, hi in zip(self.min, self.max)):
            raise ValueError(f"invalid AABB: min {self.min} > max {self.max}")

    @classmethod
    def from_points(cls, points: PointCloud) -> "Aabb":
        """Tight box around a non-empty point set."""
        lo = points.min(axis=0)
        hi = points.max(axis=0)
        return cls(tuple(float(v) for v in lo), tuple(float(v) for v in hi))  # type: ignore[arg-type]

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.min, dtype=np.float64)

    @property
    def hi(self) -> np.ndarray:
        return np.asarray(self.max, dtype=np.float64)

    @property
    def extent(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def centroid(self) -> np.ndarray:
        return (self.lo + self.hi) / 2.0

    def corners(self) -> np.ndarray:
        """The 8 corners, x slowest, z fastest."""
        xs, ys, zs = zip(self.min, self.max)
        return np.array(
            [[x, y, z] for x in xs for y in ys for z in zs], dtype=np.float64
        )

    def inflated(self, margin: float) -> "Aabb":
        """Box grown by margin on every side."""
        return Aabb(
            tuple(v - margin for v in self.min),  # type: ignore[arg-type]
            tuple(v + margin for v in self.max),  # type: ignore[arg-type]
        )

    def translated(self, offset: Iterable[float]) -> "Aabb":
        """Box shifted by a 3D offset."""
        delta = np.asarray(list(offset), dtype=np.float64)
        return Aabb(
            tuple(float(v) for v in self.lo + delta),  # type: ignore[arg-type]
            tuple(float(v) for v in self.hi + delta),  # type: ignore[arg-type]
        )

    def contains(self, points: PointCloud, tol: float = EPS) -> np.ndarray:
        """Boolean mask of points inside the box."""
        pts = np.atleast_2d(points)
        return np.all((pts >= self.lo - tol) & (pts <= self.hi + tol), axis=1)

    def footprint_distance(self, xy: Iterable[float]) -> float:
        """2D distance from a ground point to the box footprint (0 inside)."""
        p = np.asarray(list(xy), dtype=np.float64)[:2]
        gap = np.maximum(np.maximum(self.lo[:2] - p, p - self.hi[:2]), 0.0)
        return float(math.hypot(gap[0], gap[1]))

    def closest_footprint_point(self, xy: Iterable[float]) -> np.ndarray:
        """Nearest point of the 2D footprint to a ground point."""
        p = np.asarray(list(xy), dtype=np.float64)[:2]
        return np.clip(p, self.lo[:2], self.hi[:2])


def voxel_counts(aabb: Aabb, voxel_size: float) -> Tuple[int, int, int]:
    """Voxels per axis; at least one, boxes are tiled exactly."""
    if voxel_size <= 0:
        raise ValueError(f"voxel_size must be positive, got {voxel_size}")
    return tuple(  # type: ignore[return-value]
        max(1, math.ceil(float(e) / voxel_size - EPS)) for e in aabb.extent
    )


def voxelize_box(aabb: Aabb, voxel_size: float) -> PointCloud:
    """Centers of the surface voxels of a box, ordered by x, then y, then z."""
    counts = voxel_counts(aabb, voxel_size)
    axes = []
    for lo, extent, n in zip(aabb.lo, aabb.extent, counts):
        step = extent / n
        axes.append(lo + (np.arange(n) + 0.5) * step)
    ix, iy, iz = np.meshgrid(*[np.arange(n) for n in counts], indexing="ij")
    on_surface = np.zeros(ix.shape, dtype=bool)
    for idx, n in zip((ix, iy, iz), counts):
        on_surface |= (idx == 0) | (idx == n - 1)
    sel = on_surface.ravel()
    return np.stack(
        [
            axes[0][ix.ravel()[sel]],
            axes[1][iy.ravel()[sel]],
            axes[2][iz.ravel()[sel]],
        ],
        axis=1,
    )


def top_layer(points: PointCloud) -> np.ndarray:
    """Indices of the points at the maximum height."""
    if len(points) == 0:
        return np.zeros(0, dtype=np.int64)
    z = points[:, 2]
    return np.flatnonzero(z >= z.max() - EPS)


def nearest_surface_point(part: PointCloud, q: Iterable[float]) -> Tuple[np.ndarray, float]:
    """Exact nearest point of a part to q; ties go to the lowest index."""
    pts = np.asarray(part, dtype=np.float64)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("nearest_surface_point on an empty part")
    query = np.asarray(list(q), dtype=np.float64)
    diff = pts - query
    d2 = diff[:, 0] * diff[:, 0] + diff[:, 1] * diff[:, 1] + diff[:, 2] * diff[:, 2]
    index = int(np.argmin(d2))
    return pts[index].copy(), float(math.sqrt(d2[index]))


def yaw_rotation(yaw: float) -> np.ndarray:
    """3x3 rotation about +z."""
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def transform_points(local: PointCloud, position: Iterable[float], yaw: float = 0.0) -> PointCloud:
    """Rotate local points about z and translate them into the world."""
    offset = np.asarray(list(position), dtype=np.float64)
    if yaw == 0.0:
        return np.asarray(local, dtype=np.float64) + offset
    return np.asarray(local, dtype=np.float64) @ yaw_rotation(yaw).T + offset

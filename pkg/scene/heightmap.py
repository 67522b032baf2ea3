"""Egocentric heightmap sensor."""

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from scene.scene import Scene

GRID_SIZE = 12
CELL = 0.15
GATING_DISTANCE = 2.0


@dataclass(frozen=True)
class HeightmapObservation:
    """12x12 surface heights around the character, rows along its facing."""

    grid: np.ndarray
    origin: tuple
    yaw: float
    cell: float = CELL

    def flatten(self) -> np.ndarray:
        """Row-major 144-vector."""
        return self.grid.reshape(-1).copy()


def cell_centers(size: int = GRID_SIZE, cell: float = CELL) -> np.ndarray:
    """Local-frame sample centers, shape (size, size, 2)."""
    offsets = (np.arange(size) - size / 2 + 0.5) * cell
    gx, gy = np.meshgrid(offsets, offsets, indexing="ij")
    return np.stack([gx, gy], axis=-1)


def compute_heightmap(
    scene: Scene,
    root_pos: Sequence[float],
    yaw: float,
    dynamic_roots: Optional[Mapping[str, Sequence[float]]] = None,
    gating: float = GATING_DISTANCE,
    size: int = GRID_SIZE,
    cell: float = CELL,
) -> HeightmapObservation:
    """Max surface height per cell of a yaw-aligned grid centered on the root.

    Only objects whose AABB centroid lies within ``gating`` meters (2D) of the
    root contribute. ``dynamic_roots`` moves dynamic objects to new root
    positions; their indexed points are shifted accordingly.
    """
    root = np.array([float(root_pos[0]), float(root_pos[1])])
    grid = np.zeros((size, size), dtype=np.float64)
    if not scene.objects:
        return HeightmapObservation(grid, (root[0], root[1]), float(yaw), cell)

    moved = {}
    centroids = scene.centroids[:, :2].copy()
    for object_id, new_root in (dynamic_roots or {}).items():
        index = scene.object_index(object_id)
        obj = scene.objects[index]
        delta = np.asarray(new_root, dtype=np.float64)[:3] - obj.root_position
        moved[index] = delta
        centroids[index] = centroids[index] + delta[:2]

    near = np.hypot(centroids[:, 0] - root[0], centroids[:, 1] - root[1]) <= gating
    if not near.any():
        return HeightmapObservation(grid, (root[0], root[1]), float(yaw), cell)

    reach = (size / 2.0) * cell * math.sqrt(2.0) + cell
    chunks = []
    candidates = scene.index.query_radius(root, reach)
    if len(candidates):
        owner = scene.index.owner[candidates]
        keep = near[owner]
        for index in moved:
            keep &= owner != index
        chunks.append(scene.index.points[candidates[keep]])
    for index, delta in moved.items():
        if near[index]:
            chunks.append(scene.objects[index].points + delta)
    if not chunks:
        return HeightmapObservation(grid, (root[0], root[1]), float(yaw), cell)
    points = np.concatenate(chunks)

    c, s = math.cos(yaw), math.sin(yaw)
    dx = points[:, 0] - root[0]
    dy = points[:, 1] - root[1]
    local_x = c * dx + s * dy
    local_y = -s * dx + c * dy
    half = size / 2.0
    ix = np.floor(local_x / cell + half).astype(np.int64)
    iy = np.floor(local_y / cell + half).astype(np.int64)
    inside = (ix >= 0) & (ix < size) & (iy >= 0) & (iy < size) & (points[:, 2] > 0.0)
    np.maximum.at(grid, (ix[inside], iy[inside]), points[inside, 2])
    return HeightmapObservation(grid, (root[0], root[1]), float(yaw), cell)

"""Uniform 2D grid over scene surface points."""

import math
from typing import Sequence, Tuple

import numpy as np

from scene.geometry import PointCloud

DEFAULT_CELL = 0.5


class SpatialGrid:
    """Points bucketed into square ground cells, stored contiguously per cell.

    Points are sorted by (cell x, cell y) so every cell row of a rectangle
    query is one slice of the backing arrays.
    """

    def __init__(self, point_sets: Sequence[PointCloud], cell: float = DEFAULT_CELL):
        """Index the union of the given point sets; owner = position in the list."""
        if cell <= 0:
            raise ValueError(f"cell must be positive, got {cell}")
        self.cell = cell
        arrays = [np.asarray(p, dtype=np.float64).reshape(-1, 3) for p in point_sets]
        owners = [np.full(len(a), i, dtype=np.int64) for i, a in enumerate(arrays)]
        points = np.concatenate(arrays) if arrays else np.zeros((0, 3))
        owner = np.concatenate(owners) if owners else np.zeros(0, dtype=np.int64)
        if len(points):
            cells = np.floor(points[:, :2] / cell).astype(np.int64)
            self.origin = cells.min(axis=0)
            self.shape = cells.max(axis=0) - self.origin + 1
            rel = cells - self.origin
            keys = rel[:, 0] * self.shape[1] + rel[:, 1]
            order = np.argsort(keys, kind="stable")
            self.points = points[order]
            self.owner = owner[order]
            self.keys = keys[order]
        else:
            self.origin = np.zeros(2, dtype=np.int64)
            self.shape = np.zeros(2, dtype=np.int64)
            self.points = points
            self.owner = owner
            self.keys = np.zeros(0, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.points)

    def cell_of(self, xy: Sequence[float]) -> Tuple[int, int]:
        """Grid cell containing a ground point."""
        return (
            int(math.floor(xy[0] / self.cell)),
            int(math.floor(xy[1] / self.cell)),
        )

    def query_rect(self, lo: Sequence[float], hi: Sequence[float]) -> np.ndarray:
        """Indices of points in every cell touching the rectangle [lo, hi]."""
        if not len(self.points):
            return np.zeros(0, dtype=np.int64)
        cx0, cy0 = self.cell_of(lo)
        cx1, cy1 = self.cell_of(hi)
        cx0 = max(cx0 - int(self.origin[0]), 0)
        cy0 = max(cy0 - int(self.origin[1]), 0)
        cx1 = min(cx1 - int(self.origin[0]), int(self.shape[0]) - 1)
        cy1 = min(cy1 - int(self.origin[1]), int(self.shape[1]) - 1)
        if cx0 > cx1 or cy0 > cy1:
            return np.zeros(0, dtype=np.int64)
        rows = np.arange(cx0, cx1 + 1, dtype=np.int64) * int(self.shape[1])
        starts = np.searchsorted(self.keys, rows + cy0, side="left")
        ends = np.searchsorted(self.keys, rows + cy1, side="right")
        spans = [np.arange(s, e) for s, e in zip(starts, ends) if e > s]
        if not spans:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(spans)

    def query_radius(self, center: Sequence[float], radius: float) -> np.ndarray:
        """Indices of points in cells touching the square around a disk."""
        return self.query_rect(
            (center[0] - radius, center[1] - radius),
            (center[0] + radius, center[1] + radius),
        )

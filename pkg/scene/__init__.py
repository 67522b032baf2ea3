"""Scene geometry, loading, heightmaps and synthetic scenes."""

from .geometry import Aabb, nearest_surface_point, voxelize_box
from .heightmap import HeightmapObservation, compute_heightmap
from .scene import Scene, SceneObject, load_scene, sample_spawn, scene_from_dict
from .spatial_index import SpatialGrid
from .synthetic import build_apartment_payload, build_apartment_scene, build_box_scene

__all__ = [
    "Aabb",
    "HeightmapObservation",
    "Scene",
    "SceneObject",
    "SpatialGrid",
    "build_apartment_payload",
    "build_apartment_scene",
    "build_box_scene",
    "compute_heightmap",
    "load_scene",
    "nearest_surface_point",
    "sample_spawn",
    "scene_from_dict",
    "voxelize_box",
]

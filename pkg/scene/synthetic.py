"""Synthetic scenes for tests and the offline demo."""

import json
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple

from scene.scene import SCHEMA_VERSION, Scene, scene_from_dict

logger = logging.getLogger(__name__)

# id, category, room, (x, y), box min, box max
_STATIC = [
    ("sofa", "sofa", "living", (2.0, 6.5), (-1.0, -0.45, 0.0), (1.0, 0.45, 0.45)),
    ("armchair", "armchair", "living", (3.8, 4.5), (-0.4, -0.4, 0.0), (0.4, 0.4, 0.45)),
    ("chair", "chair", "kitchen", (7.0, 1.2), (-0.25, -0.25, 0.0), (0.25, 0.25, 0.45)),
    ("table", "table", "kitchen", (7.0, 2.4), (-0.6, -0.4, 0.0), (0.6, 0.4, 0.75)),
    ("bed", "bed", "bedroom", (8.0, 6.5), (-1.0, -0.8, 0.0), (1.0, 0.8, 0.5)),
    ("shelf", "shelf", "living", (0.5, 2.0), (-0.2, -0.5, 0.0), (0.2, 0.5, 1.6)),
    ("lamp", "lamp", "living", (4.5, 7.5), (-0.15, -0.15, 0.0), (0.15, 0.15, 1.5)),
    ("wardrobe", "wardrobe", "bedroom", (9.5, 4.8), (-0.3, -0.6, 0.0), (0.3, 0.6, 2.0)),
]

# id, category, root, half extents
_DYNAMIC = [
    ("box", "box", (2.5, 2.0, 0.15), (0.15, 0.15, 0.15)),
    ("toy", "toy", (6.0, 5.0, 0.1), (0.1, 0.1, 0.1)),
    ("vase", "vase", (4.0, 1.0, 0.125), (0.1, 0.1, 0.125)),
]

APARTMENT_BOUNDS = ((0.0, 0.0), (10.0, 8.0))


def static_box(
    object_id: str,
    category: str,
    position: Tuple[float, float],
    box_min: Sequence[float],
    box_max: Sequence[float],
    room: Optional[str] = None,
    yaw: float = 0.0,
) -> Dict[str, Any]:
    """Scene record for a static box object posed on the floor."""
    record: Dict[str, Any] = {
        "id": object_id,
        "category": category,
        "pose": {"x": position[0], "y": position[1], "yaw": yaw},
        "geometry": {"box": {"min": list(box_min), "max": list(box_max)}},
    }
    if room is not None:
        record["room"] = room
    return record


def dynamic_box(
    object_id: str,
    category: str,
    root: Sequence[float],
    half: Sequence[float],
) -> Dict[str, Any]:
    """Scene record for a carryable box centred on its root."""
    return {
        "id": object_id,
        "category": category,
        "dynamic": True,
        "root": {"x": root[0], "y": root[1], "z": root[2]},
        "geometry": {
            "box": {"min": [-h for h in half], "max": list(half)},
        },
    }


def build_apartment_payload(voxel_size: float = 0.10) -> Dict[str, Any]:
    """Three-room apartment: living room, kitchen corner and bedroom."""
    objects: List[Dict[str, Any]] = [
        static_box(oid, cat, pos, lo, hi, room=room)
        for oid, cat, room, pos, lo, hi in _STATIC
    ]
    objects += [dynamic_box(oid, cat, root, half) for oid, cat, root, half in _DYNAMIC]
    lo, hi = APARTMENT_BOUNDS
    return {
        "v": SCHEMA_VERSION,
        "bounds": {"min": list(lo), "max": list(hi)},
        "spawn": [5.0, 4.0],
        "voxel_size": voxel_size,
        "objects": objects,
    }


def build_apartment_scene(voxel_size: float = 0.10) -> Scene:
    """The apartment as a runtime Scene."""
    return scene_from_dict(build_apartment_payload(voxel_size))


def build_box_scene(
    boxes: Sequence[Tuple[Tuple[float, float], Sequence[float], Sequence[float]]],
    voxel_size: float = 0.10,
    bounds: Optional[Tuple[Tuple[float, float], Tuple[float, float]]] = None,
) -> Scene:
    """Scene of static boxes given as ((x, y), box_min, box_max)."""
    payload: Dict[str, Any] = {
        "v": SCHEMA_VERSION,
        "voxel_size": voxel_size,
        "objects": [
            static_box(f"box{i}", "box", pos, lo, hi)
            for i, (pos, lo, hi) in enumerate(boxes)
        ],
    }
    if bounds is not None:
        payload["bounds"] = {"min": list(bounds[0]), "max": list(bounds[1])}
    return scene_from_dict(payload)


def write_apartment(path: str, voxel_size: float = 0.10) -> None:
    """Write the apartment payload as scene JSON."""
    with open(path, "w", encoding="utf-8") as f:
        json.dump(build_apartment_payload(voxel_size), f, indent=2)
        f.write("\n")
    logger.info(f"Wrote apartment scene to {path}")

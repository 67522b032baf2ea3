"""Scene model, JSON loading and spawn sampling."""

import json
import logging
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Annotated, Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    StrictInt,
    ValidationError,
    model_validator,
)

from data_store.errors import HarnessIOError, SceneFormatError, SceneTooCrowdedError
from scene.geometry import (
    Aabb,
    PointCloud,
    top_layer,
    transform_points,
    voxelize_box,
)
from scene.spatial_index import DEFAULT_CELL, SpatialGrid

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_VOXEL = 0.10
MAX_CARRY_EDGE = 0.5
SPAWN_ATTEMPTS = 10_000
DEFAULT_HALF_EXTENT = 5.0


def _reject_text(value: Any) -> Any:
    if isinstance(value, (str, bytes, bool)):
        raise ValueError("expected a number")
    return value


Real = Annotated[float, BeforeValidator(_reject_text)]
Vec2 = Tuple[float, float]
Vec3 = Tuple[float, float, float]


# JSON schema


class PoseSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    x: Real
    y: Real
    yaw: Real = 0.0


class RootSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    x: Real
    y: Real
    z: Real


class BoxSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    min: Tuple[Real, Real, Real]
    max: Tuple[Real, Real, Real]

    @model_validator(mode="after")
    def _ordered(self) -> "BoxSpec":
        if any(lo > hi for lo, hi in zip(self.min, self.max)):
            raise ValueError("box min exceeds max")
        return self


class GeometrySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    box: Optional[BoxSpec] = None
    points: Optional[List[Tuple[Real, Real, Real]]] = None
    ply: Optional[str] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "GeometrySpec":
        given = [k for k in ("box", "points", "ply") if getattr(self, k) is not None]
        if len(given) != 1:
            raise ValueError("geometry needs exactly one of box, points, ply")
        return self


class ObjectSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str = Field(min_length=1)
    category: str = Field(min_length=1)
    dynamic: bool = False
    room: Optional[str] = None
    pose: Optional[PoseSpec] = None
    root: Optional[RootSpec] = None
    geometry: GeometrySpec
    parts: Dict[str, Union[List[StrictInt], List[Tuple[Real, Real, Real]]]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _placement(self) -> "ObjectSpec":
        if self.dynamic and self.root is None:
            raise ValueError("dynamic objects need a root")
        if not self.dynamic and self.pose is None:
            raise ValueError("static objects need a pose")
        if self.pose is not None and self.root is not None:
            raise ValueError("give either pose or root, not both")
        return self


class BoundsSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    min: Vec2
    max: Vec2


class SceneSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    v: int = SCHEMA_VERSION
    bounds: Optional[BoundsSpec] = None
    spawn: Optional[Vec2] = None
    voxel_size: float = Field(default=DEFAULT_VOXEL, gt=0)
    objects: List[ObjectSpec] = Field(default_factory=list)


# Runtime model


@dataclass
class SceneObject:
    """A placed object with its interactable surface parts in world frame."""

    id: str
    category: str
    aabb: Aabb
    parts: Dict[str, PointCloud]
    dynamic: bool = False
    position: Vec2 = (0.0, 0.0)
    yaw: Real = 0.0
    root: Optional[Vec3] = None
    room: Optional[str] = None
    points: PointCloud = field(default_factory=lambda: np.zeros((0, 3)))

    def __post_init__(self) -> None:
        if not len(self.points):
            merged = [p for p in self.parts.values() if len(p)]
            self.points = (
                np.unique(np.concatenate(merged), axis=0) if merged else np.zeros((0, 3))
            )

    @property
    def root_position(self) -> np.ndarray:
        """Root for dynamic objects, else ground position."""
        if self.root is not None:
            return np.asarray(self.root, dtype=np.float64)
        return np.array([self.position[0], self.position[1], 0.0])

    @property
    def half_height(self) -> float:
        return float(self.aabb.extent[2] / 2.0)

    def part(self, label: str) -> PointCloud:
        """Surface points of a labeled part."""
        try:
            return self.parts[label]
        except KeyError:
            raise KeyError(f"object {self.id} has no part '{label}'") from None

    def first_part(self, labels: Sequence[str]) -> str:
        """First of the preferred labels that exists and is non-empty."""
        for label in labels:
            if len(self.parts.get(label, ())):
                return label
        raise KeyError(f"object {self.id} has none of the parts {list(labels)}")


class Scene:
    """Objects over a flat ground at z = 0 with a spatial index of surface points."""

    def __init__(
        self,
        objects: Sequence[SceneObject],
        bounds: Optional[Tuple[Vec2, Vec2]] = None,
        spawn: Optional[Vec2] = None,
        voxel_size: float = DEFAULT_VOXEL,
        cell: float = DEFAULT_CELL,
    ):
        """Initialize the scene and build its index."""
        self.objects: List[SceneObject] = list(objects)
        self.voxel_size = voxel_size
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            dupes = sorted(i for i, n in Counter(ids).items() if n > 1)
            raise SceneFormatError("duplicate object ids", dupes)
        self._by_id = {o.id: o for o in self.objects}
        self.bounds = bounds if bounds is not None else self._default_bounds()
        lo, hi = self.bounds
        self.spawn_hint: Vec2 = (
            spawn if spawn is not None else ((lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2)
        )
        self.index = SpatialGrid([o.points for o in self.objects], cell=cell)
        self.centroids = (
            np.stack([o.aabb.centroid for o in self.objects])
            if self.objects
            else np.zeros((0, 3))
        )

    def _default_bounds(self) -> Tuple[Vec2, Vec2]:
        if not self.objects:
            h = DEFAULT_HALF_EXTENT
            return (-h, -h), (h, h)
        lo = np.min([o.aabb.lo[:2] for o in self.objects], axis=0) - 1.0
        hi = np.max([o.aabb.hi[:2] for o in self.objects], axis=0) + 1.0
        return (float(lo[0]), float(lo[1])), (float(hi[0]), float(hi[1]))

    def __len__(self) -> int:
        return len(self.objects)

    def get(self, object_id: str) -> SceneObject:
        """Object by instance id."""
        try:
            return self._by_id[object_id]
        except KeyError:
            raise KeyError(f"scene has no object '{object_id}'") from None

    def has(self, object_id: str) -> bool:
        return object_id in self._by_id

    def object_index(self, object_id: str) -> int:
        return self.objects.index(self.get(object_id))

    def by_category(self, category: str) -> List[SceneObject]:
        """Instances of a category in scene order."""
        return [o for o in self.objects if o.category == category]

    def categories(self) -> List[str]:
        return sorted({o.category for o in self.objects})

    def dynamic_objects(self) -> List[SceneObject]:
        return [o for o in self.objects if o.dynamic]

    def synopsis(self) -> List[Tuple[str, int, str]]:
        """(category, count, room) triples, sorted."""
        counts = Counter((o.category, o.room or "") for o in self.objects)
        return sorted((cat, n, room) for (cat, room), n in counts.items())

    def contains_xy(self, xy: Sequence[float]) -> bool:
        lo, hi = self.bounds
        return lo[0] <= xy[0] <= hi[0] and lo[1] <= xy[1] <= hi[1]

    def clearance_ok(self, xy: Sequence[float], clearance: float) -> bool:
        """True when a disk at xy stays clear of every object footprint."""
        for obj in self.objects:
            if obj.aabb.footprint_distance(xy) <= clearance:
                return False
        return True


# Loading


def load_ply_points(path: str) -> PointCloud:
    """Vertex positions of an ASCII PLY file."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise HarnessIOError(f"cannot read {path}: {e}") from e
    if not lines or lines[0].strip() != "ply":
        raise SceneFormatError(f"{path}: not a PLY file")
    vertex_count: Optional[int] = None
    properties: List[str] = []
    in_vertex = False
    body = 0
    for number, line in enumerate(lines[1:], start=1):
        tokens = line.split()
        if not tokens or tokens[0] == "comment":
            continue
        if tokens[0] == "format" and tokens[1] != "ascii":
            raise SceneFormatError(f"{path}: only ASCII PLY is supported")
        if tokens[0] == "element":
            in_vertex = tokens[1] == "vertex"
            if in_vertex:
                vertex_count = int(tokens[2])
        elif tokens[0] == "property" and in_vertex:
            properties.append(tokens[-1])
        elif tokens[0] == "end_header":
            body = number + 1
            break
    if vertex_count is None or not {"x", "y", "z"} <= set(properties):
        raise SceneFormatError(f"{path}: missing vertex x/y/z properties")
    cols = [properties.index(axis) for axis in ("x", "y", "z")]
    rows = lines[body : body + vertex_count]
    if len(rows) != vertex_count:
        raise SceneFormatError(f"{path}: expected {vertex_count} vertices, got {len(rows)}")
    try:
        data = np.array([[float(r.split()[c]) for c in cols] for r in rows])
    except (ValueError, IndexError) as e:
        raise SceneFormatError(f"{path}: bad vertex row ({e})") from e
    return data.reshape(-1, 3)


def _json_path(loc: Sequence[Any]) -> str:
    path = "$"
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else f".{part}"
    return path


def _build_object(spec: ObjectSpec, voxel_size: float, base_dir: str, where: str) -> SceneObject:
    if spec.geometry.box is not None:
        local_box = Aabb(spec.geometry.box.min, spec.geometry.box.max)
        local = voxelize_box(local_box, voxel_size)
        box_corners = local_box.corners()
    elif spec.geometry.points is not None:
        local = np.asarray(spec.geometry.points, dtype=np.float64).reshape(-1, 3)
        box_corners = local
    else:
        assert spec.geometry.ply is not None
        local = load_ply_points(os.path.join(base_dir, spec.geometry.ply))
        box_corners = local
    if not len(local):
        raise SceneFormatError("object has no geometry points", [f"{where}.geometry"])

    if spec.dynamic:
        assert spec.root is not None
        position: Vec3 = (spec.root.x, spec.root.y, spec.root.z)
        yaw = 0.0
    else:
        assert spec.pose is not None
        position = (spec.pose.x, spec.pose.y, 0.0)
        yaw = spec.pose.yaw
    world = transform_points(local, position, yaw)
    aabb = Aabb.from_points(transform_points(box_corners, position, yaw))

    parts: Dict[str, PointCloud] = {}
    for label, members in spec.parts.items():
        if members and isinstance(members[0], int):
            indices = np.asarray(members, dtype=np.int64)
            if indices.min() < 0 or indices.max() >= len(world):
                raise SceneFormatError(
                    "part index out of range", [f"{where}.parts.{label}"]
                )
            parts[label] = world[indices]
        else:
            pts = np.asarray(members, dtype=np.float64).reshape(-1, 3)
            parts[label] = transform_points(pts, position, yaw)
    parts.setdefault("surface", world)
    if spec.geometry.box is not None:
        parts.setdefault("top", world[top_layer(world)])

    slack = aabb.inflated(voxel_size)
    for label, pts in parts.items():
        if len(pts) and not bool(np.all(slack.contains(pts))):
            raise SceneFormatError("part outside AABB", [f"{where}.parts.{label}"])
    if spec.dynamic and float(aabb.extent.max()) > MAX_CARRY_EDGE + 1e-9:
        raise SceneFormatError(
            f"dynamic object edge {float(aabb.extent.max()):.3f} m exceeds {MAX_CARRY_EDGE} m",
            [f"{where}.geometry"],
        )
    return SceneObject(
        id=spec.id,
        category=spec.category,
        aabb=aabb,
        parts=parts,
        dynamic=spec.dynamic,
        position=(position[0], position[1]),
        yaw=yaw,
        root=position if spec.dynamic else None,
        room=spec.room,
    )


def scene_from_dict(payload: Any, base_dir: str = ".") -> Scene:
    """Validate a scene payload and build the runtime Scene."""
    try:
        spec = SceneSpec.model_validate(payload)
    except ValidationError as e:
        diagnostics = [f"{_json_path(err['loc'])}: {err['msg']}" for err in e.errors()]
        raise SceneFormatError("scene schema violation", diagnostics) from e
    if spec.v != SCHEMA_VERSION:
        raise SceneFormatError(f"unsupported scene version {spec.v}", ["$.v"])
    objects = [
        _build_object(obj, spec.voxel_size, base_dir, f"$.objects[{i}]")
        for i, obj in enumerate(spec.objects)
    ]
    bounds = (spec.bounds.min, spec.bounds.max) if spec.bounds else None
    return Scene(objects, bounds=bounds, spawn=spec.spawn, voxel_size=spec.voxel_size)


def load_scene(path: str) -> Scene:
    """Load a scene JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except OSError as e:
        logger.error(f"Failed to read scene {path}: {e}")
        raise HarnessIOError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise SceneFormatError(f"{path}: invalid JSON", [f"line {e.lineno}: {e.msg}"]) from e
    scene = scene_from_dict(payload, base_dir=os.path.dirname(os.path.abspath(path)))
    logger.info(
        f"Loaded scene {path}: {len(scene)} objects, {len(scene.index)} surface points"
    )
    return scene


def sample_spawn(
    scene: Scene, rng: np.random.Generator, clearance: float
) -> Tuple[np.ndarray, float]:
    """Uniform ground position clear of every footprint, plus a uniform yaw."""
    if clearance < 0:
        raise ValueError(f"clearance must be >= 0, got {clearance}")
    lo, hi = scene.bounds
    for _ in range(SPAWN_ATTEMPTS):
        xy = np.array([rng.uniform(lo[0], hi[0]), rng.uniform(lo[1], hi[1])])
        if scene.clearance_ok(xy, clearance):
            yaw = float(rng.uniform(0.0, 2.0 * math.pi))
            return xy, yaw
    raise SceneTooCrowdedError(SPAWN_ATTEMPTS)

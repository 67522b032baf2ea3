"""Tests for scene geometry, loading, the spatial grid and spawn sampling."""

import json
import math
import os

import numpy as np
import pytest
from scipy.spatial import cKDTree

from data_store.errors import HarnessIOError, SceneFormatError, SceneTooCrowdedError
from scene.geometry import Aabb, nearest_surface_point, voxelize_box
from scene.scene import Scene, load_scene, sample_spawn, scene_from_dict
from scene.spatial_index import SpatialGrid
from scene.synthetic import build_apartment_payload, build_box_scene, static_box


def surface_voxel_count(nx, ny, nz):
    """All voxels minus the strictly interior ones."""
    inner = max(nx - 2, 0) * max(ny - 2, 0) * max(nz - 2, 0)
    return nx * ny * nz - inner


class TestVoxelize:
    """Surface voxel centers of boxes."""

    def test_small_cube(self):
        """0.2 m cube at 0.1 m voxels: all 8 voxels are surface."""
        pts = voxelize_box(Aabb((0, 0, 0), (0.2, 0.2, 0.2)), 0.1)
        assert len(pts) == 8
        assert np.allclose(np.unique(pts[:, 0]), [0.05, 0.15])

    def test_flat_box(self):
        """A zero-height box gives a single layer."""
        pts = voxelize_box(Aabb((0, 0, 0.4), (1.0, 0.5, 0.4)), 0.1)
        assert len(pts) == 10 * 5
        assert np.all(pts[:, 2] == 0.4)

    def test_voxel_larger_than_box(self):
        """One point at the center."""
        pts = voxelize_box(Aabb((0, 0, 0), (0.05, 0.05, 0.05)), 1.0)
        assert np.allclose(pts, [[0.025, 0.025, 0.025]])

    @pytest.mark.parametrize("dims", [(1.0, 1.0, 1.0), (2.0, 0.8, 0.45), (0.3, 0.3, 1.6)])
    def test_counts_match_combinatorics(self, dims):
        """Point count equals the analytic surface-voxel count."""
        pts = voxelize_box(Aabb((0, 0, 0), dims), 0.1)
        counts = [math.ceil(d / 0.1 - 1e-9) for d in dims]
        assert len(pts) == surface_voxel_count(*counts)
        assert len(np.unique(pts, axis=0)) == len(pts)


class TestNearestSurfacePoint:
    """Exact nearest-point queries."""

    def test_stored_point(self):
        """A query on a stored point returns it at distance 0."""
        part = voxelize_box(Aabb((0, 0, 0), (1, 1, 1)), 0.1)
        point, dist = nearest_surface_point(part, part[17])
        assert np.array_equal(point, part[17])
        assert dist == 0.0

    def test_far_along_x(self):
        """A query far along +x lands on the +x face."""
        part = voxelize_box(Aabb((-0.5, -0.5, -0.5), (0.5, 0.5, 0.5)), 0.1)
        point, _ = nearest_surface_point(part, (10.0, 0.0, 0.0))
        assert point[0] == pytest.approx(0.45)

    def test_matches_kdtree(self):
        """Random queries agree with a KD-tree over the same points."""
        rng = np.random.default_rng(7)
        part = rng.uniform(-2.0, 2.0, size=(20_000, 3))
        tree = cKDTree(part)
        for q in rng.uniform(-3.0, 3.0, size=(200, 3)):
            _, dist = nearest_surface_point(part, q)
            expected, _ = tree.query(q)
            assert dist == pytest.approx(expected, abs=1e-12)

    def test_empty_part(self):
        """Empty parts are rejected."""
        with pytest.raises(ValueError):
            nearest_surface_point(np.zeros((0, 3)), (0, 0, 0))


class TestSpatialGrid:
    """Rectangle queries over bucketed points."""

    def test_rect_query_covers_brute_force(self):
        """Every point inside the rectangle is returned."""
        rng = np.random.default_rng(3)
        a = rng.uniform(0, 10, size=(500, 3))
        b = rng.uniform(0, 10, size=(300, 3))
        grid = SpatialGrid([a, b], cell=0.5)
        lo, hi = (2.2, 3.1), (4.7, 6.3)
        got = set(map(tuple, grid.points[grid.query_rect(lo, hi)]))
        both = np.concatenate([a, b])
        inside = both[
            (both[:, 0] >= lo[0]) & (both[:, 0] <= hi[0])
            & (both[:, 1] >= lo[1]) & (both[:, 1] <= hi[1])
        ]
        assert set(map(tuple, inside)) <= got
        assert len(grid) == 800
        assert set(grid.owner.tolist()) == {0, 1}

    def test_empty_grid(self):
        """Queries on an empty grid return nothing."""
        assert len(SpatialGrid([]).query_rect((0, 0), (1, 1))) == 0


class TestSceneLoading:
    """Schema validation and runtime construction."""

    def test_empty_scene(self, temp_file):
        """An empty scene file loads with a valid empty index."""
        with open(temp_file, "w", encoding="utf-8") as f:
            json.dump({"v": 1, "objects": []}, f)
        scene = load_scene(temp_file)
        assert len(scene) == 0
        assert len(scene.index) == 0

    def test_unit_box_parts(self):
        """A unit box has analytic surface and top parts."""
        scene = build_box_scene([((0.0, 0.0), (-0.5, -0.5, 0.0), (0.5, 0.5, 1.0))])
        obj = scene.get("box0")
        assert len(obj.part("surface")) == surface_voxel_count(10, 10, 10)
        assert len(obj.part("top")) == 100
        assert np.allclose(obj.part("top")[:, 2], 0.95)

    def test_malformed_yaw(self):
        """A string yaw is a schema error with a JSON path."""
        payload = {"v": 1, "objects": [static_box("a", "chair", (0, 0), (0, 0, 0), (1, 1, 1))]}
        payload["objects"][0]["pose"]["yaw"] = "north"
        with pytest.raises(SceneFormatError) as exc:
            scene_from_dict(payload)
        assert any("$.objects[0].pose.yaw" in d for d in exc.value.diagnostics)

    def test_yaw_rotates_geometry(self):
        """A quarter turn swaps the footprint extents."""
        payload = {
            "v": 1,
            "objects": [
                static_box(
                    "t", "table", (1, 1), (-1.0, -0.25, 0), (1.0, 0.25, 0.5), yaw=np.pi / 2
                )
            ],
        }
        aabb = scene_from_dict(payload).get("t").aabb
        assert aabb.extent[0] == pytest.approx(0.5)
        assert aabb.extent[1] == pytest.approx(2.0)

    def test_oversized_dynamic_object(self):
        """Carryable objects must fit in 0.5 m."""
        payload = build_apartment_payload()
        payload["objects"][-1]["geometry"]["box"] = {
            "min": [-0.4, -0.1, -0.1],
            "max": [0.4, 0.1, 0.1],
        }
        with pytest.raises(SceneFormatError):
            scene_from_dict(payload)

    def test_duplicate_ids(self):
        """Object ids are unique."""
        payload = {"v": 1, "objects": [static_box("a", "chair", (0, 0), (0, 0, 0), (1, 1, 1))] * 2}
        with pytest.raises(SceneFormatError):
            scene_from_dict(payload)

    def test_ply_geometry(self, temp_dir):
        """Point geometry can come from an ASCII PLY file next to the scene."""
        with open(os.path.join(temp_dir, "stool.ply"), "w", encoding="utf-8") as f:
            f.write(
                "ply\nformat ascii 1.0\nelement vertex 3\n"
                "property float x\nproperty float y\nproperty float z\nend_header\n"
                "0 0 0.4\n0.2 0 0.4\n0 0.2 0.4\n"
            )
        scene_path = os.path.join(temp_dir, "scene.json")
        with open(scene_path, "w", encoding="utf-8") as f:
            json.dump(
                {
                    "v": 1,
                    "objects": [
                        {
                            "id": "stool",
                            "category": "chair",
                            "pose": {"x": 1.0, "y": 2.0},
                            "geometry": {"ply": "stool.ply"},
                        }
                    ],
                },
                f,
            )
        obj = load_scene(scene_path).get("stool")
        assert len(obj.part("surface")) == 3
        assert obj.aabb.min == pytest.approx((1.0, 2.0, 0.4))

    def test_missing_file(self, temp_dir):
        """Unreadable scenes are I/O errors."""
        with pytest.raises(HarnessIOError):
            load_scene(os.path.join(temp_dir, "nope.json"))

    def test_shipped_apartment_matches_builder(self, data_dir, apartment):
        """data/scenes/apartment.json is the synthetic apartment."""
        shipped = load_scene(str(data_dir / "scenes" / "apartment.json"))
        assert [o.id for o in shipped.objects] == [o.id for o in apartment.objects]
        assert shipped.synopsis() == apartment.synopsis()
        assert shipped.spawn_hint == pytest.approx(apartment.spawn_hint)


class TestSampleSpawn:
    """Rejection-sampled spawn positions."""

    def test_empty_scene_first_sample(self):
        """With nothing to avoid, the first draw is accepted."""
        scene = Scene([])
        xy, yaw = sample_spawn(scene, np.random.default_rng(11), clearance=0.4)
        rng = np.random.default_rng(11)
        (lo, hi) = scene.bounds
        assert xy[0] == rng.uniform(lo[0], hi[0])
        assert xy[1] == rng.uniform(lo[1], hi[1])
        assert yaw == rng.uniform(0.0, 2.0 * np.pi)

    def test_covered_scene_is_infeasible(self):
        """A box over the whole floor leaves no spawn."""
        scene = build_box_scene(
            [((0.0, 0.0), (-5.0, -5.0, 0.0), (5.0, 5.0, 0.2))],
            voxel_size=0.5,
            bounds=((-4.0, -4.0), (4.0, 4.0)),
        )
        with pytest.raises(SceneTooCrowdedError):
            sample_spawn(scene, np.random.default_rng(0), clearance=0.1)

    def test_reproducible_and_clear(self, apartment):
        """Same seed, same spawn; the spawn keeps its clearance."""
        a = sample_spawn(apartment, np.random.default_rng(5), 0.4)
        b = sample_spawn(apartment, np.random.default_rng(5), 0.4)
        assert np.array_equal(a[0], b[0]) and a[1] == b[1]
        assert apartment.clearance_ok(a[0], 0.4)

"""Tests for success rate, contact error, APD, FID and script diversity."""

import csv
import math
import os

import numpy as np
import pytest
from scipy import linalg

from agents.script_planner import LongScript
from data_store.errors import MetricInputError
from data_store.models import Keyframe
from fsm.executor import run_episode
from fsm.state import ExecutionTrace, KeyframeOutcome
from metrics.diversity import script_diversity, script_text
from metrics.evaluation import (
    CSV_FIELDS,
    contact_error,
    evaluate_traces,
    success_rate,
    write_skill_csv,
)
from metrics.motion import (
    GaussianStats,
    apd,
    fid,
    frechet_distance,
    gaussian_stats,
    motion_features,
)
from scene.scene import Scene
from skills.character import JOINT_ORDER
from skills.kinematic import build_kinematic_registry


def outcomes_trace(*outcomes):
    """Trace holding only keyframe outcomes given as (skill, success, error)."""
    return ExecutionTrace(
        outcomes=[
            KeyframeOutcome(index=i, skill=skill, success=ok, error=err, ticks=10)
            for i, (skill, ok, err) in enumerate(outcomes)
        ]
    )


class FixedProvider:
    """Embedding provider over a fixed text-to-vector table."""

    def __init__(self, table):
        self.table = {k: np.asarray(v, dtype=np.float64) for k, v in table.items()}

    def dim(self):
        return len(next(iter(self.table.values())))

    def embed(self, text):
        return self.table[text].copy()


@pytest.fixture
def walk_traces(cfg):
    script = LongScript(keyframes=[Keyframe(skill="walk")])
    registry = build_kinematic_registry(cfg)
    return [run_episode(Scene([]), script, cfg, registry, seed) for seed in range(3)]


class TestSuccessAndContactError:
    """Per-skill counting."""

    def test_rate(self):
        """97 of 100 sits."""
        trace = outcomes_trace(*([("sit", True, 0.01)] * 97 + [("sit", False, 0.5)] * 3))
        assert success_rate([trace]) == {"sit": 97.0}

    def test_absent_skills_omitted(self):
        """Skills never attempted do not appear."""
        rates = success_rate([outcomes_trace(("walk", True, 0.1), ("reach", False, 0.3))])
        assert rates == {"reach": 0.0, "walk": 100.0}

    def test_contact_error_mean(self):
        """0.02 and 0.04 average to 0.03 across traces."""
        traces = [outcomes_trace(("sit", True, 0.02)), outcomes_trace(("sit", True, 0.04))]
        assert contact_error(traces, "sit") == pytest.approx(0.03)

    def test_contact_error_needs_attempts(self):
        """No attempts of the skill."""
        with pytest.raises(MetricInputError):
            contact_error([outcomes_trace(("sit", True, 0.02))], "lie")


class TestApd:
    """Average pairwise distance."""

    def test_examples(self):
        """Identical samples and the 0/1 pair."""
        x = np.arange(6.0).reshape(3, 2)
        assert apd([x, x.copy()]) == 0.0
        assert apd([np.array([0.0]), np.array([1.0])]) == pytest.approx(1.0)

    def test_truncates_to_shortest(self):
        """Longer samples are cut to the common length."""
        assert apd([np.zeros((5, 2)), np.ones((3, 2))]) == pytest.approx(math.sqrt(6.0))

    def test_permutation_and_scaling(self):
        """Order does not matter; uniform scaling scales the result."""
        rng = np.random.default_rng(0)
        samples = [rng.normal(size=(8, 4)) for _ in range(5)]
        base = apd(samples)
        assert apd(samples[::-1]) == pytest.approx(base)
        assert apd([2.5 * s for s in samples]) == pytest.approx(2.5 * base)

    def test_rejects_bad_input(self):
        """Fewer than two samples or mismatched feature dims."""
        with pytest.raises(MetricInputError):
            apd([np.zeros((3, 2))])
        with pytest.raises(MetricInputError):
            apd([np.zeros((3, 2)), np.zeros((3, 4))])


class TestFid:
    """Frechet distance between fitted Gaussians."""

    def test_unit_gaussians(self):
        """mu 0 vs mu 1, sigma 1 both."""
        a = GaussianStats(np.array([0.0]), np.array([[1.0]]))
        b = GaussianStats(np.array([1.0]), np.array([[1.0]]))
        assert frechet_distance(a, b) == pytest.approx(1.0, abs=1e-6)

    def test_identical_sets(self):
        """fid(A, A) vanishes."""
        x = np.random.default_rng(1).normal(size=(200, 6))
        assert fid(x, x) < 1e-6

    def test_symmetric(self):
        """fid(A, B) == fid(B, A)."""
        rng = np.random.default_rng(2)
        a, b = rng.normal(size=(100, 5)), rng.normal(1.0, 2.0, size=(120, 5))
        assert fid(a, b) == pytest.approx(fid(b, a), abs=1e-9)

    def test_one_dimensional_closed_form(self):
        """(mu_a - mu_b)^2 + (s_a - s_b)^2 for fitted 1-D samples."""
        rng = np.random.default_rng(3)
        for _ in range(100):
            a = rng.normal(rng.uniform(-3, 3), rng.uniform(0.1, 3), size=50)
            b = rng.normal(rng.uniform(-3, 3), rng.uniform(0.1, 3), size=40)
            expected = (a.mean() - b.mean()) ** 2 + (a.std(ddof=1) - b.std(ddof=1)) ** 2
            assert fid(a, b) == pytest.approx(expected, abs=1e-9)

    def test_matches_sqrtm_oracle(self):
        """Random SPD pairs agree with a general matrix square root."""
        rng = np.random.default_rng(4)
        for _ in range(50):
            m = rng.normal(size=(4, 4))
            n = rng.normal(size=(4, 4))
            sa, sb = m @ m.T + 0.1 * np.eye(4), n @ n.T + 0.1 * np.eye(4)
            mu_a, mu_b = rng.normal(size=4), rng.normal(size=4)
            covmean = linalg.sqrtm(sa @ sb).real
            expected = float(
                np.sum((mu_a - mu_b) ** 2) + np.trace(sa) + np.trace(sb) - 2 * np.trace(covmean)
            )
            got = frechet_distance(GaussianStats(mu_a, sa), GaussianStats(mu_b, sb))
            assert got == pytest.approx(expected, rel=1e-6, abs=1e-6)
            assert got >= 0.0

    def test_small_sample_regularized(self):
        """Fewer frames than dim + 1 still gives a finite covariance."""
        stats = gaussian_stats(np.ones((2, 5)))
        assert np.allclose(stats.sigma, 1e-6 * np.eye(5))

    def test_rejects_bad_input(self):
        """Dimension mismatch, empty and non-finite sets."""
        with pytest.raises(MetricInputError):
            fid(np.zeros((10, 3)), np.zeros((10, 4)))
        with pytest.raises(MetricInputError):
            gaussian_stats(np.zeros((0, 3)))
        with pytest.raises(MetricInputError):
            gaussian_stats(np.array([[0.0, np.nan]]))


class TestDiversity:
    """Mean pairwise cosine similarity of script texts."""

    def test_identical_texts(self, provider):
        """Two copies of one text."""
        assert script_diversity(["sit on the sofa"] * 2, provider) == pytest.approx(1.0)

    def test_mean_of_pairs(self):
        """Pairwise similarities 0.2, 0.4 and 0.6 average to 0.4."""
        gram = np.array([[1.0, 0.2, 0.4], [0.2, 1.0, 0.6], [0.4, 0.6, 1.0]])
        rows = np.linalg.cholesky(gram)
        provider = FixedProvider(dict(zip("abc", rows)))
        assert script_diversity(["a", "b", "c"], provider) == pytest.approx(0.4)

    def test_needs_two_texts(self, provider):
        """A single text has no pairs."""
        with pytest.raises(MetricInputError):
            script_diversity(["alone"], provider)

    def test_script_text(self):
        """Prose wins; otherwise keyframes are spelled out."""
        script = LongScript(
            keyframes=[
                Keyframe(skill="walk", caption="slowly"),
                Keyframe(skill="sit", object_ref="sofa", caption="slump"),
            ]
        )
        assert script_text(script) == "walk slowly; sit sofa slump"
        assert script_text(script.model_copy(update={"prose": "A long day."})) == "A long day."


class TestEvaluateTraces:
    """Full evaluation over executed traces."""

    def test_features(self, walk_traces):
        """Quaternion and root-relative position per joint, per frame."""
        features = motion_features(walk_traces[0])
        assert features.shape == (walk_traces[0].ticks, len(JOINT_ORDER) * 7)
        assert motion_features(ExecutionTrace()).shape == (0, len(JOINT_ORDER) * 7)

    def test_report(self, walk_traces, provider):
        """Kinematic walks all succeed; self-reference FID vanishes."""
        report = evaluate_traces(walk_traces, reference=walk_traces, provider=provider)
        assert report.episodes == 3
        assert report.success_rate == {"walk": 100.0}
        assert report.attempts == {"walk": 3}
        assert report.contact_error["walk"] <= 0.2
        assert report.apd is not None and report.apd > 0.0
        assert report.fid == pytest.approx(0.0, abs=1e-6)
        assert report.diversity is None

    def test_without_reference(self, walk_traces):
        """No reference set, no FID."""
        report = evaluate_traces(walk_traces[:1])
        assert report.fid is None
        assert report.apd is None

    def test_empty(self):
        """Nothing to evaluate."""
        with pytest.raises(MetricInputError):
            evaluate_traces([])

    def test_csv(self, temp_dir):
        """One row per attempted skill."""
        traces = [
            outcomes_trace(("sit", True, 0.02), ("walk", True, 0.1)),
            outcomes_trace(("sit", False, 0.04)),
        ]
        path = os.path.join(temp_dir, "skills.csv")
        write_skill_csv(traces, path)
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            rows = list(reader)
            assert reader.fieldnames == CSV_FIELDS
        assert [r["skill"] for r in rows] == ["sit", "walk"]
        assert rows[0]["attempts"] == "2"
        assert rows[0]["successes"] == "1"
        assert rows[0]["success_rate"] == "50.00"
        assert float(rows[0]["contact_error"]) == pytest.approx(0.03)

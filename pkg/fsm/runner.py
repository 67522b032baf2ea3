"""Run many seeded episodes, serially or over a process pool."""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence

import psutil

from agents.script_planner import LongScript
from embedding.providers import build_embedding_provider
from fsm.executor import run_episode
from fsm.state import ExecutionTrace
from scene.scene import Scene
from skills.kinematic import build_kinematic_registry
from skills.policy import PolicyRegistry
from tasks.config import EpisodeConfig

logger = logging.getLogger(__name__)

RegistryFactory = Callable[[EpisodeConfig], PolicyRegistry]

# Per-worker episode context, installed by _init_worker.
_WORKER: dict = {}


def default_workers() -> int:
    """Physical core count, falling back to logical cores, at least 1."""
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


def _init_worker(
    scene: Scene,
    script: LongScript,
    cfg: EpisodeConfig,
    factory: RegistryFactory,
    embedding_endpoint: str = "",
) -> None:
    _WORKER.update(
        scene=scene,
        script=script,
        cfg=cfg,
        factory=factory,
        provider=build_embedding_provider(
            cfg.embed_dim, cfg.embed_seed, embedding_endpoint
        ),
    )


def _run_seed(seed: int) -> ExecutionTrace:
    cfg = _WORKER["cfg"]
    return run_episode(
        _WORKER["scene"],
        _WORKER["script"],
        cfg,
        _WORKER["factory"](cfg),
        seed,
        provider=_WORKER["provider"],
    )


def run_episodes(
    scene: Scene,
    script: LongScript,
    cfg: EpisodeConfig,
    seeds: Sequence[int],
    parallel: Optional[int] = None,
    registry_factory: RegistryFactory = build_kinematic_registry,
    embedding_endpoint: str = "",
) -> List[ExecutionTrace]:
    """One trace per seed, in seed order; parallel <= 1 runs in-process.

    Every worker embeds style text with the provider given by
    cfg.embed_dim, cfg.embed_seed and the optional embedding endpoint.
    """
    workers = default_workers() if parallel is None else parallel
    workers = max(1, min(workers, len(seeds) or 1))
    logger.info(f"Running {len(seeds)} episodes on {workers} worker(s)")
    if workers == 1:
        _init_worker(scene, script, cfg, registry_factory, embedding_endpoint)
        try:
            return [_run_seed(seed) for seed in seeds]
        finally:
            _WORKER.clear()
    with ProcessPoolExecutor(
        max_workers=workers,
        initializer=_init_worker,
        initargs=(scene, script, cfg, registry_factory, embedding_endpoint),
    ) as pool:
        return list(pool.map(_run_seed, seeds))

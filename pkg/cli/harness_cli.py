"""Command-line entry point: build-db, plan, simulate and evaluate."""

import argparse
import glob
import json
import logging
import os
import sys
import time
from typing import Dict, List, Optional, Sequence

from dotenv import load_dotenv

from agents.base_agent import configure_logging
from agents.direct_planner import DirectPlannerAgent
from agents.narrative import NarrativeProvider
from agents.script_planner import (
    DEFAULT_K,
    DEFAULT_M,
    LongScript,
    ScriptPlannerAgent,
    load_long_script,
    save_long_script,
)
from cli.manifest import RunManifest, write_manifest
from data_store.errors import (
    HarnessError,
    MetricInputError,
    ProviderError,
    ScriptValidationError,
    UnsatisfiablePlanError,
    exit_code_for,
)
from data_store.script_store import (
    atomic_write_text,
    build_database,
    load_db,
    load_short_scripts,
    save_db,
)
from embedding.providers import EmbeddingProvider, build_embedding_provider
from embedding.vectors import DEFAULT_DIM
from fsm.runner import run_episodes
from fsm.seeding import episode_seeds
from fsm.state import ExecutionTrace, TerminationReason, load_trace, save_trace
from metrics.evaluation import evaluate_traces, write_skill_csv
from scene.scene import load_scene
from tasks.config import EpisodeConfig, episode_config_from_dict, load_episode_config

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

TRACE_PATTERN = "trace-*.jsonl"


def trace_filename(seed: int) -> str:
    """File name of the trace recorded for one seed."""
    return f"trace-{seed:06d}.jsonl"


def load_trace_dir(directory: str) -> List[ExecutionTrace]:
    """Every trace file in a directory, in file-name order."""
    paths = sorted(glob.glob(os.path.join(directory, TRACE_PATTERN)))
    if not paths:
        raise MetricInputError(f"no trace files in {directory}")
    return [load_trace(path) for path in paths]


class HarnessCLI:
    """Command-line interface for the scene-interaction harness."""

    def __init__(self, args: argparse.Namespace):
        """Initialize the CLI from parsed arguments."""
        self.args = args

    def embedding_dim(self) -> int:
        return DEFAULT_DIM if self.args.dim is None else self.args.dim

    def embedding_seed(self) -> int:
        return 0 if self.args.embed_seed is None else self.args.embed_seed

    def embedding_endpoint(self) -> str:
        return self.args.embedding_endpoint or os.getenv("EMBEDDING_ENDPOINT_URL", "")

    def embedding_provider(self) -> EmbeddingProvider:
        """Provider selected by --dim, --embed-seed and --embedding-endpoint."""
        return build_embedding_provider(
            self.embedding_dim(), self.embedding_seed(), self.embedding_endpoint()
        )

    def narrative_provider(self) -> Optional[NarrativeProvider]:
        """HTTP or LLM narrator when configured; None means the deterministic fallback."""
        if getattr(self.args, "no_llm", False):
            return None
        try:
            if os.getenv("NARRATIVE_ENDPOINT_URL"):
                from protocols.narrative_client import HttpNarrativeProvider

                return HttpNarrativeProvider()
            if os.getenv("LLM_MODEL"):
                from protocols.llm_narrator import LiteLlmNarrativeProvider

                return LiteLlmNarrativeProvider()
        except ProviderError as e:
            logger.warning(f"Narrative provider unavailable ({e}); using deterministic narrator")
        return None

    def handle_build_db(self) -> int:
        """Validate, embed and persist a JSON array of short scripts."""
        scripts = load_short_scripts(self.args.scripts)
        db = build_database(scripts, self.embedding_provider())
        save_db(db, self.args.output)
        write_manifest(
            RunManifest(
                command="build-db",
                output=self.args.output,
                inputs={"scripts": self.args.scripts},
                options={"dim": self.embedding_dim(), "embed_seed": self.embedding_seed()},
            )
        )
        print(f"✓ Stored {len(db)} short scripts in {self.args.output}")
        for style, count in sorted(db.style_counts().items()):
            print(f"  {style:<10} {count}")
        return 0

    def handle_plan(self) -> int:
        """Plan a long script for a theme and write it as JSON."""
        scene = load_scene(self.args.scene)
        if self.args.direct:
            method = "direct"
            agent = DirectPlannerAgent(
                self.embedding_provider(), self.narrative_provider()
            )
            inputs = {"scene": self.args.scene}
        else:
            method = "rasg"
            agent = ScriptPlannerAgent(
                load_db(self.args.db),
                self.embedding_provider(),
                self.narrative_provider(),
                m=self.args.m,
                k=self.args.k,
            )
            inputs = {"db": self.args.db, "scene": self.args.scene}
        start = time.perf_counter()
        script = agent.plan(self.args.theme, scene)
        elapsed = time.perf_counter() - start
        save_long_script(script, self.args.output)
        write_manifest(
            RunManifest(
                command="plan",
                output=self.args.output,
                seed=self.args.seed,
                inputs=inputs,
                options={
                    "theme": self.args.theme,
                    "method": method,
                    "m": self.args.m,
                    "k": self.args.k,
                    "no_llm": self.args.no_llm,
                    "dim": self.embedding_dim(),
                    "embed_seed": self.embedding_seed(),
                    "generation_time_s": round(elapsed, 6),
                },
            )
        )
        print(
            f"✓ Planned {len(script.keyframes)} keyframes ({method}, {elapsed:.3f}s) "
            f"-> {self.args.output}"
        )
        self.print_keyframes(script)
        return 0

    def print_keyframes(self, script: LongScript) -> None:
        """Print the keyframe table of a long script."""
        print("-" * 72)
        for i, kf in enumerate(script.keyframes):
            style = kf.style.value if kf.style else "-"
            bound = script.scene_binding.get(i, "-")
            print(f"{i:>3}  {kf.skill.value:<6} {bound:<14} {style:<9} {kf.caption or ''}")
        print("-" * 72)

    def episode_config(self) -> EpisodeConfig:
        """Config file, with --dim and --embed-seed overriding its embedding fields."""
        cfg = load_episode_config(self.args.config) if self.args.config else EpisodeConfig()
        overrides: Dict[str, int] = {}
        if self.args.dim is not None:
            overrides["embed_dim"] = self.args.dim
        if self.args.embed_seed is not None:
            overrides["embed_seed"] = self.args.embed_seed
        if not overrides:
            return cfg
        return episode_config_from_dict({**cfg.model_dump(), **overrides})

    def handle_simulate(self) -> int:
        """Run seeded episodes and write one trace file per episode."""
        scene = load_scene(self.args.scene)
        script = load_long_script(self.args.script)
        cfg = self.episode_config()
        seeds = episode_seeds(self.args.seed, self.args.episodes)
        traces = run_episodes(
            scene,
            script,
            cfg,
            seeds,
            parallel=self.args.parallel,
            embedding_endpoint=self.embedding_endpoint(),
        )

        os.makedirs(self.args.output, exist_ok=True)
        infeasible = 0
        for trace in traces:
            save_trace(trace, os.path.join(self.args.output, trace_filename(trace.seed)))
            succeeded = sum(o.success for o in trace.outcomes)
            line = (
                f"seed {trace.seed}: {trace.termination.value} after {trace.ticks} ticks, "
                f"{succeeded}/{len(trace.outcomes)} keyframes"
            )
            if trace.termination == TerminationReason.INFEASIBLE:
                infeasible += 1
                print(f"✗ {line}")
            else:
                print(f"✓ {line}")

        write_manifest(
            RunManifest(
                command="simulate",
                output=self.args.output,
                seed=self.args.seed,
                config_path=self.args.config,
                inputs={"scene": self.args.scene, "script": self.args.script},
                options={
                    "episodes": self.args.episodes,
                    "parallel": self.args.parallel,
                    "dim": cfg.embed_dim,
                    "embed_seed": cfg.embed_seed,
                },
            )
        )
        print(f"Wrote {len(traces)} traces to {self.args.output} ({infeasible} infeasible)")
        return 0

    def handle_evaluate(self) -> int:
        """Compute the metrics report over a directory of traces."""
        traces = load_trace_dir(self.args.traces)
        reference = load_trace_dir(self.args.reference) if self.args.reference else None
        report = evaluate_traces(traces, reference, self.embedding_provider())
        text = json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True)
        if self.args.output:
            atomic_write_text(self.args.output, text + "\n")
            write_manifest(
                RunManifest(
                    command="evaluate",
                    output=self.args.output,
                    inputs={
                        "traces": self.args.traces,
                        **({"reference": self.args.reference} if self.args.reference else {}),
                    },
                )
            )
            print(f"✓ Report written to {self.args.output}")
        else:
            print(text)
        if self.args.csv:
            write_skill_csv(traces, self.args.csv)
            print(f"✓ Per-skill CSV written to {self.args.csv}")
        return 0

    def run(self) -> int:
        """Dispatch to the selected subcommand and map errors to exit codes."""
        handlers = {
            "build-db": self.handle_build_db,
            "plan": self.handle_plan,
            "simulate": self.handle_simulate,
            "evaluate": self.handle_evaluate,
        }
        try:
            return handlers[self.args.command]()
        except ScriptValidationError as e:
            print(f"✗ {e}")
            for violation in e.violations:
                print(f"  {violation}")
            return exit_code_for(e)
        except UnsatisfiablePlanError as e:
            print(f"✗ {e}")
            print(f"  missing categories: {', '.join(e.missing_categories) or '-'}")
            return exit_code_for(e)
        except (HarnessError, OSError) as e:
            logger.error(f"{self.args.command} failed: {e}")
            print(f"✗ {e}")
            return exit_code_for(e)
        except ValueError as e:
            logger.error(f"{self.args.command} rejected its arguments: {e}")
            print(f"✗ {e}")
            return 1


def _add_provider_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--dim", type=int, default=None, help=f"Embedding dimension (default {DEFAULT_DIM})"
    )
    parser.add_argument(
        "--embed-seed", type=int, default=None, help="Embedding seed (default 0)"
    )
    parser.add_argument(
        "--embedding-endpoint", default="", help="HTTP embedding service base URL"
    )


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per pipeline stage."""
    parser = argparse.ArgumentParser(
        prog="sims-harness", description="Stylized human-scene interaction harness"
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build-db", help="Build a short-script database")
    build.add_argument("scripts", help="JSON array of short scripts")
    build.add_argument("output", help="Database file to write")
    _add_provider_flags(build)

    plan = sub.add_parser("plan", help="Plan a long script for a theme")
    plan.add_argument("db", help="Script database file (not read with --direct)")
    plan.add_argument("scene", help="Scene JSON file")
    plan.add_argument("--theme", required=True, help="Theme sentence")
    plan.add_argument("--m", type=int, default=DEFAULT_M, help="Styles to select")
    plan.add_argument("--k", type=int, default=DEFAULT_K, help="Scripts retrieved per style")
    plan.add_argument("--no-llm", action="store_true", help="Use the deterministic narrator")
    plan.add_argument(
        "--direct", action="store_true", help="Generate from the full skill list, no retrieval"
    )
    plan.add_argument("--seed", type=int, default=0, help="Recorded in the manifest")
    plan.add_argument("--output", "-o", default="long_script.json", help="Plan file")
    _add_provider_flags(plan)

    simulate = sub.add_parser("simulate", help="Run episodes of a long script")
    simulate.add_argument("scene", help="Scene JSON file")
    simulate.add_argument("script", help="Long script JSON file")
    simulate.add_argument("--config", default=None, help="Episode config JSON")
    simulate.add_argument("--episodes", type=int, default=1, help="Number of episodes")
    simulate.add_argument("--seed", type=int, default=0, help="Seed of the first episode")
    simulate.add_argument(
        "--parallel", type=int, default=None, help="Worker processes (default: physical cores)"
    )
    simulate.add_argument("--output", "-o", default="traces", help="Trace directory")
    _add_provider_flags(simulate)

    evaluate = sub.add_parser("evaluate", help="Compute metrics over traces")
    evaluate.add_argument("traces", help="Directory of trace files")
    evaluate.add_argument("--reference", default=None, help="Reference trace directory for FID")
    evaluate.add_argument("--csv", default=None, help="Per-skill CSV output")
    evaluate.add_argument("--output", "-o", default=None, help="Report JSON (default: stdout)")
    _add_provider_flags(evaluate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main function to run the harness CLI."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    cli = HarnessCLI(args)
    return cli.run()


if __name__ == "__main__":
    sys.exit(main())

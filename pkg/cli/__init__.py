"""Command-line interface for the scene-interaction harness."""

from .harness_cli import HarnessCLI, build_parser, main
from .manifest import RunManifest, write_manifest

__all__ = ["HarnessCLI", "RunManifest", "build_parser", "main", "write_manifest"]

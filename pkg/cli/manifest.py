"""Run manifests written next to every CLI output."""

import json
import logging
import os
from typing import Dict, Optional

from pydantic import BaseModel, Field

from data_store.script_store import atomic_write_text

logger = logging.getLogger(__name__)

TOOL_VERSION = "0.1.0"
MANIFEST_NAME = "manifest.json"


class RunManifest(BaseModel):
    """Inputs, seed and settings that reproduce one command's output."""

    command: str
    output: str
    seed: Optional[int] = None
    config_path: Optional[str] = None
    inputs: Dict[str, str] = Field(default_factory=dict)
    options: Dict[str, object] = Field(default_factory=dict)
    tool_version: str = TOOL_VERSION


def manifest_path(output: str) -> str:
    """manifest.json inside an output directory, else <output>.manifest.json."""
    if os.path.isdir(output):
        return os.path.join(output, MANIFEST_NAME)
    return f"{output}.manifest.json"


def write_manifest(manifest: RunManifest) -> str:
    """Write the manifest beside its output and return its path."""
    path = manifest_path(manifest.output)
    atomic_write_text(
        path, json.dumps(manifest.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"
    )
    logger.debug(f"Wrote manifest {path}")
    return path

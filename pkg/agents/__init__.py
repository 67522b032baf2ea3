"""Planning agents: skill grammar, narrative providers and the two planners."""

from .base_agent import BaseAgent, configure_logging
from .direct_planner import DirectPlannerAgent, generate_direct, scene_skill_list
from .narrative import (
    Candidate,
    Composition,
    DeterministicNarrator,
    Generation,
    NarrativeProvider,
)
from .script_planner import (
    LongScript,
    ScriptPlannerAgent,
    Theme,
    assemble_long_script,
    bind_objects,
    load_long_script,
    retrieve,
    save_long_script,
    select_styles,
)
from .skill_grammar import insert_transitions, validate_skill_sequence

__all__ = [
    "BaseAgent",
    "Candidate",
    "Composition",
    "DeterministicNarrator",
    "DirectPlannerAgent",
    "Generation",
    "LongScript",
    "NarrativeProvider",
    "ScriptPlannerAgent",
    "Theme",
    "assemble_long_script",
    "bind_objects",
    "configure_logging",
    "generate_direct",
    "insert_transitions",
    "load_long_script",
    "retrieve",
    "save_long_script",
    "scene_skill_list",
    "select_styles",
    "validate_skill_sequence",
]

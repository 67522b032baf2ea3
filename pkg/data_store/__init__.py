"""Short-script data model, validation and persistence."""

from .models import (
    Keyframe,
    ShortScript,
    SkillId,
    StyleLabel,
    ValidityReport,
    modal_style,
    validate_keyframe,
    validate_short_script,
)
from .script_store import (
    ScriptDatabase,
    build_database,
    insert_script,
    load_db,
    load_short_scripts,
    query_by_style,
    save_db,
)

__all__ = [
    "Keyframe",
    "ScriptDatabase",
    "ShortScript",
    "SkillId",
    "StyleLabel",
    "ValidityReport",
    "build_database",
    "insert_script",
    "load_db",
    "load_short_scripts",
    "modal_style",
    "query_by_style",
    "save_db",
    "validate_keyframe",
    "validate_short_script",
]

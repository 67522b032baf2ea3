"""Short-script database with embedding keys and JSON-lines persistence."""

import base64
import json
import logging
import os
import tempfile
import threading
from typing import (
    TYPE_CHECKING,
    Any,
    Dict,
    Iterator,
    List,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from data_store.errors import HarnessIOError, ScriptDbFormatError, ScriptValidationError
from data_store.models import ShortScript, StyleLabel, validate_short_script
from embedding.vectors import UNIT_TOLERANCE, EmbeddingVector, normalize

if TYPE_CHECKING:
    from embedding.providers import EmbeddingProvider

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DB_FORMAT = "sims-script-db"
ID_PREFIX = "sc-"


def encode_key(key: EmbeddingVector) -> str:
    """Base64 of the little-endian float64 bytes."""
    return base64.b64encode(np.asarray(key, dtype="<f8").tobytes()).decode("ascii")


def decode_key(text: str) -> EmbeddingVector:
    """Inverse of encode_key."""
    raw = base64.b64decode(text.encode("ascii"), validate=True)
    if len(raw) == 0 or len(raw) % 8:
        raise ValueError(f"key has {len(raw)} bytes, not a float64 vector")
    return np.frombuffer(raw, dtype="<f8").astype(np.float64)


class ScriptDatabase:
    """Short scripts keyed by summary embeddings and partitioned by style."""

    def __init__(self) -> None:
        """Initialize an empty database."""
        self.scripts: Dict[str, ShortScript] = {}
        self.keys: Dict[str, EmbeddingVector] = {}
        self.style_index: Dict[StyleLabel, List[str]] = {s: [] for s in StyleLabel}
        self._next_serial = 1
        self._lock = threading.RLock()

    def __len__(self) -> int:
        return len(self.scripts)

    def __iter__(self) -> Iterator[ShortScript]:
        return iter(list(self.scripts.values()))

    def __contains__(self, script_id: object) -> bool:
        return script_id in self.scripts

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScriptDatabase):
            return NotImplemented
        if list(self.scripts) != list(other.scripts):
            return False
        for script_id, script in self.scripts.items():
            if script != other.scripts[script_id]:
                return False
            mine, theirs = self.keys[script_id], other.keys[script_id]
            if mine.shape != theirs.shape or mine.tobytes() != theirs.tobytes():
                return False
        return True

    def ids(self) -> List[str]:
        """All ids in insertion order."""
        return list(self.scripts)

    def get(self, script_id: str) -> ShortScript:
        """Look up a script by id."""
        try:
            return self.scripts[script_id]
        except KeyError:
            raise KeyError(f"unknown script id: {script_id}") from None

    def dim(self) -> Optional[int]:
        """Key dimension, or None for an empty database."""
        for key in self.keys.values():
            return int(key.shape[0])
        return None

    def _allocate_id(self) -> str:
        while True:
            candidate = f"{ID_PREFIX}{self._next_serial:06d}"
            self._next_serial += 1
            if candidate not in self.scripts:
                return candidate

    def _add(self, script: ShortScript, key: EmbeddingVector) -> None:
        assert script.id is not None
        self.scripts[script.id] = script
        self.keys[script.id] = key
        self.style_index[script.style_label].append(script.id)
        if script.id.startswith(ID_PREFIX) and script.id[len(ID_PREFIX):].isdigit():
            self._next_serial = max(
                self._next_serial, int(script.id[len(ID_PREFIX):]) + 1
            )

    def insert_script(self, script: ShortScript, provider: "EmbeddingProvider") -> str:
        """Validate, embed the summary and store; returns the new id."""
        report = validate_short_script(script)
        if not report.ok:
            raise ScriptValidationError("invalid short script", report.violations)
        try:
            key = normalize(provider.embed(script.summary))
        except Exception as e:
            logger.error(f"Embedding failed for summary '{script.summary}': {e}")
            raise
        expected_dim = self.dim()
        if expected_dim is not None and key.shape[0] != expected_dim:
            raise ScriptValidationError(
                "embedding dimension mismatch",
                [f"key dim {key.shape[0]} != database dim {expected_dim}"],
            )
        with self._lock:
            if script.id is not None and script.id in self.scripts:
                raise ScriptValidationError(
                    "invalid short script", [f"id: duplicate '{script.id}'"]
                )
            script_id = script.id if script.id is not None else self._allocate_id()
            stored = script.model_copy(update={"id": script_id}, deep=True)
            self._add(stored, key)
        logger.debug(f"Inserted script {script_id} ({stored.style_label.value})")
        return script_id

    def query_by_style(self, style: StyleLabel) -> List[str]:
        """Ids with the given style label, in insertion order."""
        return list(self.style_index.get(style, []))

    def key_matrix(self, style: StyleLabel) -> Tuple[List[str], np.ndarray]:
        """Ids of one style bucket and their stacked keys."""
        ids = self.query_by_style(style)
        if not ids:
            return [], np.zeros((0, self.dim() or 0), dtype=np.float64)
        return ids, np.stack([self.keys[i] for i in ids])

    def style_counts(self) -> Dict[str, int]:
        """Number of scripts per style label."""
        return {style.value: len(ids) for style, ids in self.style_index.items()}


def insert_script(
    db: ScriptDatabase, script: ShortScript, provider: "EmbeddingProvider"
) -> str:
    """Insert a script into db; see ScriptDatabase.insert_script."""
    return db.insert_script(script, provider)


def query_by_style(db: ScriptDatabase, style: StyleLabel) -> List[str]:
    """Ids with the given style label, in insertion order."""
    return db.query_by_style(style)


def build_database(
    scripts: Sequence[ShortScript], provider: "EmbeddingProvider"
) -> ScriptDatabase:
    """Validate every script first, then insert them all."""
    diagnostics = []
    for index, script in enumerate(scripts):
        report = validate_short_script(script)
        for violation in report.violations:
            diagnostics.append(f"record[{index}] {violation}")
    if diagnostics:
        raise ScriptValidationError("invalid short scripts", diagnostics)
    db = ScriptDatabase()
    for script in scripts:
        db.insert_script(script, provider)
    logger.info(f"Built script database with {len(db)} scripts")
    return db


def _record_for(db: ScriptDatabase, script_id: str) -> Dict[str, Any]:
    record = db.scripts[script_id].to_record()
    record["key_b64"] = encode_key(db.keys[script_id])
    record["v"] = SCHEMA_VERSION
    return record


def atomic_write_text(path: str, text: str) -> None:
    """Write a file through a temporary sibling and rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


class DbHeader(BaseModel):
    """First line of a database file: record count and key dimension."""

    model_config = ConfigDict(extra="forbid")

    format: str = DB_FORMAT
    v: int = SCHEMA_VERSION
    count: int = Field(ge=0)
    dim: Optional[int] = Field(default=None, ge=2)


def save_db(db: ScriptDatabase, path: str) -> None:
    """Persist db as a header line followed by one JSON object per script."""
    header = DbHeader(count=len(db), dim=db.dim())
    lines = [json.dumps(header.model_dump(), sort_keys=True)]
    lines += [
        json.dumps(_record_for(db, script_id), ensure_ascii=False, sort_keys=True)
        for script_id in db.ids()
    ]
    try:
        atomic_write_text(path, "".join(line + "\n" for line in lines))
    except OSError as e:
        logger.error(f"Failed to save script database to {path}: {e}")
        raise HarnessIOError(f"cannot write {path}: {e}") from e
    logger.info(f"Saved {len(db)} scripts to {path}")


def _parse_record(path: str, line_number: int, line: str) -> Tuple[ShortScript, EmbeddingVector]:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as e:
        raise ScriptDbFormatError(path, line_number, f"invalid JSON ({e.msg})") from e
    if not isinstance(record, dict):
        raise ScriptDbFormatError(path, line_number, "record is not an object")
    version = record.pop("v", None)
    if version != SCHEMA_VERSION:
        raise ScriptDbFormatError(
            path, line_number, f"schema version {version!r}, expected {SCHEMA_VERSION}"
        )
    key_text = record.pop("key_b64", None)
    if not isinstance(key_text, str):
        raise ScriptDbFormatError(path, line_number, "missing key_b64")
    try:
        key = decode_key(key_text)
    except ValueError as e:
        raise ScriptDbFormatError(path, line_number, f"bad key_b64 ({e})") from e
    if abs(float(np.linalg.norm(key)) - 1.0) > UNIT_TOLERANCE:
        raise ScriptDbFormatError(path, line_number, "key is not unit-norm")
    try:
        script = ShortScript.model_validate(record)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise ScriptDbFormatError(
            path, line_number, f"bad record at {location}: {first['msg']}"
        ) from e
    if not script.id:
        raise ScriptDbFormatError(path, line_number, "missing id")
    report = validate_short_script(script)
    if not report.ok:
        raise ScriptDbFormatError(path, line_number, "; ".join(report.violations))
    return script, key


def _parse_header(path: str, line: str) -> DbHeader:
    try:
        header = DbHeader.model_validate(json.loads(line))
    except (json.JSONDecodeError, ValidationError) as e:
        raise ScriptDbFormatError(path, 1, "missing or malformed header") from e
    if header.format != DB_FORMAT:
        raise ScriptDbFormatError(path, 1, f"not a script database ({header.format!r})")
    if header.v != SCHEMA_VERSION:
        raise ScriptDbFormatError(
            path, 1, f"schema version {header.v!r}, expected {SCHEMA_VERSION}"
        )
    if header.count and header.dim is None:
        raise ScriptDbFormatError(path, 1, "header lacks the key dimension")
    return header


def load_db(path: str) -> ScriptDatabase:
    """Read a database written by save_db.

    The header's record count and key dimension must match the records, so a
    file cut short at a line boundary is rejected.
    """
    db = ScriptDatabase()
    header: Optional[DbHeader] = None
    last_line = 0
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                last_line = line_number
                if header is None:
                    header = _parse_header(path, line)
                    continue
                if not line.strip():
                    continue
                script, key = _parse_record(path, line_number, line)
                if script.id in db.scripts:
                    raise ScriptDbFormatError(
                        path, line_number, f"duplicate id '{script.id}'"
                    )
                if key.shape[0] != header.dim:
                    raise ScriptDbFormatError(
                        path, line_number, f"key dim {key.shape[0]} != {header.dim}"
                    )
                db._add(script, key)
    except OSError as e:
        logger.error(f"Failed to read script database {path}: {e}")
        raise HarnessIOError(f"cannot read {path}: {e}") from e
    if header is None:
        raise ScriptDbFormatError(path, 1, "missing or malformed header")
    if len(db) != header.count:
        raise ScriptDbFormatError(
            path, last_line, f"header promises {header.count} records, found {len(db)}"
        )
    logger.info(f"Loaded {len(db)} scripts from {path}")
    return db


def load_short_scripts(path: str) -> List[ShortScript]:
    """Read a JSON array of short-script records."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except OSError as e:
        raise HarnessIOError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise HarnessIOError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    if not isinstance(payload, list):
        raise ScriptValidationError(f"{path}: expected a JSON array of scripts")
    scripts, diagnostics = [], []
    for index, record in enumerate(payload):
        try:
            scripts.append(ShortScript.model_validate(record))
        except ValidationError as e:
            for err in e.errors():
                location = ".".join(str(part) for part in err["loc"])
                diagnostics.append(f"record[{index}] {location}: {err['msg']}")
    if diagnostics:
        raise ScriptValidationError("malformed short scripts", diagnostics)
    return scripts

"""Episode configuration."""

import json
import logging
from typing import Any, Dict

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from data_store.errors import ConfigError, HarnessIOError
from data_store.models import SkillId

logger = logging.getLogger(__name__)


class Thresholds(BaseModel):
    """Success distances in meters."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    sit: float = Field(default=0.20, gt=0)
    reach: float = Field(default=0.20, gt=0)
    lie: float = Field(default=0.30, gt=0)
    carry: float = Field(default=0.20, gt=0)
    loco: float = Field(default=0.20, gt=0)
    getup: float = Field(default=0.10, gt=0)

    def for_skill(self, skill: SkillId) -> float:
        """Threshold that decides completion of a skill."""
        return {
            SkillId.WALK: self.loco,
            SkillId.IDLE: self.loco,
            SkillId.SIT: self.sit,
            SkillId.LIE: self.lie,
            SkillId.REACH: self.reach,
            SkillId.CARRY: self.carry,
            SkillId.GETUP: self.getup,
        }[skill]


class EpisodeConfig(BaseModel):
    """Timing, reward weights, thresholds and termination limits of an episode."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    dt: float = Field(default=1.0 / 30.0, gt=0)
    horizon: int = Field(default=300, gt=0)
    gamma: float = Field(default=0.99, ge=0, le=1)
    lambda_style: float = Field(default=0.5, ge=0)
    lambda_task: float = Field(default=0.5, ge=0)
    thresholds: Thresholds = Field(default_factory=Thresholds)
    hold_time: float = Field(default=0.5, gt=0)
    success_hold_terminate: float = Field(default=2.0, gt=0)
    max_contact_force: float = Field(default=5000.0, gt=0)
    fall_height: float = Field(default=0.3, gt=0)
    walk_speed: float = Field(default=1.5, gt=0)
    approach_speed: float = Field(default=1.5, gt=0)
    carry_speed: float = Field(default=1.5, gt=0)
    contact_speed: float = Field(default=1.0, gt=0)
    standing_height: float = Field(default=0.9, gt=0)
    spawn_clearance: float = Field(default=0.4, ge=0)
    heightmap_gating: float = Field(default=2.0, gt=0)
    idle_radius: float = Field(default=3.0, ge=0)
    style_window: int = Field(default=10, gt=0)
    embed_dim: int = Field(default=64, ge=2)
    embed_seed: int = 0
    hold_final_keyframe: bool = False

    @property
    def hold_ticks(self) -> int:
        """Ticks a success condition must hold before the cursor advances."""
        return max(1, round(self.hold_time / self.dt))

    @property
    def success_hold_ticks(self) -> int:
        """Ticks the final condition must hold for SuccessHold."""
        return max(1, round(self.success_hold_terminate / self.dt))


def episode_config_from_dict(payload: Dict[str, Any]) -> EpisodeConfig:
    """Validate a config mapping."""
    try:
        return EpisodeConfig.model_validate(payload)
    except ValidationError as e:
        problems = [
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        ]
        raise ConfigError("invalid episode config: " + "; ".join(problems)) from e


def load_episode_config(path: str) -> EpisodeConfig:
    """Read an episode config JSON file; missing keys keep their defaults."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except OSError as e:
        logger.error(f"Failed to read episode config {path}: {e}")
        raise HarnessIOError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return episode_config_from_dict(payload)

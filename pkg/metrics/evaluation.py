"""Per-skill success rate and contact error, and the full evaluation report."""

import csv
import io
import logging
from collections import defaultdict
from typing import Dict, List, Optional, Sequence

from pydantic import BaseModel, Field

from data_store.errors import MetricInputError
from data_store.script_store import atomic_write_text
from embedding.providers import EmbeddingProvider
from fsm.state import ExecutionTrace
from metrics.diversity import script_diversity, script_text
from metrics.motion import apd, fid, motion_features, pooled_features

logger = logging.getLogger(__name__)

CSV_FIELDS = ["skill", "attempts", "successes", "success_rate", "contact_error"]


class EvaluationReport(BaseModel):
    """Metrics over a set of execution traces."""

    episodes: int
    success_rate: Dict[str, float] = Field(default_factory=dict)
    contact_error: Dict[str, float] = Field(default_factory=dict)
    attempts: Dict[str, int] = Field(default_factory=dict)
    apd: Optional[float] = None
    fid: Optional[float] = None
    diversity: Optional[float] = None


def _attempts(traces: Sequence[ExecutionTrace]) -> Dict[str, List[bool]]:
    by_skill: Dict[str, List[bool]] = defaultdict(list)
    for trace in traces:
        for outcome in trace.outcomes:
            by_skill[outcome.skill].append(outcome.success)
    return by_skill


def success_rate(traces: Sequence[ExecutionTrace]) -> Dict[str, float]:
    """Percent of attempted keyframes that succeeded, per skill.

    Skills never attempted are left out rather than reported as 0%.
    """
    return {
        skill: 100.0 * sum(flags) / len(flags)
        for skill, flags in sorted(_attempts(traces).items())
        if flags
    }


def contact_error(traces: Sequence[ExecutionTrace], skill: str) -> float:
    """Mean end-of-keyframe distance to target over the attempts of one skill."""
    errors = [
        float(o.error)
        for trace in traces
        for o in trace.outcomes
        if o.skill == skill and o.error is not None
    ]
    if not errors:
        raise MetricInputError(f"no attempts of skill '{skill}'")
    return sum(errors) / len(errors)


def _contact_errors(traces: Sequence[ExecutionTrace]) -> Dict[str, float]:
    skills = sorted(
        {o.skill for t in traces for o in t.outcomes if o.error is not None}
    )
    return {skill: contact_error(traces, skill) for skill in skills}


def evaluate_traces(
    traces: Sequence[ExecutionTrace],
    reference: Optional[Sequence[ExecutionTrace]] = None,
    provider: Optional[EmbeddingProvider] = None,
) -> EvaluationReport:
    """Success, contact error, APD, FID against a reference set, and diversity.

    APD needs two non-empty traces, FID a reference set and diversity two
    distinct script texts plus a provider; otherwise they are None.
    """
    if not traces:
        raise MetricInputError("no traces to evaluate")
    attempts = _attempts(traces)
    report = EvaluationReport(
        episodes=len(traces),
        success_rate=success_rate(traces),
        contact_error=_contact_errors(traces),
        attempts={skill: len(flags) for skill, flags in sorted(attempts.items())},
    )

    samples = [f for f in (motion_features(t) for t in traces) if len(f)]
    if len(samples) >= 2:
        report.apd = apd(samples)

    if reference:
        generated = pooled_features(traces)
        real = pooled_features(reference)
        if len(generated) and len(real):
            report.fid = fid(generated, real)
        else:
            logger.warning("FID skipped: a trace set has no frames")

    if provider is not None:
        texts = sorted({script_text(t.script) for t in traces if t.script.keyframes})
        if len(texts) >= 2:
            report.diversity = script_diversity(texts, provider)

    logger.info(
        f"Evaluated {report.episodes} episodes: success={report.success_rate} "
        f"apd={report.apd} fid={report.fid}"
    )
    return report


def write_skill_csv(traces: Sequence[ExecutionTrace], path: str) -> None:
    """One row per attempted skill: attempts, successes, rate and contact error."""
    attempts = _attempts(traces)
    rates = success_rate(traces)
    errors = _contact_errors(traces)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for skill, flags in sorted(attempts.items()):
        writer.writerow(
            {
                "skill": skill,
                "attempts": len(flags),
                "successes": sum(flags),
                "success_rate": f"{rates[skill]:.2f}",
                "contact_error": "" if skill not in errors else f"{errors[skill]:.6f}",
            }
        )
    atomic_write_text(path, buffer.getvalue())

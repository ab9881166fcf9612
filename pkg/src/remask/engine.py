"""Orchestration: reverse-denoising generation from a fully masked canvas,
and the score-guided remask/regenerate refinement loop.

Both loops share one progressive-reveal kernel: fill every masked position,
keep the most confident fills (or a random subset) according to a rising
keep-fraction curve, re-mask the rest, repeat. Positions kept once stay
kept, so exposure grows monotonically.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from .corpus import ArgumentInstance
from .denoiser import DenoiserModel, fill_masks
from .errors import EngineError
from .masking import (
    MaskConfig,
    MaskPlan,
    apply_plan,
    round_count,
    sentence_mask_plan,
    sufficiency_mask_plan,
)
from .state import SummaryState
from .sufficiency import SufficiencyProfile


@dataclass(frozen=True)
class DiffusionSchedule:
    """Step count, per-step keep fractions, and the intra-generation remask policy."""

    steps: int = 8
    keep_fraction_curve: tuple[float, ...] = ()
    policy: str = "low_confidence_remask"

    def __post_init__(self):
        if self.steps < 1:
            raise EngineError("schedule needs at least one step")
        curve = tuple(self.keep_fraction_curve) or tuple(
            (i + 1) / self.steps for i in range(self.steps)
        )
        object.__setattr__(self, "keep_fraction_curve", curve)
        if len(curve) != self.steps:
            raise EngineError("keep_fraction_curve length must equal steps")
        if any(not 0.0 < f <= 1.0 for f in curve):
            raise EngineError("keep fractions must be in (0, 1]")
        if any(b < a for a, b in zip(curve, curve[1:])):
            raise EngineError("keep_fraction_curve must be non-decreasing")
        if curve[-1] != 1.0:
            raise EngineError("keep_fraction_curve must end at 1.0")
        if self.policy not in ("low_confidence_remask", "random_remask"):
            raise EngineError(f"unknown remask policy {self.policy!r}")

    @classmethod
    def linear(cls, steps: int, policy: str = "low_confidence_remask") -> "DiffusionSchedule":
        return cls(steps=steps, keep_fraction_curve=(), policy=policy)


@dataclass
class RefineConfig:
    iterations: int = 3
    mask_config: MaskConfig = field(default_factory=MaskConfig)
    inner_steps: int = 4
    convergence_tau: float = 0.9
    scorer: str = "heuristic"  # echo only; refine() takes the scorer object

    def __post_init__(self):
        if self.iterations < 0:
            raise EngineError("iterations must be >= 0")
        if self.inner_steps < 1:
            raise EngineError("inner_steps must be >= 1")
        if not 0.0 <= self.convergence_tau <= 1.0:
            raise EngineError("convergence_tau must be in [0, 1]")


@dataclass
class IterationRecord:
    index: int
    state_before: SummaryState
    profile: SufficiencyProfile
    plan: MaskPlan
    state_after: SummaryState
    metrics: dict


@dataclass
class RefinementTrace:
    initial_state: SummaryState
    records: list[IterationRecord]
    terminated_by: str

    @property
    def final_state(self) -> SummaryState:
        return self.records[-1].state_after if self.records else self.initial_state

    def to_jsonl_lines(self, instance_id: str | None = None) -> list[str]:
        tag = {} if instance_id is None else {"instance": instance_id}
        if not self.records:
            line = {
                **tag,
                "iteration": 0,
                "state_before": list(self.initial_state.surface),
                "state_after": list(self.initial_state.surface),
                "terminated_by": self.terminated_by,
            }
            return [json.dumps(line, sort_keys=True)]
        lines = []
        for i, record in enumerate(self.records):
            payload = {
                **tag,
                "iteration": record.index,
                "state_before": list(record.state_before.surface),
                "scores": [round(s, 12) for s in record.profile.scores],
                "plan": record.plan.to_json_dict(),
                "state_after": list(record.state_after.surface),
                "metrics": {k: round(v, 12) for k, v in record.metrics.items()},
            }
            if i == len(self.records) - 1:
                payload["terminated_by"] = self.terminated_by
            lines.append(json.dumps(payload, sort_keys=True))
        return lines

    def save(self, path: str | Path, instance_id: str | None = None) -> None:
        Path(path).write_text(
            "\n".join(self.to_jsonl_lines(instance_id)) + "\n", encoding="utf-8"
        )


def denoise(
    state: SummaryState,
    model: DenoiserModel,
    instance: ArgumentInstance | None,
    steps: int,
    rng: random.Random,
    fill_policy: str = "argmax",
    remask_policy: str = "low_confidence_remask",
    keep_curve: Sequence[float] | None = None,
) -> SummaryState:
    """Progressively reveal the currently masked positions over ``steps`` rounds.

    Each round fills all masked positions, promotes enough of the new fills
    to kept status to honor the keep curve (most confident first, ties to the
    lower position; or uniformly at random under ``random_remask``), and
    re-masks the rest. Kept positions never go back.
    """
    targets = state.masked_positions()
    if not targets:
        raise EngineError("state has no masked positions to denoise")
    if steps < 1:
        raise EngineError("steps must be >= 1")
    curve = tuple(keep_curve) if keep_curve is not None else tuple(
        (i + 1) / steps for i in range(steps)
    )
    if len(curve) != steps or curve[-1] != 1.0:
        raise EngineError("keep curve must have one entry per step and end at 1.0")
    kept: set[int] = set()
    total = len(targets)
    for step in range(steps):
        state = fill_masks(model, state, instance, rng, policy=fill_policy)
        goal = round_count(curve[step] * total)
        fresh = [p for p in targets if p not in kept]
        need = max(0, min(goal - len(kept), len(fresh)))
        if remask_policy == "low_confidence_remask":
            ranked = sorted(fresh, key=lambda p: (-state.confidence[p], p))
            kept.update(ranked[:need])
        elif remask_policy == "random_remask":
            kept.update(rng.sample(fresh, need))
        else:
            raise EngineError(f"unknown remask policy {remask_policy!r}")
        leftover = [p for p in targets if p not in kept]
        if not leftover:
            break  # goal can hit 100% before the last step on small mask sets
        if step < steps - 1:
            state = state.with_masked(leftover)
    return state


def generate(
    instance: ArgumentInstance,
    model: DenoiserModel,
    schedule: DiffusionSchedule,
    length: int,
    rng: random.Random,
    fill_policy: str = "sample",
) -> SummaryState:
    """Generate a summary canvas from all-MASK by reverse denoising."""
    if length < 1:
        raise EngineError("length must be >= 1")
    state = SummaryState.fully_masked(length)
    return denoise(
        state,
        model,
        instance,
        steps=schedule.steps,
        rng=rng,
        fill_policy=fill_policy,
        remask_policy=schedule.policy,
        keep_curve=schedule.keep_fraction_curve,
    )


def has_converged(profile: SufficiencyProfile, tau: float) -> bool:
    """True when every token score reaches the sufficiency threshold."""
    return profile.min_score >= tau


def refine(
    state: SummaryState,
    instance: ArgumentInstance,
    model: DenoiserModel,
    scorer,
    config: RefineConfig,
    rng: random.Random,
) -> RefinementTrace:
    """Iteratively re-mask and regenerate the weakest spans of a summary.

    Per iteration: score, plan (with ``r`` decayed multiplicatively each
    iteration), apply the plan, and repair the masked spans with argmax
    fills over ``inner_steps`` rounds. Stops early when all scores reach the
    convergence threshold or the plan comes back converged.
    """
    if not state.fully_unmasked:
        raise EngineError("refinement starts from a fully unmasked state")
    records: list[IterationRecord] = []
    terminated_by = "iteration_budget"
    current = state
    r = config.mask_config.r
    for iteration in range(1, config.iterations + 1):
        profile = scorer.profile(current, instance)
        mask_cfg = replace(config.mask_config, r=r)
        if has_converged(profile, config.convergence_tau):
            plan = MaskPlan(
                positions=(), realized_weights=(), r=r, lam=mask_cfg.lam, converged=True
            )
            records.append(
                IterationRecord(iteration, current, profile, plan, current,
                                _metrics(profile, plan))
            )
            terminated_by = "converged"
            break
        candidates = list(current.surface_region())
        if not candidates:
            plan = MaskPlan(
                positions=(), realized_weights=(), r=r, lam=mask_cfg.lam, converged=True
            )
            records.append(
                IterationRecord(iteration, current, profile, plan, current,
                                _metrics(profile, plan))
            )
            terminated_by = "converged"
            break
        if mask_cfg.granularity == "sentence":
            plan = sentence_mask_plan(current, profile, mask_cfg)
        else:
            plan = sufficiency_mask_plan(profile, candidates, mask_cfg, rng)
        if plan.converged or plan.is_empty():
            records.append(
                IterationRecord(iteration, current, profile, plan, current,
                                _metrics(profile, plan))
            )
            if plan.converged:
                terminated_by = "converged"
            break
        masked_state = apply_plan(current, plan)
        repaired = denoise(
            masked_state,
            model,
            instance,
            steps=config.inner_steps,
            rng=rng,
            fill_policy="argmax",
            remask_policy="low_confidence_remask",
        )
        records.append(
            IterationRecord(iteration, current, profile, plan, repaired,
                            _metrics(profile, plan))
        )
        current = repaired
        r *= config.mask_config.r_decay
    return RefinementTrace(initial_state=state, records=records, terminated_by=terminated_by)


def _metrics(profile: SufficiencyProfile, plan: MaskPlan) -> dict:
    return {
        "min_score": profile.min_score,
        "mean_score": profile.mean_score,
        "masked_count": float(len(plan.positions)),
    }

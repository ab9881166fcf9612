"""Corruption machinery: training-time stochastic masking, score-guided
remask planning with exploration noise, and sentence-level plans.

Every operation is a pure function of its inputs plus an explicit RNG
stream, so plans are replayable from a seed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, TYPE_CHECKING

from .corpus import TokenSeq, sentence_spans
from .errors import MaskingError
from .state import SummaryState

if TYPE_CHECKING:
    from .sufficiency import SufficiencyProfile


def round_count(x: float) -> int:
    """Round half up; used for every fraction-to-count conversion."""
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class MaskConfig:
    """Knobs of the guided corruption distribution.

    ``lam`` trades guided corruption against exploration, ``r`` is the
    fraction of candidates masked per plan, ``r_decay`` shrinks ``r``
    multiplicatively across refinement iterations, and plans whose total
    corruption weight falls below ``epsilon_converged`` come back empty and
    flagged converged.
    """

    lam: float = 0.1
    r: float = 0.2
    r_decay: float = 1.0
    epsilon_converged: float = 1e-6
    granularity: str = "token"

    def __post_init__(self):
        if self.lam < 0:
            raise MaskingError("lam must be >= 0")
        if not 0.0 <= self.r <= 1.0:
            raise MaskingError("r must be in [0, 1]")
        if self.r_decay < 0:
            raise MaskingError("r_decay must be >= 0")
        if self.epsilon_converged < 0:
            raise MaskingError("epsilon_converged must be >= 0")
        if self.granularity not in ("token", "sentence"):
            raise MaskingError("granularity must be 'token' or 'sentence'")


@dataclass(frozen=True)
class MaskPlan:
    """A realized set of positions to (re)mask, with audit weights.

    ``realized_weights`` line up with the sorted candidate set that produced
    the plan (for ``corrupt`` there are no weights). ``converged`` marks a
    plan that came back empty because total corruption weight fell below the
    configured floor.
    """

    positions: tuple[int, ...]
    realized_weights: tuple[float, ...]
    r: float
    lam: float
    converged: bool = False

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(self.positions))
        object.__setattr__(self, "realized_weights", tuple(self.realized_weights))

    def is_empty(self) -> bool:
        return not self.positions

    def to_json_dict(self) -> dict:
        return {
            "positions": list(self.positions),
            "weights": [round(w, 12) for w in self.realized_weights],
            "r": self.r,
            "lambda": self.lam,
            "converged": self.converged,
        }


def corrupt(
    reference: TokenSeq, ratio: float, rng: random.Random
) -> tuple[SummaryState, MaskPlan]:
    """Mask round(ratio * L) positions of a reference, uniformly without replacement.

    A positive ratio always masks at least one position.
    """
    if not 0.0 <= ratio <= 1.0:
        raise MaskingError("ratio must be in [0, 1]")
    if len(reference) == 0:
        raise MaskingError("reference must be non-empty")
    length = len(reference)
    count = round_count(ratio * length)
    if ratio > 0:
        count = max(1, count)
    positions = tuple(sorted(rng.sample(range(length), count))) if count else ()
    state = SummaryState.from_reference(reference).with_masked(positions)
    plan = MaskPlan(positions=positions, realized_weights=(), r=ratio, lam=0.0)
    return state, plan


def sufficiency_mask_plan(
    profile: "SufficiencyProfile",
    candidates: Iterable[int],
    config: MaskConfig,
    rng: random.Random,
) -> MaskPlan:
    """Select the positions to remask, guided by per-token scores.

    Candidate i gets corruption weight ``(1 - s_i) + lam * u_i`` with u_i
    drawn i.i.d. uniform on [0, 1) in ascending candidate order. If the total
    positive weight falls below ``epsilon_converged`` the plan is empty and
    converged. Otherwise round(r * n) slots are filled one at a time: with
    ``lam > 0`` each slot first draws one uniform; below ``lam`` it explores
    (one ``randrange`` over the remaining candidates in ascending order),
    otherwise it takes the highest-weight remaining candidate, ties to the
    lower index. At ``lam = 0`` the slot loop draws nothing and the plan is
    exactly deterministic top-r by (1 - s). Exploration has to live in the
    selection step: bounded additive weight noise alone can never let a fully
    sufficient position outrank a fully insufficient one.
    """
    cands = sorted(set(candidates))
    if not cands:
        raise MaskingError("candidate set must be non-empty")
    scores = profile.scores
    missing = [i for i in cands if not 0 <= i < len(scores)]
    if missing:
        raise MaskingError(f"profile does not cover candidate positions {missing}")

    weights = tuple((1.0 - scores[i]) + config.lam * rng.random() for i in cands)
    if sum(max(w, 0.0) for w in weights) < config.epsilon_converged:
        return MaskPlan(
            positions=(), realized_weights=weights, r=config.r, lam=config.lam, converged=True
        )

    count = round_count(config.r * len(cands))
    weight_of = dict(zip(cands, weights))
    remaining = list(cands)
    chosen: list[int] = []
    for _ in range(count):
        if config.lam > 0 and rng.random() < config.lam:
            pick = remaining[rng.randrange(len(remaining))]
        else:
            pick = max(remaining, key=lambda i: (weight_of[i], -i))
        remaining.remove(pick)
        chosen.append(pick)
    return MaskPlan(
        positions=tuple(sorted(chosen)),
        realized_weights=weights,
        r=config.r,
        lam=config.lam,
    )


def sentence_mask_plan(
    state: SummaryState, profile: "SufficiencyProfile", config: MaskConfig
) -> MaskPlan:
    """Mask whole sentences: the top-r fraction of sentences by (1 - mean score).

    Sentences are delimited by '.', '!' and '?' within the surface region of
    the canvas; a state without any boundary counts as one sentence. Ties go
    to the lower sentence index. An all-sufficient state (total sentence
    weight below the convergence floor) yields an empty converged plan.
    """
    if config.granularity != "sentence":
        raise MaskingError("sentence_mask_plan requires granularity='sentence'")
    region = state.surface_region()
    surfaces = [state.surface[i] for i in region]
    scores = profile.scores
    if len(scores) < len(state):
        raise MaskingError("profile does not cover the state")
    spans = sentence_spans(surfaces)
    if not spans:
        return MaskPlan(positions=(), realized_weights=(), r=config.r, lam=config.lam)
    weights = tuple(
        1.0 - (sum(scores[i] for i in range(start, end)) / (end - start))
        for start, end in spans
    )
    if sum(max(w, 0.0) for w in weights) < config.epsilon_converged:
        return MaskPlan(
            positions=(), realized_weights=weights, r=config.r, lam=config.lam, converged=True
        )
    count = round_count(config.r * len(spans))
    order = sorted(range(len(spans)), key=lambda j: (-weights[j], j))
    positions: list[int] = []
    for j in order[:count]:
        start, end = spans[j]
        positions.extend(range(start, end))
    return MaskPlan(
        positions=tuple(sorted(positions)),
        realized_weights=weights,
        r=config.r,
        lam=config.lam,
    )


def apply_plan(state: SummaryState, plan: MaskPlan) -> SummaryState:
    """Mask the plan's positions; converged or empty plans leave the state as is."""
    if plan.converged or plan.is_empty():
        return state
    bad = [p for p in plan.positions if not 0 <= p < len(state)]
    if bad:
        raise MaskingError(f"plan positions {bad} outside canvas of length {len(state)}")
    return state.with_masked(plan.positions)

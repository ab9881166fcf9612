"""Automatic evaluation: ROUGE-1/2/L F1, deterministic proxies for the
coverage / faithfulness / conciseness judgment dimensions, and the ablation
harness that sweeps refinement depth and diagnosis strategy.

ROUGE here is F1, no stemming, no stopword removal, over this package's own
tokenizer, so reported numbers are reproducible but not comparable to any
externally published scores.
"""

from __future__ import annotations

import json
import shlex
import subprocess
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from . import rng as rng_mod
from ._http import post_json
from .corpus import ArgumentInstance, TokenSeq, content_tokens, tokenize
from .denoiser import DenoiserModel
from .engine import DiffusionSchedule, RefineConfig, generate, refine
from .errors import RemaskError, RemoteError
from .sufficiency import IdfTable, _mass, sentence_grounding_scores


def _surfaces(seq) -> tuple[str, ...]:
    if isinstance(seq, TokenSeq):
        return seq.surface
    return tuple(seq)


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def rouge_n(candidate, reference, n: int) -> float:
    """Clipped n-gram overlap F1. Empty candidate or reference scores 0."""
    if n < 1:
        raise RemaskError("n must be >= 1")
    cand = _surfaces(candidate)
    ref = _surfaces(reference)
    cand_grams = Counter(tuple(cand[i : i + n]) for i in range(len(cand) - n + 1))
    ref_grams = Counter(tuple(ref[i : i + n]) for i in range(len(ref) - n + 1))
    if not cand_grams or not ref_grams:
        return 0.0
    matches = sum(min(count, ref_grams[gram]) for gram, count in cand_grams.items())
    precision = matches / sum(cand_grams.values())
    recall = matches / sum(ref_grams.values())
    return _f1(precision, recall)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length, single-row dynamic program."""
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[len(b)]


def rouge_l(candidate, reference) -> float:
    """Longest-common-subsequence F1."""
    cand = _surfaces(candidate)
    ref = _surfaces(reference)
    if not cand or not ref:
        return 0.0
    lcs = lcs_length(cand, ref)
    return _f1(lcs / len(cand), lcs / len(ref))


# ---------------------------------------------------------------------------
# Judgment-dimension proxies


COVERAGE_THRESHOLD = 0.3


def claim_overlap(summary: str, unit, idf: IdfTable | None = None) -> float:
    """How much of one claim's weighted content the summary recovers.

    The numerator is the IDF mass of summary content tokens found anywhere in
    the claim or its evidence; the denominator is the mass of the claim
    statement itself, so evidence mentions count toward covering their
    claim. Capped at 1.
    """
    summary_content = set(content_tokens(tokenize(summary).surface))
    claim_content = set(content_tokens(tokenize(unit.claim).surface))
    unit_pool = set(claim_content)
    for evidence in unit.evidence:
        unit_pool.update(content_tokens(tokenize(evidence).surface))
    if not claim_content:
        return 0.0
    matched = summary_content & unit_pool
    return min(_mass(matched, idf) / _mass(claim_content, idf), 1.0)


def coverage_proxy(summary: str, instance: ArgumentInstance, idf: IdfTable | None = None) -> float:
    """Fraction of claims whose overlap with the summary exceeds the threshold."""
    covered = sum(
        1 for unit in instance.claims if claim_overlap(summary, unit, idf) > COVERAGE_THRESHOLD
    )
    return covered / len(instance.claims)


def faithfulness_proxy(
    summary: str, instance: ArgumentInstance, idf: IdfTable | None = None
) -> float:
    """Mean grounding score of the summary's sentences."""
    surfaces = tokenize(summary).surface
    scores = sentence_grounding_scores(surfaces, instance, idf)
    if not scores:
        return 0.0
    return sum(score for _, _, score in scores) / len(scores)


def conciseness_proxy(summary: str, instance: ArgumentInstance | None = None) -> float:
    """One minus the duplicated-content-token fraction, floored at zero."""
    tokens = content_tokens(tokenize(summary).surface)
    if not tokens:
        return 1.0
    duplicated = (len(tokens) - len(set(tokens))) / len(tokens)
    return max(0.0, 1.0 - duplicated)


# ---------------------------------------------------------------------------
# Reports


@dataclass
class InstanceEval:
    instance_id: str
    rouge_1: float
    rouge_2: float
    rouge_l: float
    coverage: float
    faithfulness: float
    conciseness: float

    def as_dict(self) -> dict:
        return {
            "id": self.instance_id,
            "rouge_1": self.rouge_1,
            "rouge_2": self.rouge_2,
            "rouge_l": self.rouge_l,
            "coverage": self.coverage,
            "faithfulness": self.faithfulness,
            "conciseness": self.conciseness,
        }


METRIC_KEYS = ("rouge_1", "rouge_2", "rouge_l", "coverage", "faithfulness", "conciseness")


@dataclass
class EvalReport:
    per_instance: list[InstanceEval]
    means: dict[str, float]
    config_echo: dict = field(default_factory=dict)
    external_scores: dict[str, float] | None = None

    def to_json_dict(self) -> dict:
        payload = {
            "per_instance": [item.as_dict() for item in self.per_instance],
            "means": self.means,
            "config_echo": self.config_echo,
        }
        if self.external_scores is not None:
            payload["external_scores"] = self.external_scores
        return payload


class ExternalScorer:
    """Hook for scorers this package does not reimplement.

    ``command`` mode pipes ``{"candidate":..., "reference":...}`` JSON to a
    shell command and reads a float from stdout; ``endpoint`` mode POSTs the
    same payload and expects ``{"score": x}``.
    """

    def __init__(
        self,
        name: str,
        command: str | None = None,
        endpoint: str | None = None,
        transport=None,
    ):
        if bool(command) == bool(endpoint):
            raise RemaskError("external scorer needs exactly one of command or endpoint")
        self.name = name
        self.command = command
        self.endpoint = endpoint
        self.transport = transport

    def score(self, candidate: str, reference: str) -> float:
        payload = {"candidate": candidate, "reference": reference}
        if self.command:
            proc = subprocess.run(
                shlex.split(self.command),
                input=json.dumps(payload).encode("utf-8"),
                stdout=subprocess.PIPE,
                check=False,
            )
            if proc.returncode != 0:
                raise RemoteError(f"external scorer command exited {proc.returncode}")
            try:
                return float(proc.stdout.decode("utf-8").strip())
            except ValueError as exc:
                raise RemoteError("external scorer produced non-numeric output") from exc
        response = post_json(self.endpoint, payload, transport=self.transport)
        try:
            return float(response["score"])
        except (KeyError, TypeError, ValueError) as exc:
            raise RemoteError(f"external scorer response missing 'score': {response!r}") from exc


def evaluate_instances(
    pairs: Sequence[tuple[ArgumentInstance, str]],
    idf: IdfTable | None = None,
    config_echo: dict | None = None,
    external: Sequence[ExternalScorer] = (),
) -> EvalReport:
    """Score (instance, summary) pairs against their reference summaries."""
    if not pairs:
        raise RemaskError("nothing to evaluate")
    rows: list[InstanceEval] = []
    external_totals: dict[str, float] = {scorer.name: 0.0 for scorer in external}
    for instance, summary in pairs:
        if not instance.reference_summary:
            raise RemaskError(f"instance {instance.id!r} has no reference summary")
        cand = tokenize(summary)
        ref = tokenize(instance.reference_summary)
        rows.append(
            InstanceEval(
                instance_id=instance.id,
                rouge_1=rouge_n(cand, ref, 1),
                rouge_2=rouge_n(cand, ref, 2),
                rouge_l=rouge_l(cand, ref),
                coverage=coverage_proxy(summary, instance, idf),
                faithfulness=faithfulness_proxy(summary, instance, idf),
                conciseness=conciseness_proxy(summary, instance),
            )
        )
        for scorer in external:
            external_totals[scorer.name] += scorer.score(summary, instance.reference_summary)
    means = {
        key: sum(getattr(row, key) for row in rows) / len(rows) for key in METRIC_KEYS
    }
    external_scores = (
        {name: total / len(rows) for name, total in external_totals.items()} if external else None
    )
    return EvalReport(rows, means, config_echo or {}, external_scores)


# ---------------------------------------------------------------------------
# Ablation harness


@dataclass
class AblationCell:
    scorer_name: str
    iterations: int
    report: EvalReport | None
    error: str | None = None


def ablation(
    dataset: Sequence[ArgumentInstance],
    model: DenoiserModel,
    scorers: Sequence[tuple[str, object]],
    iteration_counts: Sequence[int],
    *,
    schedule: DiffusionSchedule | None = None,
    length: int | None = None,
    refine_config: RefineConfig | None = None,
    seed: int = 0,
    idf: IdfTable | None = None,
    fill_policy: str = "sample",
) -> list[AblationCell]:
    """One evaluation report per (scorer variant, iteration count) cell.

    Every cell generates fresh summaries with identical seeds, refines them
    under its own variant, and evaluates against the references. Per-cell
    failures are captured in the cell instead of aborting the sweep.
    """
    for inst in dataset:
        if not inst.reference_summary:
            raise RemaskError(f"instance {inst.id!r} has no reference summary")
    schedule = schedule or DiffusionSchedule.linear(8)
    length = length or model.canvas_length
    base_config = refine_config or RefineConfig()
    cells: list[AblationCell] = []
    for scorer_name, scorer in scorers:
        for iterations in iteration_counts:
            config = RefineConfig(
                iterations=iterations,
                mask_config=base_config.mask_config,
                inner_steps=base_config.inner_steps,
                convergence_tau=base_config.convergence_tau,
                scorer=scorer_name,
            )
            try:
                pairs = []
                for inst in dataset:
                    gen_rng = rng_mod.stream(seed, f"ablate:{inst.id}:generate")
                    state = generate(inst, model, schedule, length, gen_rng, fill_policy)
                    refine_rng = rng_mod.stream(
                        seed, f"ablate:{scorer_name}:{iterations}:{inst.id}:refine"
                    )
                    trace = refine(state, inst, model, scorer, config, refine_rng)
                    pairs.append((inst, trace.final_state.to_text()))
                report = evaluate_instances(
                    pairs,
                    idf=idf,
                    config_echo={"scorer": scorer_name, "iterations": iterations, "seed": seed},
                )
                cells.append(AblationCell(scorer_name, iterations, report))
            except RemaskError as exc:
                cells.append(AblationCell(scorer_name, iterations, None, error=str(exc)))
    return cells


TABLE_METRICS = ("rouge_l", "coverage", "faithfulness")
TABLE_HEADERS = ("R-L", "Coverage", "Faithfulness")


def render_ablation_table(cells: Sequence[AblationCell], csv: bool = False) -> str:
    """Aligned text (or CSV) grid: one row per cell, three metric columns."""
    header = ["scorer", "iterations", *TABLE_HEADERS]
    rows = [header]
    for cell in cells:
        if cell.report is None:
            values = ["ERR"] * len(TABLE_METRICS)
        else:
            values = [f"{cell.report.means[key]:.3f}" for key in TABLE_METRICS]
        rows.append([cell.scorer_name, str(cell.iterations), *values])
    if csv:
        return "\n".join(",".join(row) for row in rows)
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows]
    return "\n".join(lines)

"""Diagnosis of summary spans: which parts are grounded in the input
claims and evidence, which are unsupported, and which merely repeat.

Four scorers share one profile format: a deterministic overlap heuristic, a
trainable linear classifier over segment-tagged hashed n-gram and overlap
features, a remote reasoning judge, and a convex blend of any two. Span
judgments are broadcast to per-token scores so the masking controller can
consume them.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._http import Transport, post_json
from .corpus import (
    ArgumentInstance,
    ClaimUnit,
    content_tokens,
    sentence_spans,
    tokenize,
)
from .errors import MalformedVerdictError, RemoteError, SufficiencyError
from .state import SummaryState

SOURCES = ("heuristic", "classifier", "cot", "combined", "none")


# ---------------------------------------------------------------------------
# IDF weighting


class IdfTable:
    """Inverse document frequency over a dataset's evidence pool.

    Each evidence text counts as one document. Unseen tokens get the maximum
    weight; with no documents at all every token weighs 1.0.
    """

    def __init__(self, document_frequency: dict[str, int], n_documents: int):
        self.document_frequency = dict(document_frequency)
        self.n_documents = n_documents

    @classmethod
    def build(cls, instances: Iterable[ArgumentInstance]) -> "IdfTable":
        df: dict[str, int] = {}
        n = 0
        for inst in instances:
            for unit in inst.claims:
                for evidence in unit.evidence:
                    n += 1
                    for token in set(content_tokens(tokenize(evidence).surface)):
                        df[token] = df.get(token, 0) + 1
        return cls(df, n)

    def idf(self, token: str) -> float:
        if self.n_documents == 0:
            return 1.0
        return math.log((1 + self.n_documents) / (1 + self.document_frequency.get(token, 0))) + 1.0

    def mass(self, tokens: Iterable[str]) -> float:
        return sum(self.idf(t) for t in tokens)


def _mass(tokens: Iterable[str], idf: IdfTable | None) -> float:
    unique = set(tokens)
    return float(len(unique)) if idf is None else idf.mass(unique)


# ---------------------------------------------------------------------------
# Profiles


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    score: float
    source: str


@dataclass(frozen=True)
class SufficiencyProfile:
    """Per-token scores plus the span-level judgments they came from."""

    scores: tuple[float, ...]
    spans: tuple[Span, ...]
    summary_hash: str

    def __post_init__(self):
        object.__setattr__(self, "scores", tuple(self.scores))
        object.__setattr__(self, "spans", tuple(self.spans))
        for s in self.scores:
            if not 0.0 <= s <= 1.0:
                raise SufficiencyError(f"token score {s} outside [0, 1]")

    @property
    def min_score(self) -> float:
        return min(self.scores)

    @property
    def mean_score(self) -> float:
        return sum(self.scores) / len(self.scores)

    def to_json_dict(self) -> dict:
        return {
            "scores": [round(s, 12) for s in self.scores],
            "spans": [
                {"start": sp.start, "end": sp.end, "score": round(sp.score, 12), "source": sp.source}
                for sp in self.spans
            ],
            "summary_hash": self.summary_hash,
        }


def broadcast_span_scores(
    spans: Sequence[tuple[int, int, float]], length: int
) -> list[float]:
    """Expand span scores to per-token scores; overlaps take the minimum.

    Every position in [0, length) must be covered by at least one span.
    """
    scores: list[float | None] = [None] * length
    for start, end, value in spans:
        for i in range(max(start, 0), min(end, length)):
            current = scores[i]
            scores[i] = value if current is None else min(current, value)
    uncovered = [i for i, s in enumerate(scores) if s is None]
    if uncovered:
        raise SufficiencyError(f"spans leave positions uncovered: {uncovered}")
    return [float(s) for s in scores]


def _profile_from_sentences(
    state: SummaryState, sentence_scores: Sequence[tuple[int, int, float]], source: str
) -> SufficiencyProfile:
    """Build a full-canvas profile: sentence spans plus an always-sufficient
    tail over EOS/PAD so padding is never remasked."""
    region_end = len(state.surface_region())
    spans = [Span(start, end, score, source) for start, end, score in sentence_scores]
    if region_end < len(state):
        spans.append(Span(region_end, len(state), 1.0, source))
    if not spans:
        spans.append(Span(0, len(state), 1.0, source))
    scores = broadcast_span_scores([(sp.start, sp.end, sp.score) for sp in spans], len(state))
    return SufficiencyProfile(tuple(scores), tuple(spans), state.digest())


# ---------------------------------------------------------------------------
# Heuristic scorer


def sentence_grounding_scores(
    surfaces: Sequence[str], instance: ArgumentInstance, idf: IdfTable | None = None
) -> list[tuple[int, int, float]]:
    """Score each sentence by IDF-weighted content overlap with the
    instance's claims and evidence, in [0, 1].

    A sentence whose content tokens repeat at least 80% of an earlier
    sentence's content tokens has its score multiplied by 0.25. Sentences
    with no content tokens score 0.
    """
    pool: set[str] = set()
    for text in instance.grounding_texts():
        pool.update(content_tokens(tokenize(text).surface))
    results: list[tuple[int, int, float]] = []
    earlier: list[set[str]] = []
    for start, end in sentence_spans(surfaces):
        content = set(content_tokens(surfaces[start:end]))
        if not content:
            results.append((start, end, 0.0))
            earlier.append(content)
            continue
        score = _mass(content & pool, idf) / _mass(content, idf)
        for prior in earlier:
            if prior and len(content & prior) / len(prior) >= 0.8:
                score *= 0.25
                break
        results.append((start, end, min(score, 1.0)))
        earlier.append(content)
    return results


def heuristic_scores(
    state: SummaryState, instance: ArgumentInstance, idf: IdfTable | None = None
) -> SufficiencyProfile:
    """Deterministic grounding profile for a fully generated state."""
    if not state.fully_unmasked:
        raise SufficiencyError("cannot score a state with masked positions")
    region = state.surface_region()
    surfaces = [state.surface[i] for i in region]
    return _profile_from_sentences(
        state, sentence_grounding_scores(surfaces, instance, idf), "heuristic"
    )


def best_claim(instance: ArgumentInstance, span_content: set[str]) -> ClaimUnit:
    """The claim unit whose claim+evidence content overlaps the span most;
    ties go to the earlier claim."""
    best = instance.claims[0]
    best_overlap = -1
    for unit in instance.claims:
        unit_pool = set(content_tokens(tokenize(unit.claim).surface))
        for evidence in unit.evidence:
            unit_pool.update(content_tokens(tokenize(evidence).surface))
        overlap = len(span_content & unit_pool)
        if overlap > best_overlap:
            best = unit
            best_overlap = overlap
    return best


# ---------------------------------------------------------------------------
# Perturbation labeling


@dataclass(frozen=True)
class LabeledSpan:
    span: str
    claim: str
    evidence: tuple[str, ...]
    label: int
    perturbation: str

    def __post_init__(self):
        object.__setattr__(self, "evidence", tuple(self.evidence))
        if (self.label == 1) != (self.perturbation == "none"):
            raise SufficiencyError("label 1 requires perturbation 'none' and vice versa")


@dataclass
class PerturbationSet:
    """Generated spans plus metadata about types that could not be produced."""

    spans: list[LabeledSpan]
    unavailable: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()


NEGATION_TOKENS = ("not", "never")

_AUXILIARIES = (
    "is", "are", "was", "were", "may", "might", "can", "could",
    "should", "would", "will", "must", "do", "does", "did",
)

_ANTONYMS = {
    "safe": "dangerous", "dangerous": "safe",
    "good": "bad", "bad": "good",
    "legal": "illegal", "illegal": "legal",
    "increase": "decrease", "decrease": "increase",
    "increases": "decreases", "decreases": "increases",
    "protect": "harm", "harm": "protect",
    "protects": "harms", "harms": "protects",
    "mandatory": "optional", "optional": "mandatory",
    "right": "wrong", "wrong": "right",
    "support": "oppose", "oppose": "support",
    "supports": "opposes", "opposes": "supports",
    "more": "fewer", "fewer": "more",
    "benefit": "damage", "damage": "benefit",
    "effective": "ineffective", "ineffective": "effective",
}


def contradict_sentence(text: str) -> str:
    """Flip the polarity of a sentence by negation edit or antonym swap.

    Rules fire in order: remove the first 'not'/'never'; otherwise insert
    'not' after the first auxiliary; otherwise swap the first word found in
    the antonym lexicon; otherwise prefix 'it is false that'.
    """
    tokens = list(tokenize(text).surface)
    for i, tok in enumerate(tokens):
        if tok in NEGATION_TOKENS:
            return " ".join(tokens[:i] + tokens[i + 1:])
    for i, tok in enumerate(tokens):
        if tok in _AUXILIARIES:
            return " ".join(tokens[: i + 1] + ["not"] + tokens[i + 1:])
    for i, tok in enumerate(tokens):
        if tok in _ANTONYMS:
            return " ".join(tokens[:i] + [_ANTONYMS[tok]] + tokens[i + 1:])
    return " ".join(["it", "is", "false", "that"] + tokens)


def _reference_sentences(instance: ArgumentInstance) -> list[str]:
    surfaces = tokenize(instance.reference_summary or "").surface
    sentences = []
    for start, end in sentence_spans(surfaces):
        text = " ".join(surfaces[start:end])
        if content_tokens(surfaces[start:end]):
            sentences.append(text)
    return sentences


def generate_perturbations(
    instance: ArgumentInstance,
    rng: random.Random,
    k_per_type: int,
    pool: Sequence[ArgumentInstance] | None = None,
) -> PerturbationSet:
    """Construct labeled spans from one instance's reference summary.

    Positives are the reference sentences paired with their best-matching
    claim. Negatives per type: ``contradictory`` applies a polarity edit to a
    sampled positive; ``hallucinated`` takes a sentence from another pool
    instance's summary; ``unsupported`` keeps a positive span but withholds
    its evidence. Types that cannot be produced (no other instance with a
    summary, no evidence to withhold) are reported in the result metadata.
    """
    if not instance.reference_summary:
        raise SufficiencyError(f"instance {instance.id!r} has no reference summary")
    sentences = _reference_sentences(instance)
    if not sentences:
        raise SufficiencyError(f"instance {instance.id!r} has an empty reference summary")

    positives: list[LabeledSpan] = []
    for text in sentences:
        unit = best_claim(instance, set(content_tokens(text.split())))
        positives.append(
            LabeledSpan(span=text, claim=unit.claim, evidence=unit.evidence, label=1,
                        perturbation="none")
        )

    spans = list(positives)
    unavailable: list[str] = []
    notes: list[str] = []

    for _ in range(k_per_type):
        source = positives[rng.randrange(len(positives))]
        spans.append(
            LabeledSpan(
                span=contradict_sentence(source.span),
                claim=source.claim,
                evidence=source.evidence,
                label=0,
                perturbation="contradictory",
            )
        )

    others = [
        inst
        for inst in (pool or ())
        if inst.id != instance.id and inst.reference_summary and _reference_sentences(inst)
    ]
    if not others:
        unavailable.append("hallucinated")
        notes.append("no other instance with a reference summary in the pool")
    else:
        for _ in range(k_per_type):
            other = others[rng.randrange(len(others))]
            foreign = _reference_sentences(other)
            text = foreign[rng.randrange(len(foreign))]
            unit = best_claim(instance, set(content_tokens(text.split())))
            spans.append(
                LabeledSpan(span=text, claim=unit.claim, evidence=unit.evidence, label=0,
                            perturbation="hallucinated")
            )

    with_evidence = [p for p in positives if p.evidence]
    if not with_evidence:
        unavailable.append("unsupported")
        notes.append("no positive span has evidence to withhold")
    else:
        for _ in range(k_per_type):
            source = with_evidence[rng.randrange(len(with_evidence))]
            spans.append(
                LabeledSpan(span=source.span, claim=source.claim, evidence=(), label=0,
                            perturbation="unsupported")
            )

    return PerturbationSet(spans=spans, unavailable=tuple(unavailable), notes=tuple(notes))


def build_perturbation_dataset(
    instances: Sequence[ArgumentInstance], rng: random.Random, k_per_type: int
) -> list[LabeledSpan]:
    """Concatenate perturbation sets over a corpus, instances as the pool."""
    spans: list[LabeledSpan] = []
    for inst in instances:
        spans.extend(generate_perturbations(inst, rng, k_per_type, pool=instances).spans)
    return spans


# ---------------------------------------------------------------------------
# Supervised classifier

N_OVERLAP_FEATURES = 6


def _sigmoid(z: float) -> float:
    z = max(-60.0, min(60.0, z))
    return 1.0 / (1.0 + math.exp(-z))


def _hash_index(key: str, hash_seed: int, dim: int) -> int:
    digest = hashlib.blake2b(f"{hash_seed}|{key}".encode("utf-8"), digest_size=8).digest()
    return N_OVERLAP_FEATURES + int.from_bytes(digest, "big") % dim


def span_features(
    span: str, claim: str, evidence: Sequence[str], hash_seed: int, dim: int
) -> dict[int, float]:
    """Sparse features over the concatenated (span; claim; evidence) input.

    Indices 0..5 hold cross-segment overlap statistics; the rest are hashed
    segment-tagged unigrams and bigrams.
    """
    span_toks = tokenize(span).surface
    claim_toks = tokenize(claim).surface
    ev_toks = tokenize(" ".join(evidence)).surface
    sc = set(content_tokens(span_toks))
    cc = set(content_tokens(claim_toks))
    ec = set(content_tokens(ev_toks))
    pool = cc | ec
    features: dict[int, float] = {
        0: len(sc & cc) / len(sc) if sc else 0.0,
        1: len(sc & ec) / len(sc) if sc else 0.0,
        2: len(sc & pool) / len(sc) if sc else 0.0,
        3: len(sc & cc) / len(cc) if cc else 0.0,
        4: 1.0 if evidence else 0.0,
        5: min(len(sc), 20) / 20.0,
    }
    for tag, toks in (("s", span_toks), ("c", claim_toks), ("e", ev_toks)):
        for tok in toks:
            idx = _hash_index(f"{tag}:{tok}", hash_seed, dim)
            features[idx] = features.get(idx, 0.0) + 1.0
        for left, right in zip(toks, toks[1:]):
            idx = _hash_index(f"{tag}:{left}_{right}", hash_seed, dim)
            features[idx] = features.get(idx, 0.0) + 1.0
    return features


@dataclass
class ClassifierModel:
    """Logistic model over hashed n-gram + overlap features: sigma(w.x + b)."""

    hash_seed: int
    dim: int
    weights: np.ndarray
    bias: float

    def score(self, span: str, claim: str, evidence: Sequence[str]) -> float:
        feats = span_features(span, claim, evidence, self.hash_seed, self.dim)
        z = self.bias + sum(self.weights[idx] * val for idx, val in feats.items())
        return _sigmoid(z)

    def save(self, path: str | Path) -> None:
        archive = {
            "format": "remask-classifier",
            "feature_hash_seed": self.hash_seed,
            "dim": self.dim,
            "weights": [float(w) for w in self.weights],
            "bias": float(self.bias),
        }
        Path(path).write_text(json.dumps(archive, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "ClassifierModel":
        archive = json.loads(Path(path).read_text(encoding="utf-8"))
        if archive.get("format") != "remask-classifier":
            raise SufficiencyError(f"{path} is not a classifier archive")
        return cls(
            hash_seed=int(archive["feature_hash_seed"]),
            dim=int(archive["dim"]),
            weights=np.asarray(archive["weights"], dtype=np.float64),
            bias=float(archive["bias"]),
        )


@dataclass
class ClassifierConfig:
    epochs: int = 200
    lr: float = 0.5
    seed: int = 0
    dim: int = 4096

    def __post_init__(self):
        if self.epochs < 0:
            raise SufficiencyError("epochs must be >= 0")
        if self.lr <= 0:
            raise SufficiencyError("lr must be > 0")
        if self.dim < 1:
            raise SufficiencyError("dim must be >= 1")


def train_classifier(
    data: Sequence[LabeledSpan], config: ClassifierConfig | None = None
) -> ClassifierModel:
    """Fit the classifier by full-batch gradient descent on binary cross-entropy.

    Zero epochs return the zero model (every score exactly 0.5). Data with a
    single label class is rejected.
    """
    config = config or ClassifierConfig()
    if not data:
        raise SufficiencyError("training data is empty")
    labels = {item.label for item in data}
    if labels != {0, 1}:
        raise SufficiencyError("training data must contain both labels")
    size = N_OVERLAP_FEATURES + config.dim
    model = ClassifierModel(
        hash_seed=config.seed, dim=config.dim, weights=np.zeros(size), bias=0.0
    )
    if config.epochs == 0:
        return model

    examples = [
        (span_features(item.span, item.claim, item.evidence, config.seed, config.dim),
         float(item.label))
        for item in data
    ]
    n = len(examples)
    weights = model.weights
    bias = 0.0
    for _ in range(config.epochs):
        grad = np.zeros(size)
        grad_bias = 0.0
        for feats, label in examples:
            z = bias + sum(weights[idx] * val for idx, val in feats.items())
            err = _sigmoid(z) - label
            for idx, val in feats.items():
                grad[idx] += err * val
            grad_bias += err
        weights -= config.lr * grad / n
        bias -= config.lr * grad_bias / n
    model.weights = weights
    model.bias = bias
    return model


def classify_span(
    model: ClassifierModel, span: str, claim: str, evidence: Sequence[str]
) -> float:
    return model.score(span, claim, evidence)


def bce_loss(model: ClassifierModel, data: Sequence[LabeledSpan]) -> float:
    """Mean binary cross-entropy of the model on labeled spans, in nats."""
    if not data:
        raise SufficiencyError("no data to score")
    total = 0.0
    for item in data:
        p = min(max(model.score(item.span, item.claim, item.evidence), 1e-12), 1 - 1e-12)
        total += -(item.label * math.log(p) + (1 - item.label) * math.log(1 - p))
    return total / len(data)


def holdout_accuracy(
    model: ClassifierModel, data: Sequence[LabeledSpan], threshold: float = 0.5
) -> float:
    if not data:
        raise SufficiencyError("no data to score")
    hits = sum(
        1
        for item in data
        if (model.score(item.span, item.claim, item.evidence) >= threshold) == bool(item.label)
    )
    return hits / len(data)


def split_spans(
    data: Sequence[LabeledSpan], holdout_fraction: float, rng: random.Random
) -> tuple[list[LabeledSpan], list[LabeledSpan]]:
    """Shuffled train/holdout split by span."""
    items = list(data)
    rng.shuffle(items)
    cut = int(round(len(items) * (1 - holdout_fraction)))
    return items[:cut], items[cut:]


# ---------------------------------------------------------------------------
# Remote reasoning judge

VERDICT_SCORES = {"supported": 1.0, "insufficient": 0.0, "redundant": 0.25}

_VERDICT_RE = re.compile(r"VERDICT:\s*(supported|insufficient|redundant)\b", re.IGNORECASE)

_TEMPLATE_DIR = Path(__file__).parent / "templates"


@dataclass(frozen=True)
class SufficiencyVerdict:
    category: str
    rationale: str
    score: float


@dataclass
class CotClient:
    """Chat-completion endpoint descriptor for the reasoning judge."""

    endpoint: str
    model_id: str = "default"
    token: str | None = None
    timeout: float = 30.0
    retries: int = 2
    backoff: float = 0.25
    transport: Transport | None = None

    @classmethod
    def from_env(cls, environ, transport: Transport | None = None) -> "CotClient":
        endpoint = environ.get("REMASK_LLM_ENDPOINT")
        if not endpoint:
            raise SufficiencyError("REMASK_LLM_ENDPOINT is not configured")
        return cls(endpoint=endpoint, token=environ.get("REMASK_LLM_TOKEN"), transport=transport)


def load_template(name: str) -> str:
    path = _TEMPLATE_DIR / f"{name}.txt"
    if not path.exists():
        raise SufficiencyError(f"unknown prompt template {name!r}")
    return path.read_text(encoding="utf-8")


def render_template(template_text: str, span: str, instance: ArgumentInstance) -> str:
    claims = "\n".join(f"- {unit.claim}" for unit in instance.claims)
    evidence_lines = [f"- {ev}" for unit in instance.claims for ev in unit.evidence]
    evidence = "\n".join(evidence_lines) if evidence_lines else "- (none provided)"
    return (
        template_text.replace("{{span}}", span)
        .replace("{{claims}}", claims)
        .replace("{{evidence}}", evidence)
        .replace("{{topic}}", instance.topic)
    )


def cot_judge(
    client: CotClient,
    span: str,
    context: ArgumentInstance,
    template: str = "sufficiency_judgment",
) -> SufficiencyVerdict:
    """Ask the remote judge for a three-way sufficiency verdict on a span.

    The prompt asks for free-form reasoning followed by a final line
    ``VERDICT: supported|insufficient|redundant``; the last such line wins.
    A response without one raises ``MalformedVerdictError`` carrying the raw
    text.
    """
    rendered = render_template(load_template(template), span, context)
    payload = {
        "model": client.model_id,
        "messages": [
            {
                "role": "system",
                "content": "You judge whether summary spans are grounded in the"
                " provided claims and evidence.",
            },
            {"role": "user", "content": rendered},
        ],
    }
    response = post_json(
        client.endpoint,
        payload,
        token=client.token,
        timeout=client.timeout,
        retries=client.retries,
        backoff=client.backoff,
        transport=client.transport,
    )
    try:
        text = response["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise RemoteError(f"malformed chat-completion response: {response!r}") from exc
    matches = _VERDICT_RE.findall(text)
    if not matches:
        raise MalformedVerdictError("malformed verdict: no VERDICT line in response", text)
    category = matches[-1].lower()
    return SufficiencyVerdict(category=category, rationale=text, score=VERDICT_SCORES[category])


# ---------------------------------------------------------------------------
# Fusion


def combine_scores(
    classifier_profile: SufficiencyProfile,
    cot_profile: SufficiencyProfile,
    alpha: float,
) -> SufficiencyProfile:
    """Convex blend: alpha * first + (1 - alpha) * second, per token.

    Both profiles must be bound to the same summary state. The boundary
    cases return the corresponding profile verbatim.
    """
    if not 0.0 <= alpha <= 1.0:
        raise SufficiencyError("alpha must be in [0, 1]")
    if classifier_profile.summary_hash != cot_profile.summary_hash:
        raise SufficiencyError("profiles are bound to different summary states")
    if alpha == 1.0:
        return classifier_profile
    if alpha == 0.0:
        return cot_profile
    if len(classifier_profile.scores) != len(cot_profile.scores):
        raise SufficiencyError("profiles cover different lengths")
    scores = tuple(
        alpha * a + (1 - alpha) * b
        for a, b in zip(classifier_profile.scores, cot_profile.scores)
    )
    boundaries = {0, len(scores)}
    for profile in (classifier_profile, cot_profile):
        for span in profile.spans:
            boundaries.add(span.start)
            boundaries.add(span.end)
    edges = sorted(b for b in boundaries if 0 <= b <= len(scores))
    spans = tuple(
        Span(start, end, scores[start], "combined")
        for start, end in zip(edges, edges[1:])
        if end > start
    )
    return SufficiencyProfile(scores, spans, classifier_profile.summary_hash)


# ---------------------------------------------------------------------------
# Scorer adapters (uniform interface for the refinement engine)


class HeuristicScorer:
    name = "heuristic"

    def __init__(self, idf: IdfTable | None = None):
        self.idf = idf

    def profile(self, state: SummaryState, instance: ArgumentInstance) -> SufficiencyProfile:
        return heuristic_scores(state, instance, self.idf)


class ClassifierScorer:
    name = "classifier"

    def __init__(self, model: ClassifierModel):
        self.model = model

    def profile(self, state: SummaryState, instance: ArgumentInstance) -> SufficiencyProfile:
        if not state.fully_unmasked:
            raise SufficiencyError("cannot score a state with masked positions")
        region = state.surface_region()
        surfaces = [state.surface[i] for i in region]
        sentence_scores = []
        for start, end in sentence_spans(surfaces):
            text = " ".join(surfaces[start:end])
            unit = best_claim(instance, set(content_tokens(surfaces[start:end])))
            sentence_scores.append(
                (start, end, classify_span(self.model, text, unit.claim, unit.evidence))
            )
        return _profile_from_sentences(state, sentence_scores, "classifier")


class CotScorer:
    name = "cot"

    def __init__(self, client: CotClient, template: str = "sufficiency_judgment"):
        if client is None:
            raise SufficiencyError("cot scorer requires a configured endpoint")
        self.client = client
        self.template = template

    def profile(self, state: SummaryState, instance: ArgumentInstance) -> SufficiencyProfile:
        if not state.fully_unmasked:
            raise SufficiencyError("cannot score a state with masked positions")
        region = state.surface_region()
        surfaces = [state.surface[i] for i in region]
        sentence_scores = []
        for start, end in sentence_spans(surfaces):
            text = " ".join(surfaces[start:end])
            verdict = cot_judge(self.client, text, instance, self.template)
            sentence_scores.append((start, end, verdict.score))
        return _profile_from_sentences(state, sentence_scores, "cot")


class CombinedScorer:
    """Convex blend of two scorers' profiles."""

    def __init__(self, first, second, alpha: float = 0.5):
        self.first = first
        self.second = second
        self.alpha = alpha
        self.name = f"{first.name}+{second.name}"

    def profile(self, state: SummaryState, instance: ArgumentInstance) -> SufficiencyProfile:
        return combine_scores(
            self.first.profile(state, instance),
            self.second.profile(state, instance),
            self.alpha,
        )


class ConstantScorer:
    """No diagnosis: a flat score over the surface region.

    With the default 0.5 every surface position is an equal remask candidate,
    so plan selection is driven entirely by the exploration noise.
    """

    name = "none"

    def __init__(self, value: float = 0.5):
        if not 0.0 <= value <= 1.0:
            raise SufficiencyError("constant score must be in [0, 1]")
        self.value = value

    def profile(self, state: SummaryState, instance: ArgumentInstance) -> SufficiencyProfile:
        region_end = len(state.surface_region())
        sentence_scores = [(0, region_end, self.value)] if region_end else []
        return _profile_from_sentences(state, sentence_scores, "none")

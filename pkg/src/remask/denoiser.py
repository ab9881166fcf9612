"""The reverse-process component: predict token distributions at masked
positions conditioned on visible context and the input arguments, train it
under the masked-reconstruction objective, and fill masked canvases.

Three interchangeable kinds:

* ``oracle``      memorizes reference canvases and reproduces them exactly;
* ``categorical`` a context-conditioned count model over (left id, right id,
  position bucket) with add-alpha smoothing and a multiplicative copy bias
  toward the instance's own content tokens;
* ``remote``      a thin client for an HTTP fill-mask endpoint.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping, Sequence

from . import rng as rng_mod
from ._http import Transport, post_json
from .corpus import (
    EOS_ID,
    MASK_ID,
    PAD_ID,
    STOPWORDS,
    ArgumentInstance,
    TokenSeq,
    Vocabulary,
    is_punctuation,
    tokenize,
)
from .errors import DenoiserError, RemoteError
from .masking import corrupt
from .state import SummaryState, canvas

Context = tuple[int, int, int]


@dataclass
class TrainConfig:
    mask_ratio: float = 0.3
    epochs: int = 1
    seed: int = 0
    model_kind: str = "categorical"
    canvas_length: int = 64
    alpha: float = 0.1
    copy_bias: float = 2.0
    n_buckets: int = 4
    gradient_refine: bool = False
    gradient_step: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.mask_ratio <= 1.0:
            raise DenoiserError("mask_ratio must be in (0, 1]")
        if self.epochs < 1:
            raise DenoiserError("epochs must be >= 1")
        if self.model_kind not in ("oracle", "categorical"):
            raise DenoiserError(f"cannot train model kind {self.model_kind!r}")
        if self.canvas_length < 1:
            raise DenoiserError("canvas_length must be >= 1")
        if self.alpha < 0:
            raise DenoiserError("alpha must be >= 0")
        if self.copy_bias <= 0:
            raise DenoiserError("copy_bias must be > 0")
        if self.n_buckets < 1:
            raise DenoiserError("n_buckets must be >= 1")


@dataclass
class TrainingReport:
    epochs: int
    loss_curve: list[tuple[int, float]]
    final_loss: float
    config_echo: dict

    def __post_init__(self):
        if self.epochs >= 1 and not self.loss_curve:
            raise DenoiserError("loss_curve must be non-empty for epochs >= 1")


def _validate_position(state: SummaryState, position: int) -> None:
    if not 0 <= position < len(state):
        raise DenoiserError(f"position {position} outside canvas of length {len(state)}")
    if not state.masked[position]:
        raise DenoiserError(f"position {position} is not masked")


def _pad_legal(state: SummaryState, position: int) -> bool:
    """PAD may only follow the first EOS. While part of the prefix is still
    masked the EOS location is undetermined, so PAD stays admissible; it is
    ruled out only when a fully revealed prefix provably lacks an EOS."""
    for j in range(position):
        if state.masked[j] or state.ids[j] == EOS_ID:
            return True
    return False


class DenoiserModel:
    """Common surface of all denoiser kinds."""

    kind: str = "abstract"

    def __init__(self, vocab: Vocabulary, canvas_length: int):
        self.vocab = vocab
        self.canvas_length = canvas_length

    def predict(
        self, state: SummaryState, instance: ArgumentInstance | None, position: int
    ) -> list[float]:
        raise NotImplementedError

    def predict_many(
        self,
        state: SummaryState,
        instance: ArgumentInstance | None,
        positions: Sequence[int],
    ) -> dict[int, list[float]]:
        return {pos: self.predict(state, instance, pos) for pos in positions}

    def parameters_payload(self) -> dict:
        raise NotImplementedError


class OracleDenoiser(DenoiserModel):
    """Reproduces memorized reference canvases with probability one.

    The oracle answers one-hot on the memorized token, including EOS/PAD
    positions, regardless of what is currently visible; that is what makes
    corrupt-then-fill the identity for every mask pattern.
    """

    kind = "oracle"

    def __init__(
        self, vocab: Vocabulary, canvas_length: int, references: Mapping[str, Sequence[int]]
    ):
        super().__init__(vocab, canvas_length)
        self.references: dict[str, tuple[int, ...]] = {
            key: tuple(ids) for key, ids in references.items()
        }

    def predict(self, state, instance, position):
        _validate_position(state, position)
        if instance is None or instance.id not in self.references:
            name = None if instance is None else instance.id
            raise DenoiserError(f"oracle has no memorized reference for instance {name!r}")
        reference = self.references[instance.id]
        if position >= len(reference):
            raise DenoiserError(
                f"position {position} outside memorized canvas of length {len(reference)}"
            )
        probs = [0.0] * len(self.vocab)
        probs[reference[position]] = 1.0
        return probs

    def parameters_payload(self) -> dict:
        return {"references": {key: list(ids) for key, ids in sorted(self.references.items())}}


class CategoricalDenoiser(DenoiserModel):
    """Count-based conditional distribution with smoothing and copy bias.

    The context of a position is (left neighbor id, right neighbor id,
    position bucket), taken from the current state, so MASK neighbors are
    ordinary context values; PAD stands in beyond the canvas edges. Smoothing
    adds ``alpha`` over the surface vocabulary only. Tokens present in the
    instance's claims or evidence (the copy bag; OOV and reserved ids are
    dropped) have their weight multiplied by ``copy_bias`` before
    renormalization. MASK never receives probability; PAD only beyond the
    first visible EOS.
    """

    kind = "categorical"

    def __init__(
        self,
        vocab: Vocabulary,
        canvas_length: int,
        alpha: float = 0.1,
        copy_bias: float = 2.0,
        n_buckets: int = 4,
        table: dict[Context, dict[int, float]] | None = None,
        explicit: dict[Context, list[float]] | None = None,
    ):
        super().__init__(vocab, canvas_length)
        self.alpha = alpha
        self.copy_bias = copy_bias
        self.n_buckets = n_buckets
        self.table: dict[Context, dict[int, float]] = table if table is not None else {}
        self.explicit = explicit

    def context_of(self, state: SummaryState, position: int) -> Context:
        left = state.ids[position - 1] if position > 0 else PAD_ID
        right = state.ids[position + 1] if position + 1 < len(state) else PAD_ID
        bucket = min(self.n_buckets - 1, position * self.n_buckets // len(state))
        return (left, right, bucket)

    def copy_bag(self, instance: ArgumentInstance | None) -> frozenset[int]:
        if instance is None:
            return frozenset()
        ids: set[int] = set()
        for text in instance.grounding_texts():
            seq = tokenize(text, self.vocab)
            for token_id, surface in zip(seq.ids, seq.surface):
                if token_id > EOS_ID and surface not in STOPWORDS and not is_punctuation(surface):
                    ids.add(token_id)
        return frozenset(ids)

    def _predict_with_bag(
        self, state: SummaryState, position: int, bag: frozenset[int]
    ) -> list[float]:
        _validate_position(state, position)
        ctx = self.context_of(state, position)
        size = len(self.vocab)
        if self.explicit is not None and ctx in self.explicit:
            weights = list(self.explicit[ctx])
        else:
            weights = [0.0] * size
            row = self.table.get(ctx)
            if row:
                for token_id, count in row.items():
                    weights[token_id] += count
            for token_id in self.vocab.surface_ids():
                weights[token_id] += self.alpha
        for token_id in bag:
            weights[token_id] *= self.copy_bias
        weights[MASK_ID] = 0.0
        if not _pad_legal(state, position):
            weights[PAD_ID] = 0.0
        total = sum(weights)
        if total <= 0:
            raise DenoiserError(
                f"no probability mass at position {position}; train the model or set alpha > 0"
            )
        return [w / total for w in weights]

    def predict(self, state, instance, position):
        return self._predict_with_bag(state, position, self.copy_bag(instance))

    def predict_many(self, state, instance, positions):
        bag = self.copy_bag(instance)
        return {pos: self._predict_with_bag(state, pos, bag) for pos in positions}

    def parameters_payload(self) -> dict:
        table = {
            ",".join(map(str, ctx)): {str(tid): count for tid, count in sorted(row.items())}
            for ctx, row in sorted(self.table.items())
        }
        payload = {
            "alpha": self.alpha,
            "copy_bias": self.copy_bias,
            "n_buckets": self.n_buckets,
            "table": table,
        }
        if self.explicit is not None:
            payload["explicit"] = {
                ",".join(map(str, ctx)): list(row) for ctx, row in sorted(self.explicit.items())
            }
        return payload


class RemoteDenoiser(DenoiserModel):
    """Client for an HTTP fill-mask endpoint.

    One POST covers all requested positions. The endpoint answers top-k
    candidate tokens per masked index; candidate mass is renormalized over
    the legal vocabulary (MASK excluded, PAD only beyond a visible EOS).
    """

    kind = "remote"

    def __init__(
        self,
        vocab: Vocabulary,
        canvas_length: int,
        endpoint: str,
        top_k: int = 5,
        token: str | None = None,
        timeout: float = 30.0,
        retries: int = 2,
        backoff: float = 0.25,
        transport: Transport | None = None,
    ):
        super().__init__(vocab, canvas_length)
        self.endpoint = endpoint
        self.top_k = top_k
        self.token = token
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.transport = transport

    def predict_many(self, state, instance, positions):
        for pos in positions:
            _validate_position(state, pos)
        payload = {
            "tokens": [
                None if state.masked[i] else state.surface[i] for i in range(len(state))
            ],
            "context": {
                "topic": instance.topic if instance else "",
                "claims": [unit.claim for unit in instance.claims] if instance else [],
            },
            "top_k": self.top_k,
        }
        response = post_json(
            self.endpoint,
            payload,
            token=self.token,
            timeout=self.timeout,
            retries=self.retries,
            backoff=self.backoff,
            transport=self.transport,
        )
        by_index: dict[int, list[dict]] = {}
        for entry in response.get("positions", []):
            try:
                by_index[int(entry["index"])] = list(entry["candidates"])
            except (KeyError, TypeError, ValueError) as exc:
                raise RemoteError(f"malformed position entry in response: {entry!r}") from exc
        result: dict[int, list[float]] = {}
        for pos in positions:
            if pos not in by_index:
                raise RemoteError(f"response is missing position {pos}")
            weights = [0.0] * len(self.vocab)
            for cand in by_index[pos]:
                try:
                    token_id = self.vocab.id_of(str(cand["token"]))
                    weights[token_id] += float(cand["p"])
                except (KeyError, TypeError, ValueError) as exc:
                    raise RemoteError(f"malformed candidate at position {pos}: {cand!r}") from exc
            weights[MASK_ID] = 0.0
            if not _pad_legal(state, pos):
                weights[PAD_ID] = 0.0
            total = sum(weights)
            if total <= 0:
                raise RemoteError(f"no usable probability mass for position {pos}")
            result[pos] = [w / total for w in weights]
        return result

    def predict(self, state, instance, position):
        return self.predict_many(state, instance, [position])[position]

    def parameters_payload(self) -> dict:
        raise DenoiserError("remote models are not persisted; pass the endpoint at run time")


# ---------------------------------------------------------------------------
# Training


def training_pairs(
    instances: Sequence[ArgumentInstance], vocab: Vocabulary
) -> list[tuple[ArgumentInstance, TokenSeq]]:
    """Tokenized (instance, reference) pairs; missing summaries are errors."""
    pairs = []
    for inst in instances:
        if not inst.reference_summary:
            raise DenoiserError(f"instance {inst.id!r} has no reference summary")
        pairs.append((inst, tokenize(inst.reference_summary, vocab)))
    return pairs


def _epoch_nll(
    model: CategoricalDenoiser,
    samples: list[tuple[SummaryState, int, int, ArgumentInstance]],
) -> float:
    total = 0.0
    bags: dict[str, frozenset[int]] = {}
    for state, pos, target, inst in samples:
        if inst.id not in bags:
            bags[inst.id] = model.copy_bag(inst)
        probs = model._predict_with_bag(state, pos, bags[inst.id])
        p = probs[target]
        total += -math.log(p) if p > 0 else math.inf
    return total / len(samples)


def _gradient_refine(
    model: CategoricalDenoiser,
    samples: list[tuple[SummaryState, int, int, ArgumentInstance]],
    config: TrainConfig,
    loss_curve: list[tuple[int, float]],
) -> None:
    """Full-batch gradient descent on the masked-reconstruction objective.

    Operates on per-context logits over the surface vocabulary plus any
    reserved targets actually observed; the copy bias stays a fixed mixing
    knob and is not trained.
    """
    by_context: dict[Context, list[int]] = {}
    for state, pos, target, _ in samples:
        by_context.setdefault(model.context_of(state, pos), []).append(target)

    support: dict[Context, list[int]] = {}
    logits: dict[Context, dict[int, float]] = {}
    size = len(model.vocab)
    for ctx, targets in by_context.items():
        ids = sorted(set(model.vocab.surface_ids()) | set(model.table.get(ctx, {})) | set(targets))
        support[ctx] = ids
        row = model.table.get(ctx, {})
        total = sum(row.values()) + model.alpha * model.vocab.surface_size
        init = {}
        for tid in ids:
            base = row.get(tid, 0.0) + (model.alpha if tid > EOS_ID else 0.0)
            init[tid] = math.log(max(base, 1e-12) / total)
        logits[ctx] = init

    def row_probs(ctx: Context) -> dict[int, float]:
        z = logits[ctx]
        peak = max(z.values())
        exp = {tid: math.exp(v - peak) for tid, v in z.items()}
        total = sum(exp.values())
        return {tid: v / total for tid, v in exp.items()}

    step_base = len(loss_curve)
    for pass_idx in range(config.epochs):
        loss = 0.0
        for ctx, targets in by_context.items():
            probs = row_probs(ctx)
            grad = {tid: probs[tid] * len(targets) for tid in support[ctx]}
            for target in targets:
                grad[target] -= 1.0
                loss += -math.log(max(probs[target], 1e-300))
            scale = config.gradient_step / len(targets)
            for tid in support[ctx]:
                logits[ctx][tid] -= scale * grad[tid]
        loss_curve.append((step_base + pass_idx, loss / len(samples)))

    explicit: dict[Context, list[float]] = {}
    for ctx in by_context:
        probs = row_probs(ctx)
        dense = [0.0] * size
        for tid, p in probs.items():
            dense[tid] = p
        explicit[ctx] = dense
    model.explicit = explicit


def train_denoiser(
    pairs: Sequence[tuple[ArgumentInstance, TokenSeq]],
    vocab: Vocabulary,
    config: TrainConfig | None = None,
) -> tuple[DenoiserModel, TrainingReport]:
    """Fit a denoiser on (instance, reference) pairs.

    The categorical kind accumulates context/target counts from fresh
    stochastic corruptions of each reference canvas per epoch; the per-epoch
    masked NLL of those samples under the accumulated counts forms the loss
    curve. The oracle kind memorizes the canvases outright.
    """
    config = config or TrainConfig()
    if not pairs:
        raise DenoiserError("training corpus is empty")
    canvases = [(inst, canvas(ref, config.canvas_length)) for inst, ref in pairs]
    echo = asdict(config)

    if config.model_kind == "oracle":
        references = {inst.id: cv.ids for inst, cv in canvases}
        model: DenoiserModel = OracleDenoiser(vocab, config.canvas_length, references)
        curve = [(epoch, 0.0) for epoch in range(config.epochs)]
        return model, TrainingReport(config.epochs, curve, 0.0, echo)

    model = CategoricalDenoiser(
        vocab,
        config.canvas_length,
        alpha=config.alpha,
        copy_bias=config.copy_bias,
        n_buckets=config.n_buckets,
    )
    train_rng = rng_mod.stream(config.seed, "train")
    loss_curve: list[tuple[int, float]] = []
    all_samples: list[tuple[SummaryState, int, int, ArgumentInstance]] = []
    for epoch in range(config.epochs):
        epoch_samples: list[tuple[SummaryState, int, int, ArgumentInstance]] = []
        for inst, cv in canvases:
            state, _ = corrupt(cv, config.mask_ratio, train_rng)
            for pos in state.masked_positions():
                ctx = model.context_of(state, pos)
                target = cv.ids[pos]
                model.table.setdefault(ctx, {})
                model.table[ctx][target] = model.table[ctx].get(target, 0.0) + 1.0
                epoch_samples.append((state, pos, target, inst))
        loss_curve.append((epoch, _epoch_nll(model, epoch_samples)))
        all_samples.extend(epoch_samples)

    if config.gradient_refine:
        _gradient_refine(model, all_samples, config, loss_curve)

    report = TrainingReport(config.epochs, loss_curve, loss_curve[-1][1], echo)
    return model, report


# ---------------------------------------------------------------------------
# Prediction, filling, scoring


def predict_distribution(
    model: DenoiserModel,
    state: SummaryState,
    instance: ArgumentInstance | None,
    position: int,
) -> list[float]:
    """Probability vector over the vocabulary for one masked position."""
    return model.predict(state, instance, position)


def fill_masks(
    model: DenoiserModel,
    state: SummaryState,
    instance: ArgumentInstance | None,
    rng: random.Random,
    policy: str = "argmax",
) -> SummaryState:
    """Fill every masked position simultaneously (one conditioning pass).

    ``argmax`` ignores the RNG and breaks probability ties toward the lower
    token id; ``sample`` draws per position in ascending order. Confidence at
    each filled position is the probability assigned to the chosen token.
    """
    if policy not in ("argmax", "sample"):
        raise DenoiserError(f"unknown fill policy {policy!r}")
    positions = state.masked_positions()
    if not positions:
        raise DenoiserError("nothing to fill")
    dists = model.predict_many(state, instance, positions)
    fills: dict[int, tuple[int, str, float]] = {}
    for pos in positions:
        probs = dists[pos]
        if policy == "argmax":
            chosen = max(range(len(probs)), key=lambda t: (probs[t], -t))
        else:
            draw = rng.random()
            cumulative = 0.0
            chosen = None
            for token_id, p in enumerate(probs):
                if p <= 0.0:
                    continue
                cumulative += p
                if draw < cumulative:
                    chosen = token_id
                    break
            if chosen is None:
                chosen = max(range(len(probs)), key=lambda t: (probs[t], -t))
        fills[pos] = (chosen, model.vocab.token(chosen), probs[chosen])
    return state.with_filled(fills)


def masked_nll(
    model: DenoiserModel,
    reference: TokenSeq,
    mask: Sequence[int],
    instance: ArgumentInstance | None,
) -> float:
    """Negative log-likelihood (nats) of reference tokens at masked positions.

    All masked positions are hidden at once, and each prediction conditions
    on the same partially masked canvas.
    """
    positions = sorted(set(mask))
    if not positions:
        raise DenoiserError("mask must be non-empty")
    for pos in positions:
        if not 0 <= pos < len(reference):
            raise DenoiserError(f"mask position {pos} outside reference of length {len(reference)}")
        if pos >= model.canvas_length:
            raise DenoiserError(
                f"mask position {pos} outside model canvas of length {model.canvas_length}"
            )
    cv = canvas(reference, model.canvas_length)
    state = SummaryState.from_reference(cv).with_masked(positions)
    dists = model.predict_many(state, instance, positions)
    total = 0.0
    for pos in positions:
        p = dists[pos][reference.ids[pos]]
        total += -math.log(p) if p > 0 else math.inf
    return total


# ---------------------------------------------------------------------------
# Persistence

ARCHIVE_FORMAT = "remask-denoiser"


def save_model(model: DenoiserModel, path: str | Path) -> None:
    """Write a self-describing archive: kind, vocabulary (with hash), parameters."""
    archive = {
        "format": ARCHIVE_FORMAT,
        "version": 1,
        "kind": model.kind,
        "canvas_length": model.canvas_length,
        "vocab_sha256": model.vocab.sha256,
        "vocabulary": model.vocab.to_text(),
        "parameters": model.parameters_payload(),
    }
    Path(path).write_text(json.dumps(archive, sort_keys=True, indent=1), encoding="utf-8")


def load_model(path: str | Path) -> tuple[DenoiserModel, Vocabulary]:
    """Load an archive, verifying the embedded vocabulary against its hash."""
    try:
        archive = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise DenoiserError(f"cannot read model archive {path}: {exc}") from exc
    if archive.get("format") != ARCHIVE_FORMAT:
        raise DenoiserError(f"{path} is not a denoiser archive")
    vocab = Vocabulary.from_text(archive["vocabulary"])
    if vocab.sha256 != archive["vocab_sha256"]:
        raise DenoiserError(f"{path}: vocabulary hash mismatch; archive is corrupt")
    kind = archive["kind"]
    length = int(archive["canvas_length"])
    params = archive["parameters"]
    if kind == "oracle":
        model: DenoiserModel = OracleDenoiser(vocab, length, params["references"])
    elif kind == "categorical":
        table = {
            tuple(int(part) for part in key.split(",")): {
                int(tid): float(count) for tid, count in row.items()
            }
            for key, row in params["table"].items()
        }
        explicit = None
        if "explicit" in params:
            explicit = {
                tuple(int(part) for part in key.split(",")): [float(v) for v in row]
                for key, row in params["explicit"].items()
            }
        model = CategoricalDenoiser(
            vocab,
            length,
            alpha=float(params["alpha"]),
            copy_bias=float(params["copy_bias"]),
            n_buckets=int(params["n_buckets"]),
            table=table,
            explicit=explicit,
        )
    else:
        raise DenoiserError(f"{path}: unknown model kind {kind!r}")
    return model, vocab

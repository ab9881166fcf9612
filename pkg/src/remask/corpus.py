"""Data ingestion, tokenization, and vocabulary management.

Instances are claim/evidence bundles; the tokenizer is a deterministic
lowercasing word-level splitter; vocabularies reserve four control tokens
at fixed indices 0..3 so mask machinery and serialization stay stable.
"""

from __future__ import annotations

import csv
import hashlib
import json
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DatasetError

MASK_ID = 0
PAD_ID = 1
UNK_ID = 2
EOS_ID = 3

MASK_TOKEN = "[MASK]"
PAD_TOKEN = "[PAD]"
UNK_TOKEN = "[UNK]"
EOS_TOKEN = "[EOS]"

RESERVED_TOKENS = (MASK_TOKEN, PAD_TOKEN, UNK_TOKEN, EOS_TOKEN)

STANCES = ("support", "oppose", "neutral")

SENTENCE_END = {".", "!", "?"}

# Fixed 50-word stopword list used by every overlap-based scorer.
STOPWORDS = frozenset(
    """a an and are as at be been but by can could do does for from had has
    have if in into is it its may might no not of on or should so such than
    that the their then there these this those to was were will with
    would""".split()
)

# A word (with internal hyphens/apostrophes kept) or a single punctuation mark.
_TOKEN_RE = re.compile(r"\w+(?:[-']\w+)*|[^\w\s]", re.UNICODE)

_PUNCT_RE = re.compile(r"^[^\w]+$", re.UNICODE)


@dataclass(frozen=True)
class ClaimUnit:
    """One claim and the evidence texts supporting it. Evidence may be empty."""

    claim: str
    evidence: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.claim or not self.claim.strip():
            raise DatasetError("claim text must be non-empty")
        object.__setattr__(self, "evidence", tuple(self.evidence))


@dataclass(frozen=True)
class ArgumentInstance:
    """A topic/stance bundle of claims with optional reference summary."""

    id: str
    topic: str
    stance: str
    claims: tuple[ClaimUnit, ...]
    reference_summary: str | None = None

    def __post_init__(self):
        if self.stance not in STANCES:
            raise DatasetError(
                f"instance {self.id!r}: stance must be one of {STANCES}, got {self.stance!r}"
            )
        claims = tuple(self.claims)
        if not claims:
            raise DatasetError(f"instance {self.id!r}: at least one claim required")
        object.__setattr__(self, "claims", claims)

    def grounding_texts(self) -> list[str]:
        """All claim and evidence texts, in order."""
        texts = []
        for unit in self.claims:
            texts.append(unit.claim)
            texts.extend(unit.evidence)
        return texts


@dataclass(frozen=True)
class TokenSeq:
    """Aligned (vocabulary id, normalized surface) pairs."""

    ids: tuple[int, ...]
    surface: tuple[str, ...]

    def __post_init__(self):
        if len(self.ids) != len(self.surface):
            raise DatasetError("TokenSeq ids and surfaces must have equal length")
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "surface", tuple(self.surface))

    def __len__(self) -> int:
        return len(self.ids)

    def text(self) -> str:
        return " ".join(self.surface)


class Vocabulary:
    """Ordered surface strings with the four reserved tokens at indices 0..3.

    Ordering of surface tokens is (frequency desc, surface asc), a pure
    function of the corpus and threshold, so two builds from the same corpus
    serialize byte-for-byte identically.
    """

    def __init__(self, tokens: Sequence[str], counts: dict[str, int]):
        if tuple(tokens[:4]) != RESERVED_TOKENS:
            raise DatasetError("vocabulary must start with the reserved tokens")
        self.tokens: tuple[str, ...] = tuple(tokens)
        self.counts: dict[str, int] = {
            tok: n for tok, n in counts.items() if tok not in RESERVED_TOKENS
        }
        self._index: dict[str, int] = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self._index) != len(self.tokens):
            raise DatasetError("vocabulary tokens must be unique")

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, surface: str) -> bool:
        return surface in self._index

    @property
    def surface_size(self) -> int:
        """Number of non-reserved tokens."""
        return len(self.tokens) - len(RESERVED_TOKENS)

    def id_of(self, surface: str) -> int:
        return self._index.get(surface, UNK_ID)

    def token(self, token_id: int) -> str:
        return self.tokens[token_id]

    def surface_ids(self) -> range:
        return range(len(RESERVED_TOKENS), len(self.tokens))

    def to_text(self) -> str:
        lines = [f"{tok}\t{self.counts.get(tok, 0)}" for tok in self.tokens]
        return "\n".join(lines) + "\n"

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def from_text(cls, text: str) -> "Vocabulary":
        tokens: list[str] = []
        counts: dict[str, int] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line:
                continue
            try:
                surface, count = line.split("\t")
                counts[surface] = int(count)
            except ValueError as exc:
                raise DatasetError(f"vocabulary line {lineno} is malformed: {line!r}") from exc
            tokens.append(surface)
        if len(tokens) < len(RESERVED_TOKENS):
            raise DatasetError("vocabulary file is missing the reserved header")
        return cls(tokens, counts)

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def tokenize(text: str, vocab: Vocabulary | None = None) -> TokenSeq:
    """Lowercase and split into word/punctuation tokens.

    With a vocabulary, out-of-vocabulary surfaces map to UNK while the true
    surface string is kept alongside. Without one, every id is UNK.
    """
    surfaces = tuple(_TOKEN_RE.findall(text.lower()))
    if vocab is None:
        ids = tuple(UNK_ID for _ in surfaces)
    else:
        ids = tuple(vocab.id_of(s) for s in surfaces)
    return TokenSeq(ids=ids, surface=surfaces)


def build_vocabulary(corpus: Iterable[str], min_count: int = 1) -> Vocabulary:
    """Count tokens over the corpus and keep those with frequency >= min_count."""
    if min_count < 1:
        raise DatasetError("min_count must be >= 1")
    counter: Counter[str] = Counter()
    for text in corpus:
        counter.update(tokenize(text).surface)
    kept = [(surface, n) for surface, n in counter.items() if n >= min_count]
    kept.sort(key=lambda item: (-item[1], item[0]))
    tokens = list(RESERVED_TOKENS) + [surface for surface, _ in kept]
    counts = {surface: n for surface, n in kept}
    return Vocabulary(tokens, counts)


def is_punctuation(surface: str) -> bool:
    return bool(_PUNCT_RE.match(surface))


def content_tokens(surfaces: Iterable[str]) -> list[str]:
    """Surface tokens that are neither stopwords nor punctuation, order kept."""
    return [s for s in surfaces if s not in STOPWORDS and not is_punctuation(s)]


def sentence_spans(surfaces: Sequence[str]) -> list[tuple[int, int]]:
    """Half-open [start, end) spans delimited after '.', '!' or '?'.

    A trailing run without terminator forms the final span; with no
    terminator at all the whole sequence is one sentence.
    """
    spans: list[tuple[int, int]] = []
    start = 0
    for i, surface in enumerate(surfaces):
        if surface in SENTENCE_END:
            spans.append((start, i + 1))
            start = i + 1
    if start < len(surfaces):
        spans.append((start, len(surfaces)))
    return spans


# ---------------------------------------------------------------------------
# Dataset loading


def _instance_from_record(record: dict, where: str) -> ArgumentInstance:
    try:
        claims = tuple(
            ClaimUnit(claim=c["claim"], evidence=tuple(c.get("evidence", ())))
            for c in record["claims"]
        )
        return ArgumentInstance(
            id=record["id"],
            topic=record["topic"],
            stance=record["stance"],
            claims=claims,
            reference_summary=record.get("summary"),
        )
    except DatasetError as exc:
        raise DatasetError(f"{where}: {exc}") from exc
    except (KeyError, TypeError) as exc:
        raise DatasetError(f"{where}: missing or malformed field ({exc})") from exc


def _load_claims_json(path: Path) -> list[ArgumentInstance]:
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        raise DatasetError(f"{path}: empty dataset")
    records: list[tuple[dict, str]] = []
    try:
        document = json.loads(text)
    except json.JSONDecodeError:
        document = None
    if isinstance(document, dict):
        records.append((document, f"{path}: record 1"))
    elif isinstance(document, list):
        for i, rec in enumerate(document, start=1):
            records.append((rec, f"{path}: record {i}"))
    else:
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                records.append((json.loads(line), f"{path}: line {lineno}"))
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from exc
    if not records:
        raise DatasetError(f"{path}: empty dataset")
    instances = [_instance_from_record(rec, where) for rec, where in records]
    return instances


PAIRS_HEADER = ["topic", "stance", "key_point", "argument"]


def _load_pairs_csv(path: Path) -> list[ArgumentInstance]:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty dataset") from None
        if [h.strip() for h in header] != PAIRS_HEADER:
            raise DatasetError(
                f"{path}: expected header {','.join(PAIRS_HEADER)}, got {','.join(header)}"
            )
        # (topic, stance) -> key_point -> [arguments], insertion ordered
        groups: dict[tuple[str, str], dict[str, list[str]]] = {}
        rows = 0
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 4:
                raise DatasetError(f"{path}: line {lineno}: expected 4 fields, got {len(row)}")
            topic, stance, key_point, argument = (cell.strip() for cell in row)
            if not key_point:
                raise DatasetError(f"{path}: line {lineno}: empty key_point")
            claims = groups.setdefault((topic, stance), {})
            claims.setdefault(key_point, [])
            if argument:
                claims[key_point].append(argument)
            rows += 1
    if rows == 0:
        raise DatasetError(f"{path}: empty dataset")
    instances = []
    for i, ((topic, stance), claims) in enumerate(groups.items()):
        units = tuple(
            ClaimUnit(claim=key_point, evidence=tuple(args)) for key_point, args in claims.items()
        )
        instances.append(
            ArgumentInstance(id=f"pairs-{i:04d}", topic=topic, stance=stance, claims=units)
        )
    return instances


def load_dataset(path: str | Path, format: str = "claims_json") -> list[ArgumentInstance]:
    """Load instances from a file in ``claims_json`` or ``pairs_csv`` format.

    Order is preserved; duplicate ids and malformed records raise
    ``DatasetError`` naming the offending line or record.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"{path}: no such file")
    if format == "claims_json":
        instances = _load_claims_json(path)
    elif format == "pairs_csv":
        instances = _load_pairs_csv(path)
    else:
        raise DatasetError(f"unknown dataset format {format!r}")
    seen: set[str] = set()
    for inst in instances:
        if inst.id in seen:
            raise DatasetError(f"{path}: duplicate instance id {inst.id!r}")
        seen.add(inst.id)
    return instances


def instance_to_record(instance: ArgumentInstance) -> dict:
    record = {
        "id": instance.id,
        "topic": instance.topic,
        "stance": instance.stance,
        "claims": [
            {"claim": unit.claim, "evidence": list(unit.evidence)} for unit in instance.claims
        ],
    }
    if instance.reference_summary is not None:
        record["summary"] = instance.reference_summary
    return record


def save_dataset(instances: Sequence[ArgumentInstance], path: str | Path) -> None:
    """Write instances as claims_json JSON-lines."""
    lines = [json.dumps(instance_to_record(inst), sort_keys=True) for inst in instances]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def instance_text_pool(instances: Iterable[ArgumentInstance]) -> list[str]:
    """Every text carried by the instances: topics, claims, evidence, summaries."""
    texts: list[str] = []
    for inst in instances:
        texts.append(inst.topic)
        texts.extend(inst.grounding_texts())
        if inst.reference_summary:
            texts.append(inst.reference_summary)
    return texts


def split_by_topic_hash(
    instances: Sequence[ArgumentInstance], test_fraction: float, salt: str = ""
) -> tuple[list[ArgumentInstance], list[ArgumentInstance]]:
    """Deterministic topic-level split: all instances of a topic land together.

    Topics are assigned to the test side when the hash of ``salt:topic`` falls
    below ``test_fraction``. The exact per-topic assignment of any published
    benchmark split cannot be recovered this way; this is a reproducible
    stand-in.
    """
    if not 0.0 <= test_fraction <= 1.0:
        raise DatasetError("test_fraction must be in [0, 1]")
    train: list[ArgumentInstance] = []
    test: list[ArgumentInstance] = []
    for inst in instances:
        digest = hashlib.sha256(f"{salt}:{inst.topic}".encode("utf-8")).digest()
        bucket = int.from_bytes(digest[:4], "big") / 2**32
        (test if bucket < test_fraction else train).append(inst)
    return train, test

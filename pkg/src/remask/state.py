"""The fixed-length summary canvas that diffusion generation operates on.

A state is an immutable snapshot: token ids, aligned surfaces, per-position
mask flags, and the probability the denoiser assigned at the most recent
fill. Masked positions always carry the MASK id and a confidence pinned to
0.0; positions that were never produced by a model (reference tokens, EOS,
PAD) carry 1.0.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Mapping

from .corpus import EOS_ID, EOS_TOKEN, MASK_ID, MASK_TOKEN, PAD_ID, PAD_TOKEN, TokenSeq
from .errors import DenoiserError


def canvas(seq: TokenSeq, length: int) -> TokenSeq:
    """Lay a token sequence onto a fixed-length canvas.

    Sequences shorter than the canvas get one EOS then PAD to the end;
    longer sequences are truncated (no EOS fits).
    """
    if length < 1:
        raise DenoiserError("canvas length must be >= 1")
    ids = list(seq.ids[:length])
    surfaces = list(seq.surface[:length])
    if len(ids) < length:
        ids.append(EOS_ID)
        surfaces.append(EOS_TOKEN)
    while len(ids) < length:
        ids.append(PAD_ID)
        surfaces.append(PAD_TOKEN)
    return TokenSeq(ids=tuple(ids), surface=tuple(surfaces))


@dataclass(frozen=True)
class SummaryState:
    ids: tuple[int, ...]
    surface: tuple[str, ...]
    masked: tuple[bool, ...]
    confidence: tuple[float, ...]

    def __post_init__(self):
        n = len(self.ids)
        if not (len(self.surface) == len(self.masked) == len(self.confidence) == n):
            raise DenoiserError("state arrays must have equal length")
        for i, flag in enumerate(self.masked):
            if flag and self.ids[i] != MASK_ID:
                raise DenoiserError(f"masked position {i} must carry the MASK id")

    def __len__(self) -> int:
        return len(self.ids)

    @classmethod
    def fully_masked(cls, length: int) -> "SummaryState":
        if length < 1:
            raise DenoiserError("state length must be >= 1")
        return cls(
            ids=(MASK_ID,) * length,
            surface=(MASK_TOKEN,) * length,
            masked=(True,) * length,
            confidence=(0.0,) * length,
        )

    @classmethod
    def from_reference(cls, seq: TokenSeq) -> "SummaryState":
        if len(seq) < 1:
            raise DenoiserError("cannot build a state from an empty sequence")
        n = len(seq)
        return cls(ids=seq.ids, surface=seq.surface, masked=(False,) * n, confidence=(1.0,) * n)

    def masked_positions(self) -> tuple[int, ...]:
        return tuple(i for i, flag in enumerate(self.masked) if flag)

    @property
    def fully_unmasked(self) -> bool:
        return not any(self.masked)

    def first_eos(self) -> int | None:
        """Index of the first visible EOS, or None."""
        for i, token_id in enumerate(self.ids):
            if not self.masked[i] and token_id == EOS_ID:
                return i
        return None

    def surface_region(self) -> range:
        """Positions before the first visible EOS (the whole canvas if none)."""
        eos = self.first_eos()
        return range(len(self)) if eos is None else range(eos)

    def with_masked(self, positions: Iterable[int]) -> "SummaryState":
        """Return a copy with the given positions re-masked."""
        ids = list(self.ids)
        surfaces = list(self.surface)
        masked = list(self.masked)
        confidence = list(self.confidence)
        for pos in positions:
            if not 0 <= pos < len(ids):
                raise DenoiserError(f"position {pos} outside canvas of length {len(ids)}")
            ids[pos] = MASK_ID
            surfaces[pos] = MASK_TOKEN
            masked[pos] = True
            confidence[pos] = 0.0
        return SummaryState(tuple(ids), tuple(surfaces), tuple(masked), tuple(confidence))

    def with_filled(self, fills: Mapping[int, tuple[int, str, float]]) -> "SummaryState":
        """Return a copy with masked positions filled as {pos: (id, surface, p)}."""
        ids = list(self.ids)
        surfaces = list(self.surface)
        masked = list(self.masked)
        confidence = list(self.confidence)
        for pos, (token_id, surface, prob) in fills.items():
            if not masked[pos]:
                raise DenoiserError(f"position {pos} is not masked")
            ids[pos] = token_id
            surfaces[pos] = surface
            masked[pos] = False
            confidence[pos] = prob
        return SummaryState(tuple(ids), tuple(surfaces), tuple(masked), tuple(confidence))

    def digest(self) -> str:
        """Content hash binding scores or plans to this exact state.

        Hashes surfaces as well as ids: without a vocabulary all ids collapse
        to UNK, and the surfaces are what distinguish the states."""
        material = "\x1f".join(
            f"{tid}:{surface}:{int(flag)}"
            for tid, surface, flag in zip(self.ids, self.surface, self.masked)
        )
        return hashlib.sha256(material.encode("utf-8")).hexdigest()

    def read_out(self) -> tuple[str, ...]:
        """Surface tokens up to the first EOS or PAD. Requires no masks."""
        if not self.fully_unmasked:
            raise DenoiserError("cannot read out a state with masked positions")
        out: list[str] = []
        for token_id, surface in zip(self.ids, self.surface):
            if token_id in (EOS_ID, PAD_ID):
                break
            out.append(surface)
        return tuple(out)

    def to_text(self) -> str:
        return " ".join(self.read_out())

"""Shared fixtures: a small vaccination-debate dataset for realistic-text
tests and a deterministic synthetic corpus generator whose references have
disjoint per-sentence content (so conciseness stays exactly 1.0 and
off-topic injections are cleanly detectable)."""

from __future__ import annotations

import pytest

from remask.corpus import ArgumentInstance, ClaimUnit, build_vocabulary, instance_text_pool
from remask.denoiser import TrainConfig, train_denoiser, training_pairs

VACCINATION_RECORD = {
    "id": "vacc-0001",
    "topic": "Routine child vaccinations should be mandatory",
    "stance": "oppose",
    "claims": [
        {
            "claim": "Vaccines or their side effects may be dangerous",
            "evidence": [
                "Rotashield was withdrawn after being linked to bowel obstruction",
                "CDC reports rare risks like pneumonia (chickenpox vaccine) and"
                " Guillain-Barré Syndrome (flu vaccine)",
            ],
        },
        {
            "claim": "Mandatory vaccination violates basic rights",
            "evidence": [
                "The First Amendment protects religious freedom",
                "Compulsory vaccination interferes with bodily integrity, violating"
                " international human rights conventions",
            ],
        },
    ],
    "summary": "Mandatory child vaccinations raise health and ethical concerns."
    " Historical cases like Rotashield and CDC findings highlight medical risks."
    " Moreover, opponents argue that such mandates may infringe on personal freedoms"
    " and human rights, suggesting vaccination should remain a personal choice guided"
    " by awareness rather than coercion.",
}


def make_vaccination_instance() -> ArgumentInstance:
    record = VACCINATION_RECORD
    return ArgumentInstance(
        id=record["id"],
        topic=record["topic"],
        stance=record["stance"],
        claims=tuple(
            ClaimUnit(claim=c["claim"], evidence=tuple(c["evidence"])) for c in record["claims"]
        ),
        reference_summary=record["summary"],
    )


@pytest.fixture
def vaccination_instance() -> ArgumentInstance:
    return make_vaccination_instance()


@pytest.fixture
def vaccine_dataset(vaccination_instance) -> list[ArgumentInstance]:
    uniforms = ArgumentInstance(
        id="unif-0001",
        topic="School uniforms should be required",
        stance="support",
        claims=(
            ClaimUnit(
                "Uniforms reduce social pressure among students",
                ("Studies report lower bullying rates in uniformed schools",),
            ),
        ),
        reference_summary="Uniforms reduce social pressure."
        " Schools with uniforms report lower bullying rates.",
    )
    return [vaccination_instance, uniforms]


_GREEK = (
    "alpha", "beta", "gamma", "delta",
    "epsilon", "zeta", "eta", "theta",
    "iota", "kappa", "omega", "sigma",
)


def synthetic_instance(index: int) -> ArgumentInstance:
    """Three claims, three one-sentence-per-claim reference sentences.

    Every content word carries the instance index as a suffix, so content is
    disjoint across instances and across the sentences of one reference.
    """
    words = [f"{w}{index}" for w in _GREEK]
    claims = []
    sentences = []
    for j in range(3):
        a, b, c, d = words[4 * j : 4 * j + 4]
        claims.append(
            ClaimUnit(
                claim=f"{a} {b} is vital",
                evidence=(f"{c} shows {a} {b} works", f"{d} backs {a} {b}"),
            )
        )
        sentences.append(f"{a} {b} can {c} {d} .")
    return ArgumentInstance(
        id=f"syn-{index:03d}",
        topic=f"synthetic topic {index}",
        stance="support",
        claims=tuple(claims),
        reference_summary=" ".join(sentences),
    )


def synthetic_corpus(n: int) -> list[ArgumentInstance]:
    return [synthetic_instance(i) for i in range(n)]


def injected_summary(instance: ArgumentInstance, index: int) -> str:
    """The reference with its middle sentence replaced by off-topic noise of
    the same token count, keeping canvas positions aligned."""
    sentences = instance.reference_summary.split(" . ")
    noise = f"junka{index} junkb{index} can junkc{index} junkd{index}"
    sentences[1] = noise
    return " . ".join(sentences)


@pytest.fixture(scope="session")
def trained_synthetic():
    """A 6-instance synthetic corpus with vocab plus trained categorical and
    oracle denoisers (canvas 24)."""
    corpus = synthetic_corpus(6)
    vocab = build_vocabulary(instance_text_pool(corpus))
    pairs = training_pairs(corpus, vocab)
    categorical, _ = train_denoiser(
        pairs, vocab, TrainConfig(epochs=20, seed=9, canvas_length=24)
    )
    oracle, _ = train_denoiser(
        pairs, vocab, TrainConfig(model_kind="oracle", canvas_length=24)
    )
    return corpus, vocab, categorical, oracle

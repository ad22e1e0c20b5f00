"""Seeded synthetic corpus generator.

The entity task is built so its auxiliary columns are genuinely
informative: templates place a slot word whose correct entity tag depends
on the word's hidden class (invented drug names vs. look-alike non-drug
nouns vs. condition terms), and the POS / medical-NER columns label that
class densely on every occurrence.  Each class vocabulary is split in
half: the "held" half never appears inside an entity-bearing frame in the
training corpus, only in neutral frames (where all entity tags are O),
while the dev corpus uses mostly held words in entity frames.  A tagger
that only sees the entity column has no way to learn the class of a held
word; the auxiliary tasks see it on every occurrence.

Discontinuous adverse-event templates ("shoulder and knee pain ...")
exercise the BIOHD scheme; with scheme="bio" those templates are skipped.
Output is byte-identical for a given seed across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import Mention, encode
from .data import SentenceRecord

_SYLLABLES = [
    "zo", "ra", "vel", "dor", "mi", "tex", "bra", "cu", "pol", "ny",
    "qua", "fen", "lu", "sor", "ga", "pri", "xa", "tol", "ke", "rin",
]

VERBS_TAKE = ["took", "takes", "take", "started"]
NUMS = ["1", "2", "3", "5", "10", "20", "40", "100", "250", "500"]
DOSE_UNITS = ["mg", "ml", "mcg", "tablets", "capsules", "drops"]
FREQ_WORDS = ["daily", "weekly", "nightly", "hourly"]
PER_WORDS = ["daily", "weekly"]
BODY_PARTS = ["shoulder", "knee", "hip", "wrist", "ankle", "elbow", "neck", "jaw"]
SYMPTOM_HEADS = ["pain", "swelling", "cramps", "numbness", "stiffness", "rash"]

_POS_FIXED = {
    "the": "DET", "a": "DET", "both": "DET",
    "for": "ADP", "with": "ADP", "in": "ADP", "about": "ADP", "after": "ADP",
    "and": "CCONJ",
    "was": "AUX", "were": "AUX",
    "yesterday": "ADV", "today": "ADV",
    "patient": "NOUN", "doctor": "NOUN", "notes": "NOUN", "times": "NOUN",
    "mentioned": "VERB", "discussed": "VERB", "caused": "VERB", "felt": "VERB",
}


@dataclass
class SynthVocab:
    drugs: list[str]
    drugs_held: list[str]
    others: list[str]
    others_held: list[str]
    conds: list[str]
    conds_held: list[str]

    def pos_of(self, token: str) -> str:
        if token in _POS_FIXED:
            return _POS_FIXED[token]
        if token in VERBS_TAKE:
            return "VERB"
        if token in NUMS:
            return "NUM"
        if token in FREQ_WORDS:
            return "ADV"
        if token in self.drugs or token in self.drugs_held:
            return "PROPN"
        return "NOUN"

    def medner_of(self, token: str) -> str:
        if token in self.drugs or token in self.drugs_held:
            return "B-CHEM"
        if token in self.conds or token in self.conds_held:
            return "B-COND"
        if token in SYMPTOM_HEADS:
            return "B-COND"
        if token in BODY_PARTS:
            return "B-ANAT"
        return "O"


def _fake_words(rng: np.random.Generator, count: int) -> list[str]:
    words = []
    seen = set(_POS_FIXED) | set(VERBS_TAKE) | set(BODY_PARTS) | set(SYMPTOM_HEADS)
    while len(words) < count:
        n = 2 + int(rng.integers(0, 2))
        word = "".join(_SYLLABLES[int(i)] for i in rng.integers(0, len(_SYLLABLES), n))
        if word not in seen:
            seen.add(word)
            words.append(word)
    return words


def _build_vocab(rng: np.random.Generator) -> SynthVocab:
    names = _fake_words(rng, 96)
    drugs, others, conds = names[:32], names[32:64], names[64:96]
    return SynthVocab(
        drugs=drugs[:16], drugs_held=drugs[16:],
        others=others[:16], others_held=others[16:],
        conds=conds[:16], conds_held=conds[16:],
    )


def _pick(rng, seq):
    return seq[int(rng.integers(0, len(seq)))]


class _Sampler:
    """Draws slot words; ``held_frac`` picks from the held half."""

    def __init__(self, rng, vocab: SynthVocab, held_frac: float):
        self.rng = rng
        self.vocab = vocab
        self.held_frac = held_frac

    def _slot(self, normal, held):
        if self.rng.random() < self.held_frac:
            return _pick(self.rng, held)
        return _pick(self.rng, normal)

    def drug_or_other(self):
        if self.rng.random() < 0.5:
            return self._slot(self.vocab.drugs, self.vocab.drugs_held), "drug"
        return self._slot(self.vocab.others, self.vocab.others_held), "other"

    def cond_or_other(self):
        if self.rng.random() < 0.5:
            return self._slot(self.vocab.conds, self.vocab.conds_held), "cond"
        return self._slot(self.vocab.others, self.vocab.others_held), "other"

    def any_noun(self):
        roll = self.rng.random()
        if roll < 1 / 3:
            return self._slot(self.vocab.drugs, self.vocab.drugs_held)
        if roll < 2 / 3:
            return self._slot(self.vocab.others, self.vocab.others_held)
        return self._slot(self.vocab.conds, self.vocab.conds_held)


def _event_templates(rng, sam: _Sampler, allow_discontinuous: bool):
    """One entity-bearing sentence: (tokens, mentions)."""
    choices = [0, 1, 2, 3]
    if allow_discontinuous:
        choices += [4, 5]
    t = _pick(rng, choices)
    mentions: list[Mention] = []

    if t == 0:
        x, cls = sam.drug_or_other()
        tokens = [_pick(rng, VERBS_TAKE), x, _pick(rng, NUMS), _pick(rng, DOSE_UNITS), _pick(rng, FREQ_WORDS)]
        if cls == "drug":
            mentions.append(Mention("Drug", [(1, 2)]))
        mentions.append(Mention("Dosage", [(2, 4)]))
        mentions.append(Mention("Frequency", [(4, 5)]))
    elif t == 1:
        x, xcls = sam.drug_or_other()
        y, ycls = sam.cond_or_other()
        tokens = ["patient", _pick(rng, VERBS_TAKE), x, "for", y]
        if xcls == "drug":
            mentions.append(Mention("Drug", [(2, 3)]))
        if ycls == "cond":
            mentions.append(Mention("Reason", [(4, 5)]))
    elif t == 2:
        x, cls = sam.drug_or_other()
        tokens = [_pick(rng, VERBS_TAKE), x, _pick(rng, NUMS), _pick(rng, DOSE_UNITS),
                  _pick(rng, NUMS), "times", _pick(rng, PER_WORDS)]
        if cls == "drug":
            mentions.append(Mention("Drug", [(1, 2)]))
        mentions.append(Mention("Dosage", [(2, 4)]))
        mentions.append(Mention("Frequency", [(4, 7)]))
    elif t == 3:
        x, cls = sam.drug_or_other()
        tokens = [x, "caused", _pick(rng, BODY_PARTS), _pick(rng, SYMPTOM_HEADS)]
        if cls == "drug":
            mentions.append(Mention("Drug", [(0, 1)]))
        mentions.append(Mention("ADE", [(2, 4)]))
    elif t == 4:
        x, cls = sam.drug_or_other()
        loc1, loc2 = _pick(rng, BODY_PARTS), _pick(rng, BODY_PARTS)
        while loc2 == loc1:
            loc2 = _pick(rng, BODY_PARTS)
        tokens = [loc1, "and", loc2, _pick(rng, SYMPTOM_HEADS), "after", x]
        mentions.append(Mention("ADE", [(0, 1), (3, 4)]))
        mentions.append(Mention("ADE", [(2, 3), (3, 4)]))
        if cls == "drug":
            mentions.append(Mention("Drug", [(5, 6)]))
    else:
        tokens = [_pick(rng, SYMPTOM_HEADS), "felt", "in", "both", _pick(rng, BODY_PARTS)]
        mentions.append(Mention("ADE", [(0, 1), (4, 5)]))
    return tokens, mentions


def _neutral_templates(rng, sam: _Sampler):
    t = int(rng.integers(0, 3))
    if t == 0:
        return ["the", sam.any_noun(), "was", "mentioned", "yesterday"]
    if t == 1:
        return ["doctor", "discussed", sam.any_noun(), "with", "patient"]
    return ["notes", "about", sam.any_noun(), "and", sam.any_noun()]


def _to_record(tokens, mentions, vocab: SynthVocab, scheme: str, provenance: str) -> SentenceRecord:
    tags = encode(mentions, len(tokens), scheme)
    return SentenceRecord(
        tokens=list(tokens),
        pos_tags=[vocab.pos_of(t) for t in tokens],
        medner_tags=[vocab.medner_of(t) for t in tokens],
        entity_tags=list(tags.tags),
        provenance=provenance,
    )


def generate_corpus(
    seed: int,
    n_sentences: int,
    scheme: str = "biohd",
    *,
    n_dev: int = 0,
    neutral_frac: float = 0.45,
) -> tuple[list[SentenceRecord], list[SentenceRecord]]:
    """Training corpus plus an optional held-vocabulary dev corpus.

    Training entity frames use only the visible half of each class
    vocabulary; neutral frames prefer the held half, and every held word
    is forced to appear at least once so dev-time words are all trained.
    Dev entity frames draw mostly from the held half.
    """
    rng = np.random.default_rng(np.random.PCG64(seed))
    vocab = _build_vocab(rng)
    allow_disc = scheme == "biohd"

    train: list[SentenceRecord] = []
    train_event = _Sampler(rng, vocab, held_frac=0.0)
    train_neutral = _Sampler(rng, vocab, held_frac=0.65)
    for i in range(n_sentences):
        if rng.random() < neutral_frac:
            tokens, mentions = _neutral_templates(rng, train_neutral), []
        else:
            tokens, mentions = _event_templates(rng, train_event, allow_disc)
        train.append(_to_record(tokens, mentions, vocab, scheme, f"train{i}"))

    dev: list[SentenceRecord] = []
    if n_dev:
        covered = {t for rec in train for t in rec.tokens}
        held = vocab.drugs_held + vocab.others_held + vocab.conds_held
        for j, word in enumerate(w for w in held if w not in covered):
            train.append(
                _to_record(["the", word, "was", "mentioned", "today"], [], vocab, scheme, f"cover{j}")
            )
        dev_event = _Sampler(rng, vocab, held_frac=0.7)
        for i in range(n_dev):
            tokens, mentions = _event_templates(rng, dev_event, allow_disc)
            dev.append(_to_record(tokens, mentions, vocab, scheme, f"dev{i}"))
    return train, dev

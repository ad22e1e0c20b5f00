"""Joint training: Adam over the summed task losses, dev-F early stopping.

A mini-batch is processed one sentence at a time (the numeric core is
strictly rank-2) and the per-task negative log-likelihoods are pooled so
the batch loss is the per-token mean across the whole batch, matching the
padded-batch formulation without paying for padding.  Gradients clip per
tensor at a fixed safety norm, which keeps parameter trajectories of
independent encoders independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tensor as tz
from .codec import decode
from .cross import ASPECT_ORDER
from .data import SentenceRecord, Vocab
from .errors import ConfigError, DataError
from .metrics import ScoreReport, micro_f
from .model import MultiAspectModel, substream
from .tensor import Tensor


class Adam:
    """Standard Adam with bias correction and per-tensor norm clipping."""

    def __init__(self, params: dict[str, Tensor], lr: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8, clip_norm: float | None = 10.0):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.clip_norm = clip_norm
        self.step_count = 0
        self.m = {name: np.zeros_like(p.data) for name, p in params.items()}
        self.v = {name: np.zeros_like(p.data) for name, p in params.items()}

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad[...] = 0.0

    def step(self) -> None:
        self.step_count += 1
        t = self.step_count
        correct1 = 1.0 - self.beta1 ** t
        correct2 = 1.0 - self.beta2 ** t
        for name, p in self.params.items():
            g = p.grad
            if self.clip_norm is not None:
                norm = float(np.sqrt((g.astype(np.float64) ** 2).sum()))
                if norm > self.clip_norm:
                    g = g * (p.data.dtype.type(self.clip_norm / norm))
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            m_hat = m / correct1
            v_hat = v / correct2
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class EncodedSentence:
    ids: np.ndarray
    golds: dict[str, np.ndarray]


@dataclass
class TrainResult:
    history: list[dict] = field(default_factory=list)
    best_epoch: int = 0
    best_dev_f: float | None = None
    stopped_epoch: int = 0


def build_label_vocabs(records, aspects, scheme: str) -> dict[str, list[str]]:
    """Label inventory per task; 'O' is pinned to index 0 where present."""
    vocabs: dict[str, list[str]] = {}
    for a in aspects:
        seen = set()
        for rec in records:
            seen.update(t for t in rec.column(a) if t != "_")
        ordered = (["O"] if "O" in seen else []) + sorted(seen - {"O"})
        vocabs[a] = ordered
    return vocabs


def encode_for_training(records, token_vocab: Vocab, label_vocabs: dict[str, list[str]],
                        aspects) -> list[EncodedSentence]:
    label_index = {a: {t: i for i, t in enumerate(label_vocabs[a])} for a in aspects}
    encoded = []
    for rec in records:
        golds = {}
        for a in aspects:
            column = rec.column(a)
            if "_" in column:
                raise ConfigError(
                    f"aspect {a!r} is active but sentence {rec.provenance!r} has '_' in its column"
                )
            try:
                golds[a] = np.array([label_index[a][t] for t in column], dtype=np.int64)
            except KeyError as err:
                raise DataError(
                    f"sentence {rec.provenance!r}: label {err.args[0]!r} missing from the "
                    f"{a} label vocabulary"
                ) from None
        encoded.append(EncodedSentence(ids=token_vocab.record_ids(rec), golds=golds))
    return encoded


def batch_loss(model: MultiAspectModel, batch: list[EncodedSentence]) -> Tensor:
    """Joint loss over a batch: per-token mean NLL per task, weighted sum."""
    sums: dict[str, list[Tensor]] = {a: [] for a in model.aspects}
    counts: dict[str, int] = {a: 0 for a in model.aspects}
    for sent in batch:
        if len(sent.ids) == 0:
            continue
        dists = model.forward(sent.ids, training=True)
        for a in model.aspects:
            sums[a].append(tz.cross_entropy(dists[a], sent.golds[a], reduction="sum"))
            counts[a] += len(sent.ids)
    terms = []
    for a in model.aspects:
        if not sums[a]:
            continue
        weight = model.config.loss_weights[ASPECT_ORDER.index(a)]
        terms.append(tz.scale(tz.add_all(sums[a]), weight / max(1, counts[a])))
    if not terms:
        return tz.scale(tz.constant([[0.0]], dtype=model.dtype), 1.0)
    return tz.add_all(terms)


def predict_tags(model: MultiAspectModel, records, token_vocab: Vocab) -> list[list[str]]:
    return [
        model.predict_entity_tags(token_vocab.record_ids(rec)) if len(rec) else []
        for rec in records
    ]


def evaluate(model: MultiAspectModel, records, token_vocab: Vocab, mode: str = "strict") -> ScoreReport:
    scheme = model.config.scheme
    gold_docs = [decode(rec.entity_tags, scheme) for rec in records]
    pred_docs = [decode(tags, scheme) for tags in predict_tags(model, records, token_vocab)]
    return micro_f(gold_docs, pred_docs, mode)


def train_model(
    model: MultiAspectModel,
    train_records: list[SentenceRecord],
    token_vocab: Vocab,
    dev_records: list[SentenceRecord] | None = None,
    on_epoch=None,
) -> TrainResult:
    """Fit in place; with a dev set, early-stop on strict F and restore the
    best parameters at the end.  Deterministic given the config seed."""
    cfg = model.config
    encoded = encode_for_training(train_records, token_vocab, model.label_vocabs, model.aspects)
    optimizer = Adam(model.parameters(), lr=cfg.lr, clip_norm=cfg.clip_norm)
    shuffle_rng = substream(cfg.seed, "shuffle")
    result = TrainResult()
    best_state = None
    bad_epochs = 0

    for epoch in range(1, cfg.max_epochs + 1):
        order = shuffle_rng.permutation(len(encoded))
        losses = []
        for start in range(0, len(order), cfg.batch_size):
            batch = [encoded[i] for i in order[start : start + cfg.batch_size]]
            optimizer.zero_grad()
            loss = batch_loss(model, batch)
            tz.backward(loss)
            optimizer.step()
            losses.append(loss.item())
        row = {"epoch": epoch, "train_loss": float(np.mean(losses)) if losses else 0.0}
        if dev_records is not None:
            dev_f = evaluate(model, dev_records, token_vocab, mode="strict").micro.f
            row["dev_strict_f"] = dev_f
            if result.best_dev_f is None or dev_f > result.best_dev_f:
                result.best_dev_f = dev_f
                result.best_epoch = epoch
                best_state = model.state_snapshot()
                bad_epochs = 0
            else:
                bad_epochs += 1
        result.history.append(row)
        if on_epoch is not None:
            on_epoch(row)
        result.stopped_epoch = epoch
        if dev_records is not None and bad_epochs >= cfg.patience:
            break
    if best_state is not None:
        model.load_snapshot(best_state)
    return result

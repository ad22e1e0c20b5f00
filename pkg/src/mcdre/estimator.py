"""Scikit-learn style front door: fit on sentence records, predict tags.

The tagger follows the estimator protocol (constructor stores
hyperparameters verbatim, ``fit`` learns state into ``*_`` attributes,
``get_params``/``set_params`` come from ``BaseEstimator``), so it clones
and composes like any other estimator.  ``X`` is a list of
:class:`~mcdre.data.SentenceRecord`; ``y`` is unused because the records
carry their own label columns.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .checkpoint import load_model, save_model
from .codec import decode
from .config import RunConfig
from .data import SentenceRecord, Vocab, load_embeddings
from .errors import DataError
from .metrics import ScoreReport, breakdown_report
from .model import MultiAspectModel
from .training import TrainResult, evaluate, train_model


class MultiAspectTagger(BaseEstimator):
    """Sequence tagger with three coupled task encoders.

    Parameters mirror :class:`~mcdre.config.RunConfig`; see that class for
    semantics and defaults.
    """

    def __init__(
        self,
        d_model: int = 128,
        n_heads: int = 4,
        n_layers: int = 2,
        d_ff: int | None = None,
        dropout: float = 0.5,
        lr: float = 4e-4,
        batch_size: int = 32,
        seed: int = 0,
        cross_mode: str = "kv",
        active_aspects: tuple = ("se", "sy", "do"),
        cross_layers: str = "all",
        include_own: bool = False,
        scheme: str = "biohd",
        embedding: str = "trainable",
        patience: int = 10,
        max_epochs: int = 300,
        loss_weights: tuple = (1.0, 1.0, 1.0),
        clip_norm: float | None = 10.0,
    ):
        self.d_model = d_model
        self.n_heads = n_heads
        self.n_layers = n_layers
        self.d_ff = d_ff
        self.dropout = dropout
        self.lr = lr
        self.batch_size = batch_size
        self.seed = seed
        self.cross_mode = cross_mode
        self.active_aspects = active_aspects
        self.cross_layers = cross_layers
        self.include_own = include_own
        self.scheme = scheme
        self.embedding = embedding
        self.patience = patience
        self.max_epochs = max_epochs
        self.loss_weights = loss_weights
        self.clip_norm = clip_norm

    @classmethod
    def from_config(cls, config: RunConfig) -> "MultiAspectTagger":
        return cls(**{key: getattr(config, key) for key in RunConfig._KEYS})

    def build_config(self) -> RunConfig:
        return RunConfig(**{key: getattr(self, key) for key in RunConfig._KEYS})

    # -- estimator protocol ---------------------------------------------------

    def fit(self, X, y=None, dev=None, on_epoch=None) -> "MultiAspectTagger":
        """Train on sentence records; ``dev`` enables early stopping."""
        from .training import build_label_vocabs  # local to keep import cheap

        records = list(X)
        if not records:
            raise DataError("cannot fit on an empty corpus")
        config = self.build_config()
        external = None
        if config.embedding == "trainable":
            token_vocab = Vocab.build([rec.tokens for rec in records])
        else:
            path = config.embedding.split(":", 1)[1]
            external, token_vocab = load_embeddings(path)
        label_vocabs = build_label_vocabs(records, config.active_aspects, config.scheme)
        model = MultiAspectModel(
            config,
            vocab_size=len(token_vocab),
            label_vocabs=label_vocabs,
            external_weights=external,
            unk_id=token_vocab.unk_id,
        )
        result = train_model(model, records, token_vocab, dev_records=dev, on_epoch=on_epoch)
        self.model_: MultiAspectModel = model
        self.token_vocab_: Vocab = token_vocab
        self.label_vocabs_ = model.label_vocabs
        self.train_result_: TrainResult = result
        self.history_ = result.history
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "model_"):
            raise NotFittedError("this MultiAspectTagger is not fitted; call fit or load first")

    @staticmethod
    def _as_records(X) -> list[SentenceRecord]:
        records = []
        for i, item in enumerate(X):
            if isinstance(item, SentenceRecord):
                records.append(item)
            else:
                toks = list(item)
                records.append(
                    SentenceRecord(toks, ["_"] * len(toks), ["_"] * len(toks), ["_"] * len(toks), f"s{i}")
                )
        return records

    def predict(self, X) -> list[list[str]]:
        """Entity tag sequences from the semantic head, one per sentence."""
        self._check_fitted()
        records = self._as_records(X)
        return [
            self.model_.predict_entity_tags(self.token_vocab_.record_ids(rec)) if len(rec) else []
            for rec in records
        ]

    def predict_mentions(self, X):
        self._check_fitted()
        return [decode(tags, self.model_.config.scheme) for tags in self.predict(X)]

    def score(self, X, y=None) -> float:
        """Strict span-level micro F against the records' entity columns."""
        self._check_fitted()
        return evaluate(self.model_, list(X), self.token_vocab_, mode="strict").micro.f

    def score_report(self, X, mode: str = "strict") -> ScoreReport:
        self._check_fitted()
        records = list(X)
        scheme = self.model_.config.scheme
        gold = [decode(rec.entity_tags, scheme) for rec in records]
        pred = [decode(tags, scheme) for tags in self.predict(records)]
        return breakdown_report(gold, pred, mode)

    # -- persistence ----------------------------------------------------------

    def save(self, path) -> None:
        self._check_fitted()
        save_model(path, self.model_, self.token_vocab_)

    @classmethod
    def load(cls, path) -> "MultiAspectTagger":
        model, token_vocab = load_model(path)
        est = cls.from_config(model.config)
        est.model_ = model
        est.token_vocab_ = token_vocab
        est.label_vocabs_ = model.label_vocabs
        est.history_ = []
        return est

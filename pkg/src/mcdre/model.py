"""The full multi-aspect model: shared embedding, up to three encoder
stacks (se = entity tagging, sy = POS, do = medical NER), per-task softmax
heads and the joint loss.

The semantic head's argmax is the deliverable; the other heads exist to
supervise their encoders.  Random state is split into named substreams
(one init stream per aspect, one dropout stream per aspect, one for the
shared embedding) so that an encoder's parameters and dropout draws do not
depend on which other aspects are active — that is what makes a joint
no-exchange run reproduce a standalone single-encoder run exactly.
"""

from __future__ import annotations

import zlib

import numpy as np

from . import tensor as tz
from .config import RunConfig
from .cross import ASPECT_ORDER, CrossMode, wire_step
from .encoder import (
    AttentionHeadParams,
    EmbeddingTable,
    EncoderLayerParams,
    embed,
    glorot_uniform,
)
from .errors import ConfigError, DimensionError
from .tensor import Tensor


def substream(seed: int, tag: str) -> np.random.Generator:
    """Deterministic, platform-stable RNG keyed by (seed, purpose tag)."""
    key = zlib.crc32(tag.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(key,)))


class MultiAspectModel:
    def __init__(
        self,
        config: RunConfig,
        vocab_size: int,
        label_vocabs: dict[str, list[str]],
        *,
        external_weights: np.ndarray | None = None,
        unk_id: int | None = 1,
        dtype=np.float32,
    ):
        config.validate()
        self.config = config
        self.aspects = tuple(config.active_aspects)
        missing = set(self.aspects) - set(label_vocabs)
        if missing:
            raise ConfigError(f"label vocabularies missing for active aspects: {sorted(missing)}")
        self.label_vocabs = {a: list(label_vocabs[a]) for a in self.aspects}
        self.params: dict[str, Tensor] = {}
        self.dtype = dtype
        self.last_taps: list[dict] = []

        d = config.d_model
        if config.embedding == "trainable" and external_weights is None:
            init = substream(config.seed, "init.embedding")
            weights = self._register(
                "embedding.table",
                (init.standard_normal((vocab_size, d)) * 0.5).astype(dtype),
            )
            self.embedding = EmbeddingTable(weights, frozen=False, unk_id=unk_id)
            self.input_proj: tuple[Tensor, Tensor] | None = None
        else:
            if external_weights is None:
                raise ConfigError("external embedding configured but no table provided")
            table = Tensor(np.asarray(external_weights, dtype=dtype))
            self.embedding = EmbeddingTable(table, frozen=True, unk_id=unk_id)
            if table.cols != d:
                init = substream(config.seed, "init.embedding")
                w = self._register("input_proj.w", glorot_uniform(init, table.cols, d, dtype))
                b = self._register("input_proj.b", np.zeros((1, d), dtype=dtype))
                self.input_proj = (w, b)
            else:
                self.input_proj = None

        n_foreign = len(self.aspects) - 1
        self.stacks: dict[str, list[EncoderLayerParams]] = {}
        for a in self.aspects:
            init = substream(config.seed, f"init.{a}")
            layers = []
            for li in range(config.n_layers):
                crosses = config.cross_layers == "all" or li == config.n_layers - 1
                layers.append(self._build_layer(a, li, init, crosses, n_foreign))
            self.stacks[a] = layers
            w = self._register(f"{a}.head.w", glorot_uniform(init, d, len(self.label_vocabs[a]), dtype))
            b = self._register(f"{a}.head.b", np.zeros((1, len(self.label_vocabs[a])), dtype=dtype))
        self.heads = {a: (self.params[f"{a}.head.w"], self.params[f"{a}.head.b"]) for a in self.aspects}

        self._drop_rngs = {a: substream(config.seed, f"dropout.{a}") for a in self.aspects}
        self._drop_rngs["embed"] = substream(config.seed, "dropout.embed")

    # -- construction helpers -----------------------------------------------

    def _register(self, name: str, values: np.ndarray) -> Tensor:
        if name in self.params:
            raise ConfigError(f"duplicate parameter name {name!r}")
        t = Tensor(values.astype(self.dtype, copy=False), requires_grad=True, name=name)
        self.params[name] = t
        return t

    def _build_layer(self, aspect, li, init, crosses, n_foreign) -> EncoderLayerParams:
        cfg = self.config
        d, d_ff = cfg.d_model, cfg.ffn_dim
        d_head = d // cfg.n_heads
        mode = cfg.mode
        cross_active = crosses and mode != CrossMode.NO_EXCHANGE and n_foreign >= 1
        kv_blocks = n_foreign + (1 if cfg.include_own else 0)
        kv_in = kv_blocks * d if (cross_active and mode == CrossMode.KEY_VALUE) else d
        pre = f"{aspect}.layer{li}"
        dt = self.dtype

        heads = []
        for hi in range(cfg.n_heads):
            heads.append(
                AttentionHeadParams(
                    wq=self._register(f"{pre}.head{hi}.wq", glorot_uniform(init, d, d_head, dt)),
                    wk=self._register(f"{pre}.head{hi}.wk", glorot_uniform(init, kv_in, d_head, dt)),
                    wv=self._register(f"{pre}.head{hi}.wv", glorot_uniform(init, kv_in, d_head, dt)),
                )
            )
        w_cross = b_cross = None
        if cross_active and mode in (CrossMode.ATTENTION, CrossMode.FEED_FORWARD):
            w_cross = self._register(f"{pre}.cross.w", glorot_uniform(init, n_foreign * d, d, dt))
            b_cross = self._register(f"{pre}.cross.b", np.zeros((1, d), dtype=dt))
        return EncoderLayerParams(
            heads=heads,
            w_out=self._register(f"{pre}.attn_out.w", glorot_uniform(init, d, d, dt)),
            b_out=self._register(f"{pre}.attn_out.b", np.zeros((1, d), dtype=dt)),
            w1=self._register(f"{pre}.ffn.w1", glorot_uniform(init, d, d_ff, dt)),
            b1=self._register(f"{pre}.ffn.b1", np.zeros((1, d_ff), dtype=dt)),
            w2=self._register(f"{pre}.ffn.w2", glorot_uniform(init, d_ff, d, dt)),
            b2=self._register(f"{pre}.ffn.b2", np.zeros((1, d), dtype=dt)),
            ln1_gain=self._register(f"{pre}.ln1.gain", np.ones((1, d), dtype=dt)),
            ln1_bias=self._register(f"{pre}.ln1.bias", np.zeros((1, d), dtype=dt)),
            ln2_gain=self._register(f"{pre}.ln2.gain", np.ones((1, d), dtype=dt)),
            ln2_bias=self._register(f"{pre}.ln2.bias", np.zeros((1, d), dtype=dt)),
            w_cross=w_cross,
            b_cross=b_cross,
            crosses=crosses,
        )

    # -- forward ------------------------------------------------------------

    def forward(self, token_ids, *, training: bool = False, pad_mask=None) -> dict[str, Tensor]:
        """Per-task row-stochastic distributions, one matrix per active aspect.

        ``pad_mask`` flags padded positions (True = padding); padded keys
        are masked out of attention, and the caller is expected to mask
        them from the loss and from decoding as well.
        """
        cfg = self.config
        key_pad = None
        if pad_mask is not None:
            key_pad = np.asarray(pad_mask, dtype=bool)
            if key_pad.shape != (len(list(token_ids)),):
                raise DimensionError("pad_mask length must match token_ids")
            if not key_pad.any():
                key_pad = None
        x = embed(
            token_ids,
            self.embedding,
            positions=True,
            rate=cfg.dropout,
            training=training,
            rng=self._drop_rngs["embed"],
        )
        if self.input_proj is not None:
            x = tz.add_bias(tz.matmul(x, self.input_proj[0]), self.input_proj[1])

        xs = {a: x for a in self.aspects}
        self.last_taps = []
        for li in range(cfg.n_layers):
            layer_params = {a: self.stacks[a][li] for a in self.aspects}
            xs, taps = wire_step(
                xs,
                layer_params,
                cfg.mode,
                include_own=cfg.include_own,
                rate=cfg.dropout,
                training=training,
                rngs=self._drop_rngs,
                key_pad=key_pad,
            )
            self.last_taps.append(taps)

        dists = {}
        for a in self.aspects:
            w, b = self.heads[a]
            dists[a] = tz.softmax_rows(tz.add_bias(tz.matmul(xs[a], w), b))
        return dists

    def joint_loss(self, dists: dict[str, Tensor], golds: dict[str, np.ndarray], mask=None) -> Tensor:
        """Weighted sum over active tasks of per-token mean cross entropy."""
        terms = []
        for a in self.aspects:
            if a not in golds:
                raise ConfigError(f"gold labels missing for active aspect {a!r}")
            ce = tz.cross_entropy(dists[a], golds[a], mask)
            weight = self.config.loss_weights[ASPECT_ORDER.index(a)]
            terms.append(ce if weight == 1.0 else tz.scale(ce, weight))
        return tz.add_all(terms)

    def predict_entity_tags(self, token_ids, pad_mask=None) -> list[str]:
        """Argmax over the semantic head; ties go to the lowest label index."""
        dists = self.forward(token_ids, training=False, pad_mask=pad_mask)
        labels = self.label_vocabs["se"]
        picks = np.argmax(dists["se"].data, axis=1)
        return [labels[i] for i in picks]

    # -- utilities ----------------------------------------------------------

    def parameters(self) -> dict[str, Tensor]:
        return self.params

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad[...] = 0.0

    def astype(self, dtype) -> "MultiAspectModel":
        """In-place dtype conversion; used by gradient checks (float64)."""
        self.dtype = dtype
        for p in self.params.values():
            p.data = p.data.astype(dtype)
            p.grad = np.zeros_like(p.data)
        if self.embedding.frozen:
            self.embedding.weights.data = self.embedding.weights.data.astype(dtype)
        return self

    def state_snapshot(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.params.items()}

    def load_snapshot(self, state: dict[str, np.ndarray]) -> None:
        if set(state) != set(self.params):
            extra = set(state) ^ set(self.params)
            raise ConfigError(f"snapshot parameter names do not match the model: {sorted(extra)}")
        for name, values in state.items():
            p = self.params[name]
            if p.data.shape != values.shape:
                raise ConfigError(f"snapshot shape {values.shape} for {name}, expected {p.data.shape}")
            p.data = values.astype(p.data.dtype).copy()

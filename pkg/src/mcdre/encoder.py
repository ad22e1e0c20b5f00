"""Transformer encoder building blocks.

One layer is post-norm: ``h = LayerNorm(x + AttnOut)`` then
``y = LayerNorm(h + FfnOut)``, dropout after each sublayer output while
training.  Every layer exports a :class:`LayerTapState` carrying the
hidden states entering attention, the attention output (post output
projection, pre-residual) and the FFN output (pre-residual); the
cross-integration module consumes those taps from companion encoders.

Positions are fixed sinusoidal, added to the shared embedding output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tensor as tz
from .errors import DataError, DimensionError
from .tensor import Tensor

NEG_INF = -1e9  # additive mask value for padded attention keys


def sinusoidal_encoding(length: int, d_model: int, dtype=np.float32) -> np.ndarray:
    """Fixed sin/cos position table, rows 0..length-1."""
    pe = np.zeros((length, d_model), dtype=np.float64)
    if length:
        pos = np.arange(length)[:, None].astype(np.float64)
        pair = np.arange(0, d_model, 2).astype(np.float64)
        angles = pos / np.power(10000.0, pair / d_model)
        pe[:, 0::2] = np.sin(angles)
        pe[:, 1::2] = np.cos(angles[:, : d_model // 2])
    return pe.astype(dtype)


@dataclass
class EmbeddingTable:
    """Shared token embedding; frozen tables never receive gradients."""

    weights: Tensor
    frozen: bool = False
    unk_id: int | None = None

    @property
    def dim(self) -> int:
        return self.weights.cols

    @property
    def vocab_size(self) -> int:
        return self.weights.rows


def embed(
    token_ids,
    table: EmbeddingTable,
    *,
    positions: bool = True,
    rate: float = 0.0,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """Embedding rows plus sinusoidal positions, with training dropout."""
    ids = np.asarray(list(token_ids), dtype=np.int64)
    if ids.size:
        bad = (ids < 0) | (ids >= table.vocab_size)
        if bad.any():
            if table.unk_id is None:
                raise DataError(
                    f"token id {int(ids[np.argmax(bad)])} outside vocabulary of size "
                    f"{table.vocab_size} and no UNK id is configured"
                )
            ids = np.where(bad, table.unk_id, ids)
    out = tz.gather_rows(table.weights, ids)
    if positions:
        out = tz.add_const(out, sinusoidal_encoding(len(ids), table.dim, table.weights.data.dtype))
    if training and rate > 0.0:
        out = tz.dropout(out, rate, training, rng)
    return out


@dataclass
class AttentionHeadParams:
    wq: Tensor
    wk: Tensor
    wv: Tensor


@dataclass
class EncoderLayerParams:
    heads: list[AttentionHeadParams]
    w_out: Tensor
    b_out: Tensor
    w1: Tensor
    b1: Tensor
    w2: Tensor
    b2: Tensor
    ln1_gain: Tensor
    ln1_bias: Tensor
    ln2_gain: Tensor
    ln2_bias: Tensor
    # cross projection, present only on crossing layers in attention/ffn modes
    w_cross: Tensor | None = None
    b_cross: Tensor | None = None
    crosses: bool = False


@dataclass
class LayerTapState:
    """Intermediate states exported to companion encoders."""

    attn_input: Tensor | None = None
    attn_output: Tensor | None = None
    ffn_output: Tensor | None = None
    attn_weights: list[np.ndarray] = field(default_factory=list)


def multi_head_attention(
    q_src: Tensor,
    kv_src: Tensor,
    heads: list[AttentionHeadParams],
    w_out: Tensor,
    b_out: Tensor,
    key_pad: np.ndarray | None = None,
) -> tuple[Tensor, list[np.ndarray]]:
    """Scaled dot-product attention over ``kv_src``, heads concatenated
    then projected by the output dense layer.  ``key_pad`` marks padded
    key rows, which are masked out additively before the softmax."""
    mask = None
    if key_pad is not None:
        key_pad = np.asarray(key_pad, dtype=bool)
        if key_pad.shape != (kv_src.rows,):
            raise DimensionError(f"key_pad needs {kv_src.rows} entries, got {key_pad.shape}")
        if key_pad.any():
            mask = np.where(key_pad, NEG_INF, 0.0)[None, :].repeat(q_src.rows, axis=0)
    contexts = []
    weights = []
    for head in heads:
        if head.wq.rows != q_src.cols:
            raise DimensionError(f"WQ expects {head.wq.rows} features, query has {q_src.cols}")
        if head.wk.rows != kv_src.cols or head.wv.rows != kv_src.cols:
            raise DimensionError(
                f"WK/WV expect {head.wk.rows}/{head.wv.rows} features, keys/values have {kv_src.cols}"
            )
        q = tz.matmul(q_src, head.wq)
        k = tz.matmul(kv_src, head.wk)
        v = tz.matmul(kv_src, head.wv)
        scores = tz.scale(tz.matmul(q, tz.transpose(k)), 1.0 / np.sqrt(head.wq.cols))
        if mask is not None:
            scores = tz.add_const(scores, mask)
        w = tz.softmax_rows(scores)
        weights.append(w.data.copy())
        contexts.append(tz.matmul(w, v))
    stacked = tz.concat_features(contexts)
    return tz.add_bias(tz.matmul(stacked, w_out), b_out), weights


def ffn_forward(h: Tensor, params: EncoderLayerParams) -> Tensor:
    hidden = tz.relu(tz.add_bias(tz.matmul(h, params.w1), params.b1))
    return tz.add_bias(tz.matmul(hidden, params.w2), params.b2)


def encoder_layer_forward(
    x: Tensor,
    params: EncoderLayerParams,
    *,
    rate: float = 0.0,
    training: bool = False,
    rng: np.random.Generator | None = None,
    key_pad: np.ndarray | None = None,
) -> tuple[Tensor, LayerTapState]:
    """Standard (no-exchange) layer; cross-integrating layers are driven
    phase-by-phase by :func:`mcdre.cross.wire_step` instead."""
    tap = LayerTapState(attn_input=x)
    attn_out, tap.attn_weights = multi_head_attention(
        x, x, params.heads, params.w_out, params.b_out, key_pad
    )
    tap.attn_output = attn_out
    h = tz.layer_norm(tz.add(x, attn_out), params.ln1_gain, params.ln1_bias)
    h = tz.dropout(h, rate, training, rng) if training and rate > 0 else h
    ffn_out = ffn_forward(h, params)
    tap.ffn_output = ffn_out
    y = tz.layer_norm(tz.add(h, ffn_out), params.ln2_gain, params.ln2_bias)
    y = tz.dropout(y, rate, training, rng) if training and rate > 0 else y
    return y, tap


# ---------------------------------------------------------------------------
# parameter initialization helpers (used by the model builder)


def glorot_uniform(rng: np.random.Generator, rows: int, cols: int, dtype=np.float32) -> np.ndarray:
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols)).astype(dtype)

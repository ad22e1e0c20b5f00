"""Cross-integration between the semantic, syntactic and domain encoders.

Four modes:

* ``none``: three independent stacks trained under one joint loss;
* ``kv``: an encoder's attention keys/values are replaced by the
  feature-axis concatenation of the companion encoders' attention inputs
  (its own hidden state remains the query source);
* ``attention``: the first sublayer's residual add receives a projected
  concatenation of the companions' attention outputs instead of the
  encoder's own attention output;
* ``ffn``: the second sublayer does the same with FFN outputs.

In the two replacing modes the encoder's own attention/FFN output is
still computed and exported (the companions consume it); ``include_own``
restores it in the residual path for experimentation.

Exchange is synchronous per layer: :func:`wire_step` advances all active
encoders through one layer, exchanging taps phase by phase, so the result
is identical to sequential execution.  With fewer than three active
encoders the concatenation simply has fewer blocks (and the projection
matrices shrink accordingly); a single-encoder model degenerates to a
plain transformer stack in every mode.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from . import tensor as tz
from .encoder import (
    EncoderLayerParams,
    LayerTapState,
    ffn_forward,
    multi_head_attention,
)
from .errors import WiringError
from .tensor import Tensor

ASPECT_ORDER = ("se", "sy", "do")


class CrossMode(str, Enum):
    NO_EXCHANGE = "none"
    KEY_VALUE = "kv"
    ATTENTION = "attention"
    FEED_FORWARD = "ffn"


def kv_cross_attention(
    x_own: Tensor,
    x_others: list[Tensor],
    heads,
    w_out: Tensor,
    b_out: Tensor,
    key_pad: np.ndarray | None = None,
) -> tuple[Tensor, list[np.ndarray]]:
    """Attention with keys/values concatenated from companion encoders."""
    if not x_others:
        raise WiringError("key-value cross needs at least one companion state")
    for other in x_others:
        if other.rows != x_own.rows:
            raise WiringError(
                f"companion state has {other.rows} rows, own state has {x_own.rows}"
            )
    kv = tz.concat_features(x_others)
    return multi_head_attention(x_own, kv, heads, w_out, b_out, key_pad)


def _projected_cross(
    x_own: Tensor,
    own_term: Tensor | None,
    others: list[Tensor],
    w_cross: Tensor | None,
    b_cross: Tensor | None,
    ln_gain: Tensor,
    ln_bias: Tensor,
    include_own: bool,
    what: str,
) -> Tensor:
    if not others:
        raise WiringError(f"{what} cross needs at least one companion state")
    if w_cross is None or b_cross is None:
        raise WiringError(f"{what} cross reached a layer without a cross projection")
    for other in others:
        if other.shape != x_own.shape:
            raise WiringError(
                f"companion state shape {other.shape} does not match own {x_own.shape}"
            )
    pre = x_own
    if include_own and own_term is not None:
        pre = tz.add(pre, own_term)
    crossed = tz.add_bias(tz.matmul(tz.concat_features(others), w_cross), b_cross)
    return tz.layer_norm(tz.add(pre, crossed), ln_gain, ln_bias)


def attention_cross_sublayer(
    x_own: Tensor,
    attn_own: Tensor | None,
    attn_others: list[Tensor],
    w_cross: Tensor | None,
    b_cross: Tensor | None,
    ln_gain: Tensor,
    ln_bias: Tensor,
    include_own: bool = False,
) -> Tensor:
    return _projected_cross(
        x_own, attn_own, attn_others, w_cross, b_cross, ln_gain, ln_bias, include_own, "attention"
    )


def feedforward_cross_sublayer(
    x_own: Tensor,
    ffn_others: list[Tensor],
    w_cross: Tensor | None,
    b_cross: Tensor | None,
    ln_gain: Tensor,
    ln_bias: Tensor,
    ffn_own: Tensor | None = None,
    include_own: bool = False,
) -> Tensor:
    return _projected_cross(
        x_own, ffn_own, ffn_others, w_cross, b_cross, ln_gain, ln_bias, include_own, "feedforward"
    )


def wire_step(
    xs: dict[str, Tensor],
    layer_params: dict[str, EncoderLayerParams],
    mode: CrossMode,
    *,
    include_own: bool = False,
    rate: float = 0.0,
    training: bool = False,
    rngs: dict[str, np.random.Generator] | None = None,
    key_pad: np.ndarray | None = None,
) -> tuple[dict[str, Tensor], dict[str, LayerTapState]]:
    """Advance every active encoder through one layer with exchange.

    All encoders' layer inputs must carry the same sequence length; each
    phase (attention, sublayer 1, FFN, sublayer 2) completes for every
    encoder before the next begins, so each encoder sees exactly the
    companion states its mode requires.
    """
    aspects = [a for a in ASPECT_ORDER if a in xs]
    if set(xs) - set(aspects):
        raise WiringError(f"unknown aspects {sorted(set(xs) - set(aspects))}")
    if set(aspects) - set(layer_params):
        raise WiringError("every active encoder needs layer parameters")
    lengths = {xs[a].rows for a in aspects}
    if len(lengths) > 1:
        raise WiringError(f"encoders disagree on sequence length: {sorted(lengths)}")
    crossing = mode != CrossMode.NO_EXCHANGE and len(aspects) >= 2

    def drop(a, t):
        if training and rate > 0.0:
            return tz.dropout(t, rate, training, rngs[a])
        return t

    taps = {a: LayerTapState(attn_input=xs[a]) for a in aspects}

    attn: dict[str, Tensor] = {}
    for a in aspects:
        p = layer_params[a]
        if crossing and p.crosses and mode == CrossMode.KEY_VALUE:
            parts = [xs[b] for b in aspects if b != a or include_own]
            out, weights = kv_cross_attention(xs[a], parts, p.heads, p.w_out, p.b_out, key_pad)
        else:
            out, weights = multi_head_attention(xs[a], xs[a], p.heads, p.w_out, p.b_out, key_pad)
        attn[a] = out
        taps[a].attn_output = out
        taps[a].attn_weights = weights

    hs: dict[str, Tensor] = {}
    for a in aspects:
        p = layer_params[a]
        if crossing and p.crosses and mode == CrossMode.ATTENTION:
            others = [attn[b] for b in aspects if b != a]
            h = attention_cross_sublayer(
                xs[a], attn[a], others, p.w_cross, p.b_cross, p.ln1_gain, p.ln1_bias, include_own
            )
        else:
            h = tz.layer_norm(tz.add(xs[a], attn[a]), p.ln1_gain, p.ln1_bias)
        hs[a] = drop(a, h)

    ffn: dict[str, Tensor] = {}
    for a in aspects:
        ffn[a] = ffn_forward(hs[a], layer_params[a])
        taps[a].ffn_output = ffn[a]

    ys: dict[str, Tensor] = {}
    for a in aspects:
        p = layer_params[a]
        if crossing and p.crosses and mode == CrossMode.FEED_FORWARD:
            others = [ffn[b] for b in aspects if b != a]
            y = feedforward_cross_sublayer(
                hs[a], others, p.w_cross, p.b_cross, p.ln2_gain, p.ln2_bias, ffn[a], include_own
            )
        else:
            y = tz.layer_norm(tz.add(hs[a], ffn[a]), p.ln2_gain, p.ln2_bias)
        ys[a] = drop(a, y)

    return ys, taps

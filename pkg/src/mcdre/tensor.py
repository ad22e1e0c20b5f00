"""Dense rank-2 tensors with reverse-mode automatic differentiation.

Everything in the model is a rank-2 array: sequences are L x d, weight
matrices are in x out, bias vectors are 1 x d rows, scalars are 1 x 1.
There is no broadcasting beyond the explicit bias-row ops below; shape
mismatches raise :class:`DimensionError` instead of silently promoting.

Each operation records its inputs and a backward closure on the output
node, and stamps the node with a global creation sequence number.  The
recorded graph is the compute tape: ``backward(loss)`` collects every
node the loss depends on and replays their backward closures in exact
reverse execution order.  Graphs are per-step objects; dropping the loss
node frees the tape, and parameter gradients persist (so a mini-batch can
accumulate) until ``zero_grad`` style clearing by the optimizer.

Arrays are float32 by default.  Gradient-checking code may build float64
models; ops preserve the dtype of their inputs and never mix dtypes.
"""

from __future__ import annotations

import itertools
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataError, DimensionError, GraphError

LOG_CLAMP = 1e-12  # floor applied to probabilities inside cross_entropy

_seq_counter = itertools.count()


class Tensor:
    """A rank-2 value node; parameters are leaves with ``requires_grad``."""

    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward", "_seq")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        name: str | None = None,
        parents: tuple["Tensor", ...] = (),
        backward: Callable[[np.ndarray], None] | None = None,
    ):
        arr = np.asarray(data)
        if arr.ndim != 2:
            raise DimensionError(f"tensors are rank-2, got shape {arr.shape}")
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float32)
        self.data = arr
        self.grad: np.ndarray | None = np.zeros_like(arr) if requires_grad else None
        self.requires_grad = requires_grad
        self.name = name
        self._parents = parents
        self._backward = backward
        self._seq = next(_seq_counter)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def item(self) -> float:
        if self.data.shape != (1, 1):
            raise DimensionError(f"item() needs a 1x1 tensor, got {self.data.shape}")
        return float(self.data[0, 0])

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}{tag})"


def _accumulate(node: Tensor, g: np.ndarray) -> None:
    # Constants (plain leaves without requires_grad) receive no gradient.
    if not node.requires_grad and not node._parents:
        return
    if node.grad is None:
        node.grad = np.zeros_like(node.data)
    node.grad += g


def _check_dtypes(*tensors: Tensor) -> None:
    dtypes = {t.data.dtype for t in tensors}
    if len(dtypes) > 1:
        raise DimensionError(f"mixed dtypes in one op: {sorted(map(str, dtypes))}")


def backward(loss: Tensor) -> None:
    """Run one reverse pass from ``loss`` over the recorded tape.

    Visits the ops the loss depends on in exact reverse execution order
    and accumulates gradients into every reachable parameter leaf.
    """
    if loss.data.shape != (1, 1):
        raise DimensionError(f"backward target must be 1x1, got {loss.data.shape}")
    if not loss._parents and not loss.requires_grad:
        raise GraphError("backward target is detached from any recorded operation")

    nodes: list[Tensor] = []
    seen: set[int] = set()
    stack = [loss]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        nodes.append(node)
        stack.extend(node._parents)
    nodes.sort(key=lambda n: n._seq)

    # Intermediate nodes start each pass with a fresh buffer; parameter
    # leaves keep accumulating so batches can sum gradients.
    for node in nodes:
        if node._parents:
            node.grad = None
    loss.grad = np.ones_like(loss.data)
    for node in reversed(nodes):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)


# ---------------------------------------------------------------------------
# primitive ops


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.cols != b.rows:
        raise DimensionError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    _check_dtypes(a, b)
    out = Tensor(a.data @ b.data, parents=(a, b))

    def bw(g: np.ndarray) -> None:
        _accumulate(a, g @ b.data.T)
        _accumulate(b, a.data.T @ g)

    out._backward = bw
    return out


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise DimensionError(f"add shape mismatch: {a.shape} vs {b.shape}")
    _check_dtypes(a, b)
    out = Tensor(a.data + b.data, parents=(a, b))

    def bw(g: np.ndarray) -> None:
        _accumulate(a, g)
        _accumulate(b, g)

    out._backward = bw
    return out


def add_bias(x: Tensor, bias: Tensor) -> Tensor:
    """Add a 1 x d bias row to every row of ``x`` (the one sanctioned broadcast)."""
    if bias.rows != 1 or bias.cols != x.cols:
        raise DimensionError(f"bias must be 1x{x.cols}, got {bias.shape}")
    _check_dtypes(x, bias)
    out = Tensor(x.data + bias.data, parents=(x, bias))

    def bw(g: np.ndarray) -> None:
        _accumulate(x, g)
        _accumulate(bias, g.sum(axis=0, keepdims=True))

    out._backward = bw
    return out


def add_const(x: Tensor, c: np.ndarray) -> Tensor:
    """Add a constant array (positional encodings, attention masks)."""
    c = np.asarray(c, dtype=x.data.dtype)
    if c.shape != x.data.shape:
        raise DimensionError(f"constant shape {c.shape} vs tensor {x.shape}")
    out = Tensor(x.data + c, parents=(x,))

    def bw(g: np.ndarray) -> None:
        _accumulate(x, g)

    out._backward = bw
    return out


def scale(x: Tensor, s: float) -> Tensor:
    s = float(s)
    out = Tensor(x.data * x.data.dtype.type(s), parents=(x,))

    def bw(g: np.ndarray) -> None:
        _accumulate(x, g * x.data.dtype.type(s))

    out._backward = bw
    return out


def relu(x: Tensor) -> Tensor:
    out = Tensor(np.maximum(x.data, 0), parents=(x,))

    def bw(g: np.ndarray) -> None:
        _accumulate(x, g * (x.data > 0))

    out._backward = bw
    return out


def transpose(x: Tensor) -> Tensor:
    out = Tensor(np.ascontiguousarray(x.data.T), parents=(x,))

    def bw(g: np.ndarray) -> None:
        _accumulate(x, np.ascontiguousarray(g.T))

    out._backward = bw
    return out


def softmax_rows(m: Tensor) -> Tensor:
    """Row-wise softmax with per-row max subtraction."""
    if m.cols == 0 and m.rows > 0:
        raise DimensionError("softmax over zero columns is undefined")
    if m.rows == 0:
        out = Tensor(m.data.copy(), parents=(m,))
        out._backward = lambda g: _accumulate(m, g)
        return out
    shifted = m.data - m.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=1, keepdims=True)
    out = Tensor(y, parents=(m,))

    def bw(g: np.ndarray) -> None:
        dot = (g * y).sum(axis=1, keepdims=True)
        _accumulate(m, y * (g - dot))

    out._backward = bw
    return out


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Per-row normalization with biased variance, then gain/bias."""
    if eps <= 0:
        raise ConfigError(f"layer_norm eps must be > 0, got {eps}")
    if gain.shape != (1, x.cols) or bias.shape != (1, x.cols):
        raise DimensionError(
            f"layer_norm gain/bias must be 1x{x.cols}, got {gain.shape} and {bias.shape}"
        )
    _check_dtypes(x, gain, bias)
    dt = x.data.dtype
    mu = x.data.mean(axis=1, keepdims=True)
    var = x.data.var(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(var + dt.type(eps))
    xhat = (x.data - mu) * inv
    out = Tensor(xhat * gain.data + bias.data, parents=(x, gain, bias))

    def bw(g: np.ndarray) -> None:
        _accumulate(gain, (g * xhat).sum(axis=0, keepdims=True))
        _accumulate(bias, g.sum(axis=0, keepdims=True))
        dxhat = g * gain.data
        term = dxhat - dxhat.mean(axis=1, keepdims=True) - xhat * (dxhat * xhat).mean(axis=1, keepdims=True)
        _accumulate(x, inv * term)

    out._backward = bw
    return out


def concat_features(parts: Sequence[Tensor]) -> Tensor:
    """Concatenate along the feature axis; column blocks keep argument order."""
    if not parts:
        raise DimensionError("concat_features needs at least one part")
    rows = parts[0].rows
    for p in parts:
        if p.rows != rows:
            raise DimensionError(
                f"concat_features row mismatch: {[p.shape for p in parts]}"
            )
    _check_dtypes(*parts)
    if len(parts) == 1:
        return parts[0]
    out = Tensor(np.concatenate([p.data for p in parts], axis=1), parents=tuple(parts))
    offsets = np.cumsum([0] + [p.cols for p in parts])

    def bw(g: np.ndarray) -> None:
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            _accumulate(p, g[:, lo:hi])

    out._backward = bw
    return out


def dropout(x: Tensor, rate: float, training: bool, rng: np.random.Generator) -> Tensor:
    """Inverted dropout: zero with probability ``rate``, scale survivors."""
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x
    keep = (rng.random(x.data.shape) >= rate).astype(x.data.dtype)
    keep *= x.data.dtype.type(1.0 / (1.0 - rate))
    out = Tensor(x.data * keep, parents=(x,))

    def bw(g: np.ndarray) -> None:
        _accumulate(x, g * keep)

    out._backward = bw
    return out


def cross_entropy(
    probs: Tensor,
    gold: Sequence[int] | np.ndarray,
    mask: Sequence[bool] | np.ndarray | None = None,
    reduction: str = "mean",
) -> Tensor:
    """Negative log-likelihood of ``gold`` under row-stochastic ``probs``.

    Masked rows contribute nothing.  ``reduction`` is "mean" over unmasked
    rows (the default) or "sum", used by the trainer to average per token
    across a whole batch.
    """
    gold = np.asarray(gold, dtype=np.int64)
    if gold.ndim != 1 or gold.shape[0] != probs.rows:
        raise DimensionError(f"gold must have {probs.rows} entries, got shape {gold.shape}")
    if mask is None:
        mask = np.ones(probs.rows, dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (probs.rows,):
            raise DimensionError(f"mask must have {probs.rows} entries, got {mask.shape}")
    bad = np.nonzero((gold < 0) | (gold >= probs.cols))[0]
    if bad.size:
        raise DataError(
            f"gold label {int(gold[bad[0]])} out of range [0, {probs.cols}) at row {int(bad[0])}"
        )
    dt = probs.data.dtype
    n = int(mask.sum())
    picked = probs.data[np.arange(probs.rows), gold]
    clamped = np.maximum(picked, dt.type(LOG_CLAMP))
    nll = -np.log(clamped)
    total = nll[mask].sum() if n else dt.type(0.0)
    if reduction == "mean":
        value = total / dt.type(n) if n else dt.type(0.0)
        denom = n
    elif reduction == "sum":
        value = total
        denom = 1
    else:
        raise ConfigError(f"unknown reduction {reduction!r}")
    out = Tensor(np.array([[value]], dtype=dt), parents=(probs,))

    def bw(g: np.ndarray) -> None:
        if n == 0:
            return
        gs = g[0, 0] / dt.type(denom)
        dp = np.zeros_like(probs.data)
        rows = np.nonzero(mask & (picked >= LOG_CLAMP))[0]
        dp[rows, gold[rows]] = -gs / picked[rows]
        _accumulate(probs, dp)

    out._backward = bw
    return out


def gather_rows(table: Tensor, ids: Sequence[int] | np.ndarray) -> Tensor:
    """Row lookup (embedding); gradient scatter-adds into the table."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim != 1:
        raise DimensionError(f"ids must be a flat sequence, got shape {ids.shape}")
    bad = np.nonzero((ids < 0) | (ids >= table.rows))[0]
    if bad.size:
        raise DataError(f"row id {int(ids[bad[0]])} out of range [0, {table.rows})")
    out = Tensor(table.data[ids], parents=(table,))

    def bw(g: np.ndarray) -> None:
        if not table.requires_grad:
            return
        if table.grad is None:
            table.grad = np.zeros_like(table.data)
        np.add.at(table.grad, ids, g)

    out._backward = bw
    return out


def add_all(terms: Iterable[Tensor]) -> Tensor:
    """Left-fold ``add`` over 1x1 (or same-shape) tensors."""
    terms = list(terms)
    if not terms:
        raise DimensionError("add_all needs at least one term")
    acc = terms[0]
    for t in terms[1:]:
        acc = add(acc, t)
    return acc


def constant(values, dtype=np.float32) -> Tensor:
    """A leaf tensor that never receives gradient."""
    return Tensor(np.asarray(values, dtype=dtype))

"""Independent reference implementations used as test oracles.

Everything here is written straight from the defining formulas with plain
numpy (or python loops), on purpose: none of it calls into mcdre, so a bug
in the library cannot hide in its own oracle.
"""

import math

import numpy as np


def matmul_triple_loop(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = np.zeros((a.shape[0], b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            s = 0.0
            for k in range(a.shape[1]):
                s += a[i, k] * b[k, j]
            out[i, j] = s
    return out


def softmax_exp_normalize(row):
    es = [math.exp(v) for v in row]
    z = sum(es)
    return [e / z for e in es]


def layer_norm_formula(row, gain, bias, eps):
    row = np.asarray(row, dtype=np.float64)
    mu = row.mean()
    var = ((row - mu) ** 2).mean()  # biased, 1/cols divisor
    return (row - mu) / math.sqrt(var + eps) * np.asarray(gain) + np.asarray(bias)


def nll_direct(probs, gold, mask=None):
    probs = np.asarray(probs, dtype=np.float64)
    vals = []
    for r, g in enumerate(gold):
        if mask is not None and not mask[r]:
            continue
        vals.append(-math.log(max(probs[r, g], 1e-12)))
    return sum(vals) / len(vals) if vals else 0.0


def finite_difference(loss_fn, tensors, eps=1e-3):
    """Central finite differences of ``loss_fn()`` w.r.t. each tensor's data.

    ``loss_fn`` must recompute the loss from scratch (it is called after
    each in-place perturbation).  Returns one gradient array per tensor.
    """
    grads = []
    for t in tensors:
        g = np.zeros_like(t.data, dtype=np.float64)
        flat = t.data.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            up = loss_fn()
            flat[i] = orig - eps
            down = loss_fn()
            flat[i] = orig
            g.reshape(-1)[i] = (up - down) / (2.0 * eps)
        grads.append(g)
    return grads


def sinusoid_position(pos, i, d_model):
    """Closed-form positional encoding entry for position ``pos``, column ``i``."""
    pair = i // 2
    angle = pos / (10000.0 ** (2.0 * pair / d_model))
    return math.sin(angle) if i % 2 == 0 else math.cos(angle)


def max_bipartite_tp(gold, pred, match_fn):
    """Maximum one-to-one matching size between gold and pred mentions.

    Simple augmenting-path matcher; fine for the tiny instances the tests
    generate (<= 6 mentions per side).
    """
    adj = [[match_fn(g, p) for p in pred] for g in gold]
    owner = [-1] * len(pred)

    def try_assign(gi, seen):
        for pi in range(len(pred)):
            if adj[gi][pi] and not seen[pi]:
                seen[pi] = True
                if owner[pi] == -1 or try_assign(owner[pi], seen):
                    owner[pi] = gi
                    return True
        return False

    tp = 0
    for gi in range(len(gold)):
        if try_assign(gi, [False] * len(pred)):
            tp += 1
    return tp


def random_representable_mentions(rng, max_len=18, labels=("ADE", "Drug", "Sym")):
    """Random mention set built so BIOHD can represent it.

    Per label, discontinuous structures are either shared-H families or
    plain D pairs, never both in one sentence, and the fragments of one
    mention are placed before the next same-label mention starts; that is
    exactly the territory the deterministic pairing rule reconstructs.
    """
    from mcdre.codec import Mention

    mentions = []
    pos = int(rng.integers(0, 2))
    label_kind = {}

    def frag(lo=1, hi=2):
        nonlocal pos
        length = int(rng.integers(lo, hi + 1))
        f = (pos, min(pos + length, max_len))
        pos = f[1]
        return f

    def skip(min_gap=1):
        nonlocal pos
        pos += min_gap + int(rng.integers(0, 2))

    while pos < max_len - 2:
        label = labels[int(rng.integers(0, len(labels)))]
        roll = rng.random()
        if roll < 0.40:
            mentions.append(Mention(label, [frag()]))
        elif roll < 0.72 and label_kind.get(label) != "h" and pos + 5 <= max_len:
            a = frag(1, 2)
            skip()
            if pos < max_len:
                b = frag(1, 2)
                mentions.append(Mention(label, [a, b]))
                label_kind[label] = "d"
        elif label_kind.get(label) is None and pos + 7 <= max_len:
            a = frag(1, 1)
            skip()
            b = frag(1, 1)
            skip()
            if pos < max_len:
                h = frag(1, 2)
                mentions.append(Mention(label, [a, h]))
                mentions.append(Mention(label, [b, h]))
                label_kind[label] = "h"
        skip()
    return mentions, max_len

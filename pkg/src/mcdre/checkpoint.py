"""Binary checkpoints: magic "MCDRE1", format version, config snapshot,
vocabularies, then named float32 little-endian row-major tensors.

A checkpoint is self-contained: it carries the token vocabulary and, for
frozen external embeddings, the embedding table itself, so a reloaded
model evaluates bit-identically without the original data files.
"""

from __future__ import annotations

import io
import struct

import numpy as np

from .config import RunConfig
from .data import Vocab, atomic_write_bytes
from .errors import DataError
from .model import MultiAspectModel

MAGIC = b"MCDRE1"
VERSION = 1


def _write_str(buf: io.BytesIO, text: str) -> None:
    raw = text.encode("utf-8")
    buf.write(struct.pack("<I", len(raw)))
    buf.write(raw)


def _read_exact(fh, n: int, what: str) -> bytes:
    raw = fh.read(n)
    if len(raw) != n:
        raise DataError(f"checkpoint truncated while reading {what}")
    return raw


def _read_str(fh, what: str) -> str:
    (n,) = struct.unpack("<I", _read_exact(fh, 4, what))
    return _read_exact(fh, n, what).decode("utf-8")


def serialize(config: RunConfig, vocabs: dict[str, list[str]], tensors: dict[str, np.ndarray]) -> bytes:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", VERSION))
    _write_str(buf, config.to_text())
    buf.write(struct.pack("<I", len(vocabs)))
    for name, entries in vocabs.items():
        _write_str(buf, name)
        buf.write(struct.pack("<I", len(entries)))
        for entry in entries:
            _write_str(buf, entry)
    buf.write(struct.pack("<I", len(tensors)))
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr, dtype="<f4")
        _write_str(buf, name)
        buf.write(struct.pack("<II", arr.shape[0], arr.shape[1]))
        buf.write(arr.tobytes())
    return buf.getvalue()


def deserialize(raw: bytes):
    fh = io.BytesIO(raw)
    magic = fh.read(len(MAGIC))
    if magic != MAGIC:
        raise DataError(f"not a checkpoint: bad magic {magic!r}")
    (version,) = struct.unpack("<I", _read_exact(fh, 4, "version"))
    if version != VERSION:
        raise DataError(f"unsupported checkpoint version {version}, this build reads {VERSION}")
    config = RunConfig.from_text(_read_str(fh, "config"), source="<checkpoint>")
    (n_vocabs,) = struct.unpack("<I", _read_exact(fh, 4, "vocab count"))
    vocabs: dict[str, list[str]] = {}
    for _ in range(n_vocabs):
        name = _read_str(fh, "vocab name")
        (count,) = struct.unpack("<I", _read_exact(fh, 4, "vocab size"))
        vocabs[name] = [_read_str(fh, "vocab entry") for _ in range(count)]
    (n_tensors,) = struct.unpack("<I", _read_exact(fh, 4, "tensor count"))
    tensors: dict[str, np.ndarray] = {}
    for _ in range(n_tensors):
        name = _read_str(fh, "tensor name")
        rows, cols = struct.unpack("<II", _read_exact(fh, 8, "tensor shape"))
        data = _read_exact(fh, rows * cols * 4, f"tensor {name}")
        tensors[name] = np.frombuffer(data, dtype="<f4").reshape(rows, cols).copy()
    if fh.read(1):
        raise DataError("trailing bytes after checkpoint payload")
    return config, vocabs, tensors


def save_model(path, model: MultiAspectModel, token_vocab: Vocab) -> None:
    vocabs = {"tokens": list(token_vocab.tokens)}
    for a in model.aspects:
        vocabs[f"labels.{a}"] = list(model.label_vocabs[a])
    tensors = model.state_snapshot()
    if model.embedding.frozen:
        tensors["embedding.table"] = model.embedding.weights.data.copy()
    atomic_write_bytes(path, serialize(model.config, vocabs, tensors))


def load_model(path) -> tuple[MultiAspectModel, Vocab]:
    with open(path, "rb") as fh:
        raw = fh.read()
    config, vocabs, tensors = deserialize(raw)
    if "tokens" not in vocabs:
        raise DataError("checkpoint is missing the token vocabulary")
    token_vocab = Vocab(vocabs["tokens"])
    label_vocabs = {}
    for a in config.active_aspects:
        key = f"labels.{a}"
        if key not in vocabs:
            raise DataError(f"checkpoint is missing the {a} label vocabulary")
        label_vocabs[a] = vocabs[key]
    external = None
    if config.embedding != "trainable":
        external = tensors.pop("embedding.table", None)
        if external is None:
            raise DataError("checkpoint with external embedding lacks the stored table")
    model = MultiAspectModel(
        config,
        vocab_size=len(token_vocab),
        label_vocabs=label_vocabs,
        external_weights=external,
        unk_id=token_vocab.unk_id,
    )
    model.load_snapshot(tensors)
    return model, token_vocab

"""File formats and in-memory corpus records.

Columnar data format, one token per line::

    SURFACE<TAB>POS<TAB>MEDNER<TAB>ENTITY

Blank lines separate sentences.  Lines starting with ``#`` are ignored,
except that ``#id <value>`` immediately before a sentence records its
provenance id (the loader otherwise assigns ``s0``, ``s1``, ...).  POS and
MEDNER may be ``_`` when that aspect is unused; the entity column may be
``_`` on unlabeled text that exists only to be tagged.

Embedding text format: header line ``N D`` then N lines of
``token v1 ... vD`` (whitespace separated).  Mention line format:
``docid<TAB>label<TAB>s1-e1[,s2-e2...]`` with half-open token ranges.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .codec import SCHEMES, Mention, _parse_tag
from .errors import DataError, ParseError

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"


@dataclass
class SentenceRecord:
    tokens: list[str]
    pos_tags: list[str]
    medner_tags: list[str]
    entity_tags: list[str]
    provenance: str = ""

    def __post_init__(self):
        n = len(self.tokens)
        for name, col in (
            ("pos", self.pos_tags),
            ("medner", self.medner_tags),
            ("entity", self.entity_tags),
        ):
            if len(col) != n:
                raise DataError(
                    f"sentence {self.provenance or '?'}: {name} column has {len(col)} "
                    f"tags for {n} tokens"
                )

    def __len__(self) -> int:
        return len(self.tokens)

    def column(self, aspect: str) -> list[str]:
        return {"se": self.entity_tags, "sy": self.pos_tags, "do": self.medner_tags}[aspect]


class Vocab:
    """Token-string to id mapping; optional UNK fallback."""

    def __init__(self, tokens: list[str]):
        self.tokens = list(tokens)
        self.index: dict[str, int] = {}
        for i, tok in enumerate(self.tokens):
            if tok in self.index:
                raise DataError(f"duplicate vocabulary entry {tok!r}")
            self.index[tok] = i
        self.unk_id = self.index.get(UNK_TOKEN)

    @classmethod
    def build(cls, token_lists, specials=(PAD_TOKEN, UNK_TOKEN)) -> "Vocab":
        tokens = list(specials)
        seen = set(tokens)
        for toks in token_lists:
            for tok in toks:
                if tok not in seen:
                    seen.add(tok)
                    tokens.append(tok)
        return cls(tokens)

    def id(self, token: str) -> int:
        got = self.index.get(token)
        if got is None:
            if self.unk_id is None:
                raise DataError(f"token {token!r} not in vocabulary and no UNK entry exists")
            return self.unk_id
        return got

    def ids(self, tokens) -> np.ndarray:
        return np.array([self.id(t) for t in tokens], dtype=np.int64)

    def record_ids(self, rec: "SentenceRecord") -> np.ndarray:
        """Ids for one sentence; occurrence keys (``provenance:idx``) win
        over surface forms so per-occurrence contextual embedding tables
        resolve naturally."""
        ids = []
        for i, tok in enumerate(rec.tokens):
            occ = self.index.get(f"{rec.provenance}:{i}")
            ids.append(occ if occ is not None else self.id(tok))
        return np.array(ids, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.tokens)


def _valid_entity_tag(tag: str, scheme: str) -> bool:
    return tag in ("O", "_") or _parse_tag(tag, SCHEMES[scheme]) is not None


def load_columnar(path, scheme: str | None = None) -> list[SentenceRecord]:
    records: list[SentenceRecord] = []
    rows: list[tuple[str, str, str, str]] = []
    pending_id: str | None = None

    def flush():
        nonlocal rows, pending_id
        if rows:
            provenance = pending_id if pending_id is not None else f"s{len(records)}"
            records.append(
                SentenceRecord(
                    tokens=[r[0] for r in rows],
                    pos_tags=[r[1] for r in rows],
                    medner_tags=[r[2] for r in rows],
                    entity_tags=[r[3] for r in rows],
                    provenance=provenance,
                )
            )
            rows = []
            pending_id = None

    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                flush()
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("id ") and not rows:
                    pending_id = body[3:].strip()
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ParseError(f"{path}:{lineno}: expected 4 tab-separated columns, got {len(fields)}")
            if not fields[0]:
                raise ParseError(f"{path}:{lineno}: empty surface token")
            if scheme is not None and not _valid_entity_tag(fields[3], scheme):
                raise ParseError(
                    f"{path}:{lineno}: entity tag {fields[3]!r} is not valid under scheme {scheme!r}"
                )
            rows.append((fields[0], fields[1], fields[2], fields[3]))
    flush()
    return records


def format_columnar(records) -> str:
    chunks = []
    for i, rec in enumerate(records):
        lines = [f"#id {rec.provenance or f's{i}'}"]
        for tok, pos, med, ent in zip(rec.tokens, rec.pos_tags, rec.medner_tags, rec.entity_tags):
            lines.append(f"{tok}\t{pos}\t{med}\t{ent}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + ("\n" if chunks else "")


def write_columnar(records, path) -> None:
    atomic_write_text(path, format_columnar(records))


# ---------------------------------------------------------------------------
# embedding text format


def load_embeddings(path) -> tuple[np.ndarray, Vocab]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise ParseError(f"{path}:1: expected header 'N D', got {header.strip()!r}")
        try:
            n, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"{path}:1: non-numeric header fields {header.strip()!r}") from None
        if n < 0 or dim < 1:
            raise ParseError(f"{path}:1: bad vocabulary size or dimension in header")
        tokens: list[str] = []
        weights = np.zeros((n, dim), dtype=np.float32)
        for i in range(n):
            lineno = i + 2
            line = fh.readline()
            if not line:
                raise ParseError(f"{path}:{lineno}: expected {n} vectors, file ends after {i}")
            fields = line.split()
            if len(fields) != dim + 1:
                raise ParseError(
                    f"{path}:{lineno}: expected token + {dim} values, got {len(fields)} fields"
                )
            try:
                weights[i] = [float(v) for v in fields[1:]]
            except ValueError:
                raise ParseError(f"{path}:{lineno}: non-numeric embedding value") from None
            tokens.append(fields[0])
        trailing = fh.readline()
        if trailing.strip():
            raise ParseError(f"{path}: more vectors than the header promised ({n})")
    try:
        vocab = Vocab(tokens)
    except DataError as err:
        raise ParseError(f"{path}: {err}") from None
    return weights, vocab


def write_embeddings(path, tokens, weights) -> None:
    weights = np.asarray(weights)
    lines = [f"{weights.shape[0]} {weights.shape[1]}"]
    for tok, row in zip(tokens, weights):
        lines.append(tok + " " + " ".join(f"{v:.6f}" for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# mention line format


def parse_mention_line(line: str, where: str) -> tuple[str, Mention]:
    fields = line.split("\t")
    if len(fields) != 3:
        raise ParseError(f"{where}: expected docid<TAB>label<TAB>spans, got {len(fields)} fields")
    docid, label, spans = fields
    frags = []
    for part in spans.split(","):
        bits = part.split("-")
        if len(bits) != 2:
            raise ParseError(f"{where}: bad span {part!r}, expected start-end")
        try:
            frags.append((int(bits[0]), int(bits[1])))
        except ValueError:
            raise ParseError(f"{where}: non-integer span bounds in {part!r}") from None
    try:
        return docid, Mention(label, frags)
    except DataError as err:
        raise ParseError(f"{where}: {err}") from None


def load_mentions(path) -> dict[str, list[Mention]]:
    by_doc: dict[str, list[Mention]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            docid, mention = parse_mention_line(line, f"{path}:{lineno}")
            by_doc.setdefault(docid, []).append(mention)
    return by_doc


def format_mentions(by_doc: dict[str, list[Mention]]) -> str:
    lines = []
    for docid, mentions in by_doc.items():
        for m in sorted(mentions):
            spans = ",".join(f"{s}-{e}" for s, e in m.fragments)
            lines.append(f"{docid}\t{m.label}\t{spans}")
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------


def atomic_write_text(path, content: str) -> None:
    """Write-then-rename so failures never leave partial output files."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_bytes(path, content: bytes) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise

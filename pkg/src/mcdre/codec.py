"""Mention <-> tag-sequence codecs for the BIO and BIOHD schemes.

BIO covers flat mentions only.  BIOHD adds two segment kinds for
discontinuous entities: H marks a token span shared by several mentions of
the same label, D marks a span that belongs to exactly one discontinuous
mention.  Sharing is exact-span and same-label; anything else is beyond
the scheme's capacity and is rejected at encode time.

Decoding is total: any list of strings decodes to a well-formed mention
list.  Unparseable tags are read as O, and orphan I/DI/HI tags are
repaired to segment starts (conlleval-style).  The D/H pairing rule used
here is a deterministic convention, kept in one place (:func:`_pair_label`)
so an alternate rule can be swapped in:

* each D segment joins the nearest H segment of its label (tie: the
  following one); several D segments may join the same H segment;
* with no H segment of that label, D segments join pairwise in textual
  order, a leftover odd one standing alone as a flat mention;
* H segments nobody joined become flat mentions.

``encode_biohd`` re-decodes its own output and refuses any mention set the
pairing rule cannot reconstruct, so encode/decode round-trips exactly on
everything it accepts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DataError, SchemeCapacityError

BIO_PREFIXES = ("B", "I")
BIOHD_PREFIXES = ("B", "I", "DB", "DI", "HB", "HI")
SCHEMES = {"bio": BIO_PREFIXES, "biohd": BIOHD_PREFIXES}


@dataclass(frozen=True, order=True)
class Mention:
    """A typed entity as an ordered set of half-open token fragments."""

    label: str
    fragments: tuple[tuple[int, int], ...]

    def __init__(self, label: str, fragments: Iterable[Sequence[int]]):
        frags = tuple(sorted((int(s), int(e)) for s, e in fragments))
        if not label or any(ch in label for ch in "\t\n"):
            raise DataError(f"bad mention label {label!r}")
        if not frags:
            raise DataError("mention needs at least one fragment")
        for s, e in frags:
            if not s < e:
                raise DataError(f"empty or reversed fragment [{s},{e}) in {label}")
        for (_, e1), (s2, _) in zip(frags, frags[1:]):
            if s2 < e1:
                raise DataError(f"overlapping fragments in one mention: {frags}")
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "fragments", frags)

    @property
    def discontinuous(self) -> bool:
        return len(self.fragments) > 1

    def tokens(self) -> frozenset[int]:
        return frozenset(t for s, e in self.fragments for t in range(s, e))

    def __str__(self) -> str:
        spans = ",".join(f"{s}-{e}" for s, e in self.fragments)
        return f"{self.label}[{spans}]"


@dataclass
class TagSequence:
    """Per-token labels under a declared scheme."""

    scheme: str
    tags: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DataError(f"unknown scheme {self.scheme!r}; expected one of {sorted(SCHEMES)}")
        prefixes = SCHEMES[self.scheme]
        for i, tag in enumerate(self.tags):
            if tag != "O" and _parse_tag(tag, prefixes) is None:
                raise DataError(f"tag {tag!r} at position {i} is not valid under {self.scheme}")

    def __len__(self) -> int:
        return len(self.tags)


def _parse_tag(tag: str, prefixes=BIOHD_PREFIXES) -> tuple[str, str] | None:
    """Split ``prefix-label``; None for O or anything unparseable."""
    if not tag or tag == "O" or "-" not in tag:
        return None
    prefix, label = tag.split("-", 1)
    if prefix not in prefixes or not label:
        return None
    return prefix, label


def _as_tags(tags) -> list[str]:
    return list(tags.tags) if isinstance(tags, TagSequence) else list(tags)


# ---------------------------------------------------------------------------
# BIO


def encode_bio(mentions: Iterable[Mention], length: int) -> TagSequence:
    tags = ["O"] * length
    taken = {}
    for m in sorted(set(mentions)):
        if m.discontinuous:
            raise SchemeCapacityError(f"BIO cannot encode discontinuous mention {m}")
        s, e = m.fragments[0]
        if e > length or s < 0:
            raise DataError(f"mention {m} outside sequence of length {length}")
        for t in range(s, e):
            if t in taken:
                raise SchemeCapacityError(f"BIO cannot encode overlapping mentions {taken[t]} and {m}")
            taken[t] = m
        tags[s] = f"B-{m.label}"
        for t in range(s + 1, e):
            tags[t] = f"I-{m.label}"
    return TagSequence("bio", tags)


def decode_bio(tags) -> list[Mention]:
    """Maximal B(I)* runs; an orphan I opens a new mention."""
    mentions = []
    open_label, start = None, 0
    seq = _as_tags(tags)

    def close(end):
        nonlocal open_label
        if open_label is not None:
            mentions.append(Mention(open_label, [(start, end)]))
            open_label = None

    for i, tag in enumerate(seq):
        parsed = _parse_tag(tag, BIO_PREFIXES)
        if parsed is None:
            close(i)
            continue
        prefix, label = parsed
        if prefix == "I" and open_label == label:
            continue
        close(i)
        open_label, start = label, i
    close(len(seq))
    return mentions


# ---------------------------------------------------------------------------
# BIOHD

_KIND_PREFIX = {"flat": ("B", "I"), "d": ("DB", "DI"), "h": ("HB", "HI")}
_PREFIX_KIND = {"B": "flat", "I": "flat", "DB": "d", "DI": "d", "HB": "h", "HI": "h"}


@dataclass
class _Segment:
    kind: str  # flat | d | h
    label: str
    start: int
    end: int

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


def _scan_segments(seq: list[str]) -> list[_Segment]:
    segments: list[_Segment] = []
    current: _Segment | None = None
    for i, tag in enumerate(seq):
        parsed = _parse_tag(tag, BIOHD_PREFIXES)
        if parsed is None:
            current = None
            continue
        prefix, label = parsed
        kind = _PREFIX_KIND[prefix]
        continuing = prefix in ("I", "DI", "HI")
        if continuing and current is not None and current.kind == kind and current.label == label:
            current.end = i + 1
            continue
        # B/DB/HB, or an orphan continuation repaired to a new start
        current = _Segment(kind, label, i, i + 1)
        segments.append(current)
    return segments


def _gap(a: tuple[int, int], b: tuple[int, int]) -> int:
    if b[0] >= a[1]:
        return b[0] - a[1]
    return a[0] - b[1]


def _pair_label(ds: list[_Segment], hs: list[_Segment], flats: list[_Segment], label: str) -> list[Mention]:
    mentions = [Mention(label, [f.span]) for f in flats]
    if hs:
        partnered = set()
        for d in ds:
            best = min(
                range(len(hs)),
                key=lambda j: (_gap(d.span, hs[j].span), 0 if hs[j].start > d.start else 1),
            )
            partnered.add(best)
            mentions.append(Mention(label, [d.span, hs[best].span]))
        for j, h in enumerate(hs):
            if j not in partnered:
                mentions.append(Mention(label, [h.span]))
    else:
        i = 0
        while i < len(ds):
            if i + 1 < len(ds):
                mentions.append(Mention(label, [ds[i].span, ds[i + 1].span]))
                i += 2
            else:
                mentions.append(Mention(label, [ds[i].span]))
                i += 1
    return mentions


def decode_biohd(tags) -> list[Mention]:
    """Deterministic reconstruction; see module docstring for the pairing rule."""
    segments = _scan_segments(_as_tags(tags))
    labels: list[str] = []
    for seg in segments:
        if seg.label not in labels:
            labels.append(seg.label)
    mentions: list[Mention] = []
    for label in labels:
        ds = [s for s in segments if s.label == label and s.kind == "d"]
        hs = [s for s in segments if s.label == label and s.kind == "h"]
        flats = [s for s in segments if s.label == label and s.kind == "flat"]
        mentions.extend(_pair_label(ds, hs, flats, label))
    return sorted(mentions)


def encode_biohd(mentions: Iterable[Mention], length: int) -> TagSequence:
    wanted = sorted(set(mentions))
    for m in wanted:
        if m.fragments and (m.fragments[0][0] < 0 or m.fragments[-1][1] > length):
            raise DataError(f"mention {m} outside sequence of length {length}")

    # Group exact fragments; detect overlap and cross-label sharing up front.
    frag_owners: dict[tuple[int, int], list[Mention]] = {}
    for m in wanted:
        for frag in m.fragments:
            frag_owners.setdefault(frag, []).append(m)
    frags = sorted(frag_owners)
    for a, b in zip(frags, frags[1:]):
        if b[0] < a[1]:
            raise SchemeCapacityError(
                f"fragments {a} and {b} overlap without being identical spans; "
                f"offending mentions: {frag_owners[a][0]}, {frag_owners[b][0]}"
            )
    for frag, owners in frag_owners.items():
        if len({m.label for m in owners}) > 1:
            raise SchemeCapacityError(
                f"span {frag} is shared across labels: {', '.join(str(m) for m in owners)}"
            )

    tags = ["O"] * length
    for frag, owners in frag_owners.items():
        if len(owners) >= 2:
            kind = "h"
        elif owners[0].discontinuous:
            kind = "d"
        else:
            kind = "flat"
        begin, inside = _KIND_PREFIX[kind]
        label = owners[0].label
        s, e = frag
        tags[s] = f"{begin}-{label}"
        for t in range(s + 1, e):
            tags[t] = f"{inside}-{label}"

    out = TagSequence("biohd", tags)
    if decode_biohd(out) != wanted:
        raise SchemeCapacityError(
            "mention set is not representable in BIOHD (the deterministic "
            f"pairing rule cannot reconstruct it): {', '.join(str(m) for m in wanted)}"
        )
    return out


def decode(tags, scheme: str) -> list[Mention]:
    if scheme == "bio":
        return decode_bio(tags)
    if scheme == "biohd":
        return decode_biohd(tags)
    raise DataError(f"unknown scheme {scheme!r}")


def encode(mentions: Iterable[Mention], length: int, scheme: str) -> TagSequence:
    if scheme == "bio":
        return encode_bio(mentions, length)
    if scheme == "biohd":
        return encode_biohd(mentions, length)
    raise DataError(f"unknown scheme {scheme!r}")

"""Span-level lenient/strict micro-averaged precision, recall and F.

Matching is one-to-one and greedy: gold mentions are visited in document
order and each consumes the first unconsumed prediction it matches.  The
assignment procedure is a convention of this package; tests compare it
against a brute-force optimal matcher and the two rarely differ (and when
they do, greedy undercounts tp, never overcounts).

Zero denominators report as 0 for P, R and F.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .codec import Mention
from .errors import DataError


def match_strict(gold: Mention, pred: Mention) -> bool:
    """Exact label and exact fragment list."""
    return gold.label == pred.label and gold.fragments == pred.fragments


def match_lenient(gold: Mention, pred: Mention) -> bool:
    """Same label and at least one shared token."""
    return gold.label == pred.label and bool(gold.tokens() & pred.tokens())


_MATCHERS = {"strict": match_strict, "lenient": match_lenient}


@dataclass
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


@dataclass
class ScoreReport:
    """Micro and per-label scores, plus the discontinuous-mention subsets."""

    mode: str
    micro: Counts
    per_label: dict[str, Counts] = field(default_factory=dict)
    dm_sentences: "ScoreReport | None" = None
    dm_only: "ScoreReport | None" = None

    def to_tsv(self) -> str:
        """One metric per line: label, mode, P, R, F, tp, fp, fn."""
        lines = []

        def emit(label, counts):
            lines.append(
                f"{label}\t{self.mode}\t{counts.precision:.6f}\t{counts.recall:.6f}"
                f"\t{counts.f:.6f}\t{counts.tp}\t{counts.fp}\t{counts.fn}"
            )

        for label in sorted(self.per_label):
            emit(label, self.per_label[label])
        emit("micro", self.micro)
        if self.dm_sentences is not None:
            emit("micro@dm_sentences", self.dm_sentences.micro)
        if self.dm_only is not None:
            emit("micro@dm_only", self.dm_only.micro)
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        header = f"{'label':<20} {'P':>8} {'R':>8} {'F':>8} {'tp':>6} {'fp':>6} {'fn':>6}"
        rows = [f"match mode: {self.mode}", header, "-" * len(header)]

        def fmt(label, c):
            return (
                f"{label:<20} {c.precision:8.4f} {c.recall:8.4f} {c.f:8.4f}"
                f" {c.tp:6d} {c.fp:6d} {c.fn:6d}"
            )

        for label in sorted(self.per_label):
            rows.append(fmt(label, self.per_label[label]))
        rows.append(fmt("micro", self.micro))
        if self.dm_sentences is not None:
            rows.append(fmt("micro@dm_sentences", self.dm_sentences.micro))
        if self.dm_only is not None:
            rows.append(fmt("micro@dm_only", self.dm_only.micro))
        if self.dm_sentences is None and self.dm_only is None:
            rows.append("(no discontinuous gold mentions; subset scores omitted)")
        return "\n".join(rows) + "\n"


def _document_order(mentions):
    return sorted(mentions, key=lambda m: (m.fragments, m.label))


def micro_f(gold_docs, pred_docs, mode: str) -> ScoreReport:
    """Greedy one-to-one matching per sentence, pooled micro counts."""
    if mode not in _MATCHERS:
        raise DataError(f"unknown match mode {mode!r}; expected lenient or strict")
    if len(gold_docs) != len(pred_docs):
        raise DataError(
            f"gold has {len(gold_docs)} sentences but predictions have {len(pred_docs)}"
        )
    match = _MATCHERS[mode]
    per_label: dict[str, Counts] = {}

    def bucket(label):
        return per_label.setdefault(label, Counts())

    for gold, pred in zip(gold_docs, pred_docs):
        preds = _document_order(pred)
        used = [False] * len(preds)
        for g in _document_order(gold):
            for i, p in enumerate(preds):
                if not used[i] and match(g, p):
                    used[i] = True
                    bucket(g.label).tp += 1
                    break
            else:
                bucket(g.label).fn += 1
        for i, p in enumerate(preds):
            if not used[i]:
                bucket(p.label).fp += 1

    micro = Counts(
        tp=sum(c.tp for c in per_label.values()),
        fp=sum(c.fp for c in per_label.values()),
        fn=sum(c.fn for c in per_label.values()),
    )
    return ScoreReport(mode=mode, micro=micro, per_label=per_label)


def breakdown_report(gold_docs, pred_docs, mode: str) -> ScoreReport:
    """Full report: per-label scores plus discontinuous-mention subsets.

    Subset scores are attached only when the gold corpus contains at least
    one discontinuous mention: (a) restricted to sentences with one, and
    (b) restricted to discontinuous mentions on both sides.
    """
    report = micro_f(gold_docs, pred_docs, mode)
    dm_idx = [i for i, gold in enumerate(gold_docs) if any(m.discontinuous for m in gold)]
    if dm_idx:
        report.dm_sentences = micro_f(
            [gold_docs[i] for i in dm_idx], [pred_docs[i] for i in dm_idx], mode
        )
        report.dm_only = micro_f(
            [[m for m in gold if m.discontinuous] for gold in gold_docs],
            [[m for m in pred if m.discontinuous] for pred in pred_docs],
            mode,
        )
    return report

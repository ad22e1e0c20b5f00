import numpy as np
import pytest

from mcdre.codec import Mention
from mcdre.errors import DataError
from mcdre.metrics import Counts, breakdown_report, match_lenient, match_strict, micro_f
from oracles import max_bipartite_tp, random_representable_mentions


def m(label, *frags):
    return Mention(label, frags)


class TestMatchers:
    def test_strict_identical(self):
        assert match_strict(m("Drug", (3, 6)), m("Drug", (3, 6)))

    def test_strict_boundary_differs(self):
        assert not match_strict(m("Drug", (3, 6)), m("Drug", (3, 5)))

    def test_strict_fragment_set_differs(self):
        assert not match_strict(m("ADE", (0, 2), (4, 5)), m("ADE", (0, 2)))

    def test_lenient_overlap(self):
        assert match_lenient(m("Drug", (3, 6)), m("Drug", (5, 8)))

    def test_lenient_half_open_no_shared_token(self):
        assert not match_lenient(m("Drug", (3, 6)), m("Drug", (6, 8)))

    def test_lenient_label_mismatch(self):
        assert not match_lenient(m("Drug", (3, 6)), m("ADE", (3, 6)))

    def test_strict_implies_lenient_on_random_pairs(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            s1, s2 = int(rng.integers(0, 8)), int(rng.integers(0, 8))
            a = m(str(rng.integers(0, 3)), (s1, s1 + 1 + int(rng.integers(0, 3))))
            b = m(str(rng.integers(0, 3)), (s2, s2 + 1 + int(rng.integers(0, 3))))
            if match_strict(a, b):
                assert match_lenient(a, b)


class TestMicroF:
    def test_perfect_prediction(self):
        gold = [[m("A", (0, 2)), m("B", (3, 4))]]
        for mode in ("strict", "lenient"):
            rep = micro_f(gold, gold, mode)
            assert (rep.micro.precision, rep.micro.recall, rep.micro.f) == (1.0, 1.0, 1.0)

    def test_empty_predictions(self):
        rep = micro_f([[m("A", (0, 1))]], [[]], "strict")
        assert (rep.micro.precision, rep.micro.recall, rep.micro.f) == (0.0, 0.0, 0.0)

    def test_hand_formula_case(self):
        gold = [[m("A", (0, 1)), m("A", (2, 3)), m("A", (4, 5))]]
        pred = [[m("A", (0, 1)), m("A", (7, 8))]]
        rep = micro_f(gold, pred, "strict")
        assert rep.micro.precision == pytest.approx(0.5)
        assert rep.micro.recall == pytest.approx(1 / 3)
        assert rep.micro.f == pytest.approx(0.4)

    def test_misaligned_documents(self):
        with pytest.raises(DataError):
            micro_f([[]], [[], []], "strict")

    def test_micro_is_sum_of_labels(self):
        gold = [[m("A", (0, 1)), m("B", (2, 3))], [m("A", (1, 2))]]
        pred = [[m("A", (0, 1)), m("B", (5, 6))], [m("B", (1, 2))]]
        rep = micro_f(gold, pred, "strict")
        assert rep.micro.tp == sum(c.tp for c in rep.per_label.values())
        assert rep.micro.fp == sum(c.fp for c in rep.per_label.values())
        assert rep.micro.fn == sum(c.fn for c in rep.per_label.values())

    def test_adding_spurious_prediction_never_raises_precision(self):
        rng = np.random.default_rng(23)
        for _ in range(60):
            gold = [[m("A", (0, 2)), m("B", (4, 5))]]
            pred = [[m("A", (0, 2))]]
            base = micro_f(gold, pred, "lenient").micro.precision
            extra = m(str(rng.integers(0, 3)), (int(rng.integers(0, 6)), int(rng.integers(6, 9))))
            bumped = micro_f(gold, [pred[0] + [extra]], "lenient").micro.precision
            assert bumped <= base + 1e-12

    def test_label_permutation_invariance(self):
        gold = [[m("A", (0, 1)), m("B", (2, 4))]]
        pred = [[m("A", (0, 1)), m("B", (2, 3))]]
        swap = {"A": "B", "B": "A"}

        def rename(docs):
            return [[Mention(swap[x.label], x.fragments) for x in doc] for doc in docs]

        for mode in ("strict", "lenient"):
            a = micro_f(gold, pred, mode).micro
            b = micro_f(rename(gold), rename(pred), mode).micro
            assert (a.tp, a.fp, a.fn) == (b.tp, b.fp, b.fn)


class TestBreakdown:
    def test_no_discontinuous_marks_subsets_empty(self):
        gold = [[m("A", (0, 1))]]
        rep = breakdown_report(gold, gold, "strict")
        assert rep.dm_sentences is None and rep.dm_only is None
        plain = micro_f(gold, gold, "strict")
        assert rep.micro == plain.micro

    def test_discontinuous_subset_scores(self):
        gold = [[m("A", (0, 1)), m("B", (2, 3), (5, 6))]]
        rep = breakdown_report(gold, gold, "strict")
        assert rep.dm_only is not None
        assert rep.dm_only.micro.tp == 1
        assert rep.dm_only.micro.f == 1.0
        assert rep.dm_sentences.micro.tp == 2

    def test_dm_only_counts_fp_from_discontinuous_predictions(self):
        gold = [[m("A", (0, 1), (3, 4))]]
        pred = [[m("A", (0, 1), (5, 6)), m("A", (7, 8))]]
        rep = breakdown_report(gold, pred, "strict")
        # the flat prediction is invisible to the dm-only subset
        assert rep.dm_only.micro.fp == 1
        assert rep.dm_only.micro.fn == 1

    def test_tsv_round_numbers(self):
        gold = [[m("A", (0, 1))]]
        text = breakdown_report(gold, gold, "lenient").to_tsv()
        line = [l for l in text.splitlines() if l.startswith("micro\t")][0]
        assert line.split("\t") == ["micro", "lenient", "1.000000", "1.000000", "1.000000", "1", "0", "0"]


def _random_corpus(rng):
    """Small gold corpus plus a noisy prediction for the oracle test."""
    gold_docs, pred_docs = [], []
    for _ in range(int(rng.integers(1, 6))):
        mentions, length = random_representable_mentions(rng, max_len=12)
        gold = list(set(mentions))[: int(rng.integers(0, 7))]
        pred = []
        for g in gold:
            roll = rng.random()
            if roll < 0.55:
                pred.append(g)
            elif roll < 0.8:
                s, e = g.fragments[0]
                shifted = (max(0, s + int(rng.integers(-1, 2))), e + int(rng.integers(0, 2)))
                if shifted[0] < shifted[1]:
                    pred.append(Mention(g.label, [shifted]))
        if rng.random() < 0.4:
            s = int(rng.integers(0, 10))
            pred.append(m(str(rng.integers(0, 3)), (s, s + 1)))
        gold_docs.append(gold)
        pred_docs.append(pred)
    return gold_docs, pred_docs


class TestAgainstBruteForce:
    def test_greedy_matches_optimal_on_random_corpora(self):
        rng = np.random.default_rng(555)
        matcher = {"strict": match_strict, "lenient": match_lenient}
        agree, total = 0, 0
        for _ in range(50):
            gold_docs, pred_docs = _random_corpus(rng)
            for mode in ("strict", "lenient"):
                total += 1
                rep = micro_f(gold_docs, pred_docs, mode)
                best_tp = sum(
                    max_bipartite_tp(g, p, matcher[mode])
                    for g, p in zip(gold_docs, pred_docs)
                )
                if rep.micro.tp == best_tp:
                    agree += 1
                else:
                    assert rep.micro.tp < best_tp  # greedy may undercount, never overcount
        assert agree >= 0.95 * total

import numpy as np
import pytest

from mcdre.codec import Mention
from mcdre.data import (
    SentenceRecord,
    Vocab,
    format_mentions,
    load_columnar,
    load_embeddings,
    load_mentions,
    write_columnar,
    write_embeddings,
)
from mcdre.errors import DataError, ParseError


def test_record_columns_must_align():
    with pytest.raises(DataError):
        SentenceRecord(["a", "b"], ["X"], ["O", "O"], ["O", "O"])


class TestColumnar:
    def test_two_sentence_file(self, tmp_path):
        path = tmp_path / "data.tsv"
        path.write_text(
            "aspirin\tPROPN\tB-CHEM\tB-Drug\n"
            "helps\tVERB\tO\tO\n"
            "fast\tADV\tO\tO\n"
            "\n"
            "it\tPRON\tO\tO\n"
            "worked\tVERB\tO\tO\n"
        )
        records = load_columnar(path)
        assert len(records) == 2
        assert [len(r) for r in records] == [3, 2]
        assert records[0].tokens[0] == "aspirin"
        assert records[0].provenance == "s0"

    def test_comment_only_file_is_empty(self, tmp_path):
        path = tmp_path / "data.tsv"
        path.write_text("# header\n# another\n")
        assert load_columnar(path) == []

    def test_provenance_comment(self, tmp_path):
        path = tmp_path / "data.tsv"
        path.write_text("#id doc7:3\nx\t_\t_\tO\n")
        assert load_columnar(path)[0].provenance == "doc7:3"

    def test_round_trip(self, tmp_path):
        records = [
            SentenceRecord(["a", "b"], ["X", "Y"], ["O", "O"], ["B-D", "O"], "r0"),
            SentenceRecord(["c"], ["_"], ["_"], ["O"], "r1"),
        ]
        path = tmp_path / "out.tsv"
        write_columnar(records, path)
        back = load_columnar(path)
        assert back == records

    def test_ragged_line_names_line_number(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("tok\tA\tB\tO\n" "tok\tonly-two\n")
        with pytest.raises(ParseError, match="bad.tsv:2"):
            load_columnar(path)

    def test_scheme_validation(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("tok\t_\t_\tDB-X\n")
        with pytest.raises(ParseError, match="DB-X"):
            load_columnar(path, scheme="bio")
        assert load_columnar(path, scheme="biohd")[0].entity_tags == ["DB-X"]


class TestVocab:
    def test_build_reserves_specials(self):
        v = Vocab.build([["x", "y"], ["x"]])
        assert v.tokens[:2] == ["<pad>", "<unk>"]
        assert v.id("y") == 3
        assert v.id("never-seen") == v.unk_id

    def test_no_unk_raises(self):
        v = Vocab(["a", "b"])
        with pytest.raises(DataError):
            v.id("c")

    def test_duplicate_entry(self):
        with pytest.raises(DataError):
            Vocab(["a", "a"])

    def test_record_ids_prefers_occurrence_keys(self):
        v = Vocab(["<unk>", "doc1:0", "hello"])
        rec = SentenceRecord(["hello", "hello"], ["_"] * 2, ["_"] * 2, ["_"] * 2, "doc1")
        np.testing.assert_array_equal(v.record_ids(rec), [1, 2])


class TestEmbeddings:
    def test_small_file(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("2 3\nfoo 1 2 3\nbar 4.5 -1 0\n")
        weights, vocab = load_embeddings(path)
        assert weights.shape == (2, 3)
        assert vocab.tokens == ["foo", "bar"]
        np.testing.assert_allclose(weights[1], [4.5, -1, 0])

    def test_round_trip_close(self, tmp_path):
        rng = np.random.default_rng(0)
        weights = rng.standard_normal((4, 5)).astype(np.float32)
        path = tmp_path / "emb.txt"
        write_embeddings(path, ["a", "b", "c", "d"], weights)
        back, vocab = load_embeddings(path)
        np.testing.assert_allclose(back, weights, atol=1e-6)
        assert vocab.tokens == ["a", "b", "c", "d"]

    def test_count_mismatch(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("3 2\nfoo 1 2\n")
        with pytest.raises(ParseError, match="file ends"):
            load_embeddings(path)

    def test_non_numeric_field(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("1 2\nfoo 1 oops\n")
        with pytest.raises(ParseError, match=":2"):
            load_embeddings(path)

    def test_wrong_width(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("1 3\nfoo 1 2\n")
        with pytest.raises(ParseError):
            load_embeddings(path)


class TestMentionLines:
    def test_round_trip(self, tmp_path):
        by_doc = {
            "0": [Mention("Drug", [(0, 1)]), Mention("ADE", [(2, 3), (5, 6)])],
            "1": [],
            "2": [Mention("Reason", [(4, 5)])],
        }
        path = tmp_path / "m.tsv"
        path.write_text(format_mentions(by_doc))
        back = load_mentions(path)
        assert back["0"] == sorted(by_doc["0"])
        assert back["2"] == by_doc["2"]
        assert "1" not in back  # empty docs carry no lines

    def test_bad_span(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("0\tDrug\t3-x\n")
        with pytest.raises(ParseError, match="m.tsv:1"):
            load_mentions(path)

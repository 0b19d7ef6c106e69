import io
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from neighbor_splice.core import BOS, EOS, MASK, TokenSequence, Vocabulary
from neighbor_splice.errors import AlreadyPadded, EmptyCorpus
from neighbor_splice.preprocessing import (
    PMITable,
    build_pmi_table,
    dedupe_pairs,
    extract_source_spans,
    load_stopwords,
    mask_pmi,
    mask_source_overlap,
    pad,
    tokenize,
)
from neighbor_splice.retrieval import TableSource


def test_tokenize():
    assert tokenize("Born in  PARIS\t.") == ["born", "in", "paris", "."]
    assert tokenize("Born", lowercase=False) == ["Born"]


def test_pad():
    assert pad(TokenSequence((5,))).tokens == (BOS, 5, EOS)
    assert pad(()).tokens == (BOS, EOS)
    assert pad([]).padded
    with pytest.raises(AlreadyPadded):
        pad(pad((5,)))
    with pytest.raises(AlreadyPadded):
        pad((BOS, 5, EOS))


def test_stopwords_bundled_list():
    words = load_stopwords()
    assert len(words) == 127 == len(set(words))
    assert "the" in words and "in" in words


def test_stopwords_from_file(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("foo\n\nbar\nfoo\n", encoding="utf-8")
    assert load_stopwords(path) == ["foo", "bar"]


def _words(vocab, text):
    return vocab.encode(text.split())


def test_mask_overlap_example():
    vocab = Vocabulary()
    nu = _words(vocab, "born in paris")
    src = TableSource((("birthplace", _words(vocab, "paris")),))
    stop = {vocab["in"]}
    assert mask_source_overlap(nu, src, stop) == (vocab["born"], vocab["in"], MASK)


def test_mask_overlap_no_overlap_and_stopwords():
    vocab = Vocabulary()
    nu = _words(vocab, "the the")
    src = TableSource((("x", _words(vocab, "the")),))
    assert mask_source_overlap(nu, src, {vocab["the"]}) == nu
    other = TableSource((("x", _words(vocab, "zebra")),))
    assert mask_source_overlap(_words(vocab, "a b"), other) == _words(vocab, "a b")


def test_mask_overlap_longest_stretch_with_stopword_inside():
    vocab = Vocabulary()
    nu = _words(vocab, "x new york y")
    src = TableSource((("city", _words(vocab, "new york")),))
    assert mask_source_overlap(nu, src, {vocab["new"]}) == (vocab["x"], MASK, MASK, vocab["y"])


def test_mask_overlap_does_not_cross_fields():
    vocab = Vocabulary()
    nu = _words(vocab, "a b")
    src = TableSource((("f", _words(vocab, "a")), ("g", _words(vocab, "b"))))
    # each token still matches separately
    assert mask_source_overlap(nu, src) == (MASK, MASK)


def test_mask_overlap_keeps_sentinels():
    src = TableSource((("f", (5,)),))
    assert mask_source_overlap((BOS, 5, EOS), src) == (BOS, MASK, EOS)


small_seqs = st.lists(st.integers(3, 7), max_size=8).map(tuple)


@given(small_seqs, st.lists(small_seqs, max_size=3), st.sets(st.integers(3, 7), max_size=2))
def test_mask_overlap_length_and_idempotence(nu, segments, stop):
    once = mask_source_overlap(nu, segments, stop)
    assert len(once) == len(nu)
    assert mask_source_overlap(once, segments, stop) == once
    assert all(a == b or b == MASK for a, b in zip(nu, once))


def _smith_corpus():
    vocab = Vocabulary()
    rows = [("smith", "smith was here"), ("jones", "jones was here"), ("brown", "brown was there")]
    pairs = [(TableSource((("name", _words(vocab, s)),)), _words(vocab, t)) for s, t in rows]
    return vocab, pairs


def test_pmi_toy_corpus_masks_smith():
    vocab, pairs = _smith_corpus()
    table = build_pmi_table(pairs)
    smith = vocab["smith"]
    assert table.scores[(smith, smith)] == pytest.approx(math.log(3))
    assert table.scores[(smith, vocab["was"])] == pytest.approx(math.log(3 * 1 / (1 * 3)))
    source, nu = pairs[0]
    out = mask_pmi(nu, source, table, tau=1.0, min_count=1)
    assert out == (MASK, vocab["was"], vocab["here"])


def test_pmi_infinite_tau_and_large_min_count():
    vocab, pairs = _smith_corpus()
    table = build_pmi_table(pairs)
    source, nu = pairs[0]
    assert mask_pmi(nu, source, table, tau=math.inf, min_count=1) == nu
    assert mask_pmi(nu, source, table, tau=1.0, min_count=4) == nu


def test_pmi_correlated_and_independent():
    # s and t always together in 2 of 6 examples: ln(6 * 2 / (2 * 2)) = ln 3
    pairs = [((3,), (4,))] * 2 + [((5,), (6,))] * 4
    table = build_pmi_table(pairs)
    assert table.scores[(3, 4)] == pytest.approx(math.log(3))
    # balanced 2x2 design: each combination once, so PMI is exactly 0
    pairs = [((3,), (5,)), ((3,), (6,)), ((4,), (5,)), ((4,), (6,))]
    table = build_pmi_table(pairs)
    assert table.scores[(3, 5)] == pytest.approx(0.0)


def test_pmi_min_count_and_errors():
    pairs = [((3,), (4,)), ((3,), (5,)), ((3,), (5,))]
    table = build_pmi_table(pairs, min_count=2)
    assert (3, 4) not in table.scores and (3, 5) in table.scores
    assert (3, 9) not in table.scores
    with pytest.raises(EmptyCorpus):
        build_pmi_table([])


def test_pmi_jsonl_roundtrip():
    vocab, pairs = _smith_corpus()
    table = build_pmi_table(pairs)
    buf = io.StringIO()
    table.to_jsonl(buf, decode=lambda i: vocab.decode([i])[0])
    buf.seek(0)
    back = PMITable.from_jsonl(buf, encode=lambda w: vocab[w] if w in vocab else None)
    assert back.scores == pytest.approx(table.scores)
    assert back.target_counts == table.target_counts


@given(small_seqs, small_seqs)
def test_mask_pmi_length_and_idempotence(nu, src):
    table = build_pmi_table([(src, nu), ((3,), (4,))])
    once = mask_pmi(nu, src, table, tau=0.1, min_count=1)
    assert len(once) == len(nu)
    assert mask_pmi(once, src, table, tau=0.1, min_count=1) == once


def test_extract_source_spans():
    vocab = Vocabulary()
    t = TableSource((("name", _words(vocab, "ayelet nahmias-verbin")),))
    spans = extract_source_spans(t)
    assert [s.tokens for s in spans] == [(BOS,) + _words(vocab, "ayelet nahmias-verbin") + (EOS,)]
    assert extract_source_spans(TableSource(())) == []
    two = TableSource((("a", (3,)), ("b", (4,)), ("c", ())))
    assert [s.tokens for s in extract_source_spans(two, padded=False)] == [(3,), (4,)]


def test_dedupe_pairs():
    a = {"id": 1, "source": {"x": "1"}, "target": "t"}
    b = {"id": 2, "source": {"x": "1"}, "target": "t"}
    c = {"id": 3, "source": {"x": "1"}, "target": "u"}
    assert dedupe_pairs([a, c]) == [a, c]
    assert dedupe_pairs([a, b]) == [a]
    assert dedupe_pairs([a, b, c]) == [a, c]

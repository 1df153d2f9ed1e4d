import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lexbridge.corpus import (Corpus, build_lexicon, lexicon_to_tsv, read_lexicon, tokenize,
                              vocab_overlap, write_lexicon)
from lexbridge.errors import CorpusDecodeError

FIXTURE = "In the beginning,\n-- God created the heaven\r\n& earth.\n"


def test_empty_input():
    c = tokenize("")
    assert c.lines == () and c.token_count == 0


def test_case_and_punctuation():
    assert tokenize("Abantu, abantu.").lines == (("abantu", "abantu"),)


def test_fixture_token_count_against_independent_rules():
    # independent tokenizer: lowercase, strip non-word characters from both ends
    expected = []
    for line in FIXTURE.replace("\r\n", "\n").rstrip("\n").split("\n"):
        chunks = [re.sub(r"^\W+|\W+$", "", c.lower()) for c in line.split()]
        expected.append(tuple(c for c in chunks if c))
    c = tokenize(FIXTURE)
    assert sum(len(line.split()) for line in FIXTURE.splitlines()) == 10
    assert c.token_count == 8
    assert c.lines == tuple(expected)


def test_inner_punctuation_kept_and_numbers_optional():
    assert tokenize("o'nima 12:3 «word»").lines == (("o'nima", "12:3", "word"),)
    assert tokenize("o'nima 12:3 «word»", drop_numeric=True).lines == (("o'nima", "word"),)


def test_invalid_utf8_reports_offset():
    with pytest.raises(CorpusDecodeError) as err:
        tokenize(b"abc \xff def")
    assert err.value.offset == 4
    assert "offset 4" in str(err.value)


def test_crlf_and_blank_lines_preserved():
    c = tokenize("a b\r\n\r\nc\n")
    assert c.lines == (("a", "b"), (), ("c",))


def test_lexicon_counts_and_threshold():
    c = Corpus((("a", "b", "a"),))
    assert build_lexicon(c).entries == {"a": 2, "b": 1}
    assert build_lexicon(c, 1).size == 2
    lex2 = build_lexicon(c, 2)
    assert lex2.entries == {"a": 2} and lex2.size == 1
    assert build_lexicon(Corpus(())).size == 0
    with pytest.raises(ValueError):
        build_lexicon(c, 0)


def test_lexicon_tsv_order_and_round_trip(tmp_path):
    lex = build_lexicon(tokenize("b a c a b d"))
    assert lexicon_to_tsv(lex) == "a\t2\nb\t2\nc\t1\nd\t1\n"
    write_lexicon(lex, tmp_path / "lex.tsv")
    assert read_lexicon(tmp_path / "lex.tsv").entries == lex.entries


def test_overlap():
    a = build_lexicon(tokenize("x y z"))
    b = build_lexicon(tokenize("1 2"))
    assert vocab_overlap(a, a).intersection == 3 and vocab_overlap(a, a).ratio == 1.0
    assert vocab_overlap(a, b).intersection == 0 and vocab_overlap(a, b).ratio == 0.0
    rep = vocab_overlap(a, build_lexicon(tokenize("x q")), "KW", "ND")
    assert rep.to_tsv() == "KW\tND\t3\t2\t1\t0.3333"


words = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=30)


@settings(max_examples=200, deadline=None)
@given(st.lists(words, max_size=6))
def test_tokenize_idempotent(lines):
    text = "\n".join(lines)
    first = tokenize(text)
    again = tokenize(first.to_text())
    assert again.lines == first.lines
    for tok in first.tokens():
        assert tok and not any(ch.isspace() for ch in tok)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.sampled_from("abcde"), max_size=8), max_size=8),
       st.lists(st.sampled_from("cdefg"), max_size=8))
def test_lexicon_mass_and_overlap_symmetry(lines, other):
    c = Corpus(tuple(tuple(line) for line in lines))
    lex = build_lexicon(c)
    assert sum(lex.entries.values()) == c.token_count
    o = build_lexicon(Corpus((tuple(other),)))
    assert vocab_overlap(lex, o).intersection == vocab_overlap(o, lex).intersection

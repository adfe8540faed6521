import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from codebench import pytok, subword
from codebench.subword import SubwordSequence, SubwordVocabulary


def texts(v, ids):
    return [v.piece(i) for i in ids]


def small_vocab(*pieces):
    alphabet = sorted({c for p in pieces for c in p})
    return SubwordVocabulary(subword.RESERVED + tuple(p for p in pieces if len(p) > 1)
                             + tuple(alphabet))


def test_single_token_corpus():
    v = subword.build_vocabulary({"a": 5}, 30)
    assert "a" in v.entries
    assert len(v.encode_token("a")) == 1


def test_target_below_alphabet_rejected():
    with pytest.raises(subword.VocabError):
        subword.build_vocabulary({"abcdefghij": 3}, 12)
    with pytest.raises(subword.VocabError):
        subword.build_vocabulary({}, 100)


def test_exact_hit_is_one_id():
    v = small_vocab("snake_case", "sna")
    assert texts(v, v.encode_token("snake_case")) == ["snake_case"]


def test_greedy_longest_match_within_token():
    v = small_vocab("sna", "ke")
    assert texts(v, v.encode_token("snake")) == ["sna", "ke"]


def test_unknown_characters_use_byte_escapes():
    v = small_vocab("ab")
    ids = v.encode_token("aé")
    assert texts(v, ids) == ["a", "\\xc3_", "\\xa9_"]
    assert v.decode_token(ids) == "aé"


def brute_force_segmentations(token, pieces):
    """Every way of writing ``token`` as a concatenation of ``pieces``."""
    if not token:
        yield []
        return
    for k in range(1, len(token) + 1):
        if token[:k] in pieces:
            for rest in brute_force_segmentations(token[k:], pieces):
                yield [token[:k]] + rest


def test_greedy_against_segmentation_oracle():
    rng = random.Random(7)
    for _ in range(200):
        pieces = {"".join(rng.choice("abc") for _ in range(rng.randint(2, 4))) for _ in range(8)}
        v = small_vocab(*pieces, "a", "b", "c")
        token = "".join(rng.choice("abc") for _ in range(8))
        got = texts(v, v.encode_token(token))
        assert "".join(got) == token
        oracle = list(brute_force_segmentations(token, set(v.entries)))
        assert got in oracle
        # greedy takes the longest available piece at each step
        pos = 0
        for g in got:
            longest = max(k for k in range(1, len(token) - pos + 1) if token[pos:pos + k] in v.id_of)
            assert len(g) == longest
            pos += len(g)


def test_empty_sequence():
    v = small_vocab("ab")
    s = subword.encode_tokens(v, [])
    assert s.ids == [] and s.token_starts == []
    assert subword.decode(v, s) == []


def test_simple_assignment_has_three_groups():
    v = small_vocab("ab")
    s = subword.encode_tokens(v, pytok.tokenize("i=0"))
    assert s.token_starts == [True, True, True]
    assert subword.decode(v, s) == ["i", "=", "0"]


def test_out_of_range_id():
    v = small_vocab("ab")
    with pytest.raises(subword.DecodeError):
        subword.decode(v, SubwordSequence([v.size], [True]))
    with pytest.raises(subword.DecodeError):
        subword.decode(v, SubwordSequence([0], [False]))


def test_mini_corpus_round_trip(mini_tokens, mini_vocab):
    assert abs(len(mini_vocab) - 2000) <= 200
    distinct = {t.text for toks in mini_tokens.values() for t in toks}
    for text in distinct:
        ids = mini_vocab.encode_token(text)
        assert all(i < mini_vocab.escape_base for i in ids), text
        assert mini_vocab.decode_token(ids) == text
    for toks in itertools.islice(mini_tokens.values(), 40):
        s = subword.encode_tokens(mini_vocab, toks)
        assert subword.decode(mini_vocab, s) == [t.text for t in toks]
        assert sum(s.token_starts) == len(toks)


def test_build_is_deterministic(mini_tokens):
    from collections import Counter
    counts = Counter(t.text for toks in itertools.islice(mini_tokens.values(), 30) for t in toks)
    a = subword.build_vocabulary(counts, 600)
    b = subword.build_vocabulary(dict(reversed(list(counts.items()))), 600)
    assert a.entries == b.entries
    assert a.entries[:len(subword.RESERVED)] == subword.RESERVED


def test_save_load(tmp_path, mini_vocab):
    p = tmp_path / "vocab.txt"
    mini_vocab.save(str(p))
    lines = p.read_text(encoding="utf-8").splitlines()
    assert len(lines) == mini_vocab.size
    assert SubwordVocabulary.load(str(p)).entries == mini_vocab.entries
    p.write_text("\n".join(lines[:-1]) + "\n", encoding="utf-8")
    with pytest.raises(subword.VocabError):
        SubwordVocabulary.load(str(p))


def test_duplicate_entries_rejected():
    with pytest.raises(subword.VocabError):
        SubwordVocabulary(("a", "a"))


@given(st.lists(st.text(min_size=1, max_size=12), max_size=8))
def test_encode_decode_property(tokens):
    v = small_vocab("ab", "abc", "def_")
    s = subword.encode_tokens(v, tokens)
    assert subword.decode(v, s) == tokens
    assert sum(s.token_starts) == len(tokens)


def test_lone_surrogates_round_trip():
    v = small_vocab("ab")
    for text in ("\ud800", "a\udfffb", "\ud83d\ude00"):
        assert v.decode_token(v.encode_token(text)) == text

import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from codebench import dedup
from codebench.dedup import SimilarityKey

from oracles import brute_clusters, brute_jaccard, synthetic_corpus


def key(**counts):
    return SimilarityKey(counts)


def test_key_of_empty_file():
    assert dedup.similarity_key("1 + 2\n").counts == {}


def test_key_counts_whole_lexemes():
    k = dedup.similarity_key("x = 'a'\ny = 'a'\n")
    assert dict(k.counts) == {"x": 1, "y": 1, "'a'": 2}
    assert k.id_set == {"x", "y", "'a'"}
    long = dedup.similarity_key("snake_case_identifier_longer_than_fifteen = 1\nif x: pass\n")
    assert set(long.counts) == {"snake_case_identifier_longer_than_fifteen", "x"}


def test_identical_files_equal_keys():
    src = "def f(a):\n    return a + 'b'\n"
    assert dedup.similarity_key(src) == dedup.similarity_key(src)


def test_jaccard_examples():
    assert dedup.jaccard(key(a=1, b=2), key(a=1, b=2)) == (1, 1)
    assert dedup.jaccard(key(a=2, b=1), key(a=1, b=2)) == (1, Fraction(1, 2))
    assert dedup.jaccard(key(a=1), key(b=1)) == (0, 0)
    assert dedup.jaccard(key(), key()) == (1, 1)


def test_thresholds_are_strict():
    four = dict(a=1, b=1, c=1, d=1)
    assert dedup.jaccard(key(**four), key(**four, e=1))[0] == Fraction(4, 5)
    assert not dedup.is_similar(key(**four), key(**four, e=1))
    assert dedup.jaccard(key(a=7), key(a=10)) == (1, Fraction(7, 10))
    assert not dedup.is_similar(key(a=7), key(a=10))
    assert dedup.is_similar(key(a=8), key(a=10))
    five = dict(a=1, b=1, c=1, d=1, e=1)
    assert dedup.is_similar(key(**five), key(**five, f=1))


def test_planted_cluster():
    keys = {"a.py": key(x=3, y=2, z=1), "b.py": key(x=3, y=2, z=1),
            "c.py": key(x=3, y=3, z=1), "d.py": key(p=1), "e.py": key(r=1)}
    c = dedup.cluster(keys)
    assert c.classes == [["a.py", "b.py", "c.py"], ["d.py"], ["e.py"]]
    assert c.exemplars == ["a.py", "d.py", "e.py"]
    assert c.class_of("b.py") == ["a.py", "b.py", "c.py"]


def test_no_similar_pairs():
    keys = {f"{i}.py": key(**{f"n{i}": 1}) for i in range(5)}
    assert len(dedup.cluster(keys).classes) == 5


def test_chain_is_closed_transitively():
    base = {f"t{i}": 1 for i in range(10)}
    a = dict(base)
    b = dict(base, t10=1)
    c = dict(base, t10=1, t11=1)
    c.pop("t0")
    A, B, C = (SimilarityKey(x) for x in (a, b, c))
    assert dedup.is_similar(A, B) and dedup.is_similar(B, C) and not dedup.is_similar(A, C)
    assert dedup.cluster({"A": A, "B": B, "C": C}).classes == [["A", "B", "C"]]


def test_filter_against():
    keys = {"a.py": key(x=1, y=1), "b.py": key(z=2), "c.py": key()}
    assert dedup.filter_against(keys, keys) == []
    assert dedup.filter_against(keys, {}) == ["a.py", "b.py", "c.py"]
    leaked = {"ref.py": key(z=2)}
    assert dedup.filter_against(keys, leaked) == ["a.py", "c.py"]
    assert dedup.filter_against(keys, {"ref.py": key()}) == ["a.py", "b.py"]


def test_cluster_matches_oracle_small():
    rng = random.Random(11)
    for _ in range(20):
        keys = synthetic_corpus(rng, rng.randint(1, 40))
        got = dedup.cluster({p: SimilarityKey(k) for p, k in keys.items()}).classes
        assert got == brute_clusters(keys)


def test_cluster_independent_of_input_order():
    keys = synthetic_corpus(random.Random(5), 60)
    fwd = dedup.cluster({p: SimilarityKey(k) for p, k in keys.items()})
    rev = dedup.cluster({p: SimilarityKey(keys[p]) for p in reversed(list(keys))})
    assert fwd == rev


counts = st.dictionaries(st.sampled_from("abcdefg"), st.integers(1, 5), max_size=7)


@given(counts, counts)
def test_jaccard_matches_oracle_and_is_symmetric(a, b):
    got = dedup.jaccard(SimilarityKey(a), SimilarityKey(b))
    assert got == brute_jaccard(a, b)
    assert got == dedup.jaccard(SimilarityKey(b), SimilarityKey(a))


def test_dedup_manifest(tmp_path):
    for name, src in [("a.py", "x = 'k'\ny = x\n"), ("b.py", "x = 'k'\ny = x\n"),
                      ("c.py", "import os\nprint(os.sep)\n")]:
        (tmp_path / name).write_text(src)
    paths = [str(tmp_path / n) for n in ("c.py", "b.py", "a.py")]
    assert dedup.dedup_manifest(paths) == [str(tmp_path / "a.py"), str(tmp_path / "c.py")]
    assert dedup.dedup_manifest(paths[:2], against=[str(tmp_path / "a.py")]) == [str(tmp_path / "c.py")]

"""Near-duplicate detection over identifier and string-literal multisets.

Two files are similar when the Jaccard similarity of their token sets is
above 0.8 and that of their token multisets (sum of minimum counts over sum
of maximum counts) is above 0.7. Files are clustered by the transitive
closure of that relation and one exemplar per class is kept.

All-pairs comparison is avoided with prefix filtering: tokens are ordered
by ascending corpus frequency and two files can only reach the set
threshold if their rarest tokens overlap. Survivors are compared exactly.
"""
from __future__ import annotations

import keyword
import logging
import tokenize as _tokenize
from array import array
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

from . import corpus, kernels, pytok

log = logging.getLogger(__name__)

SET_THRESHOLD = Fraction(4, 5)
MULTISET_THRESHOLD = Fraction(7, 10)


class SimilarityKey(NamedTuple):
    counts: Mapping[str, int]

    @property
    def id_set(self) -> frozenset[str]:
        return frozenset(self.counts)

    @property
    def id_multiset(self) -> Mapping[str, int]:
        return self.counts


def similarity_key(source: str) -> SimilarityKey:
    """Whole identifiers and whole string literals of a module."""
    counts: Counter[str] = Counter()
    for lx in pytok.lex(source):
        if lx.type == _tokenize.NAME and not keyword.iskeyword(lx.text):
            counts[lx.text] += 1
        elif lx.type == _tokenize.STRING:
            counts[lx.text] += 1
    return SimilarityKey(dict(counts))


def jaccard(a: SimilarityKey, b: SimilarityKey) -> tuple[Fraction, Fraction]:
    """(set similarity, multiset similarity); empty versus empty is 1."""
    keys = set(a.counts) | set(b.counts)
    if not keys:
        return Fraction(1), Fraction(1)
    inter = sum(1 for k in keys if k in a.counts and k in b.counts)
    smin = sum(min(a.counts.get(k, 0), b.counts.get(k, 0)) for k in keys)
    smax = sum(max(a.counts.get(k, 0), b.counts.get(k, 0)) for k in keys)
    return Fraction(inter, len(keys)), Fraction(smin, smax)


def is_similar(a: SimilarityKey, b: SimilarityKey) -> bool:
    s, m = jaccard(a, b)
    return s > SET_THRESHOLD and m > MULTISET_THRESHOLD


class _Packed:
    """Keys as sorted integer-id runs in flat arrays, ready for the kernels."""

    def __init__(self, keys: Sequence[SimilarityKey]) -> None:
        freq: Counter[str] = Counter()
        for k in keys:
            freq.update(k.counts.keys())
        # rare tokens first; ties broken by the string itself
        order = sorted(freq, key=lambda s: (freq[s], s))
        rank = {s: i for i, s in enumerate(order)}
        self.ids = array("q")
        self.cnts = array("q")
        self.offsets = array("q", [0])
        for k in keys:
            for r, c in sorted((rank[s], c) for s, c in k.counts.items()):
                self.ids.append(r)
                self.cnts.append(c)
            self.offsets.append(len(self.ids))

    def size(self, i: int) -> int:
        return self.offsets[i + 1] - self.offsets[i]

    def prefix(self, i: int) -> array:
        n = self.size(i)
        num, den = SET_THRESHOLD.numerator, SET_THRESHOLD.denominator
        keep = n - (num * n + den - 1) // den + 1
        a = self.offsets[i]
        return self.ids[a:a + max(0, min(n, keep))]

    def similar(self, i: int, candidates: Iterable[int]) -> list[int]:
        return kernels.similar_among(self.ids, self.cnts, self.offsets, i, list(candidates),
                                     SET_THRESHOLD.numerator, SET_THRESHOLD.denominator,
                                     MULTISET_THRESHOLD.numerator, MULTISET_THRESHOLD.denominator)


def _size_compatible(a: int, b: int) -> bool:
    lo, hi = min(a, b), max(a, b)
    return lo * SET_THRESHOLD.denominator > SET_THRESHOLD.numerator * hi


def similar_pairs(keys: Sequence[SimilarityKey]) -> list[tuple[int, int]]:
    """All index pairs ``(i, j)``, ``i < j``, of similar keys."""
    packed = _Packed(keys)
    index: dict[int, list[int]] = defaultdict(list)
    empties: list[int] = []
    pairs: list[tuple[int, int]] = []
    for i in range(len(keys)):
        n = packed.size(i)
        if n == 0:
            pairs.extend((j, i) for j in empties)
            empties.append(i)
            continue
        cands: set[int] = set()
        for tok in packed.prefix(i):
            for j in index[tok]:
                if _size_compatible(n, packed.size(j)):
                    cands.add(j)
            index[tok].append(i)
        pairs.extend((j, i) for j in packed.similar(i, sorted(cands)))
    pairs.sort()
    return pairs


@dataclass
class Clustering:
    classes: list[list[str]]   # each sorted; classes ordered by exemplar
    exemplars: list[str]

    def class_of(self, path: str) -> list[str]:
        for c in self.classes:
            if path in c:
                return c
        raise KeyError(path)


def _find(parent: list[int], i: int) -> int:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def cluster(keys: Mapping[str, SimilarityKey]) -> Clustering:
    """Equivalence classes of the transitive closure of similarity."""
    paths = sorted(keys)
    parent = list(range(len(paths)))
    for i, j in similar_pairs([keys[p] for p in paths]):
        a, b = _find(parent, i), _find(parent, j)
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups: dict[int, list[str]] = defaultdict(list)
    for i, p in enumerate(paths):
        groups[_find(parent, i)].append(p)
    classes = sorted(groups.values(), key=lambda c: c[0])
    return Clustering(classes, [c[0] for c in classes])


def filter_against(keys: Mapping[str, SimilarityKey],
                   reference: Mapping[str, SimilarityKey]) -> list[str]:
    """Paths of ``keys`` not similar to any reference file, sorted."""
    paths = sorted(keys)
    ref_paths = sorted(reference)
    allkeys = [reference[p] for p in ref_paths] + [keys[p] for p in paths]
    packed = _Packed(allkeys)
    nref = len(ref_paths)
    index: dict[int, list[int]] = defaultdict(list)
    ref_empty = False
    for r in range(nref):
        if packed.size(r) == 0:
            ref_empty = True
        for tok in packed.prefix(r):
            index[tok].append(r)
    kept = []
    for k, p in enumerate(paths):
        i = nref + k
        n = packed.size(i)
        if n == 0:
            if not ref_empty:
                kept.append(p)
            continue
        cands = {r for tok in packed.prefix(i) for r in index.get(tok, ())
                 if _size_compatible(n, packed.size(r))}
        if not packed.similar(i, sorted(cands)):
            kept.append(p)
    return kept


def _key_for_path(path: str) -> tuple[str, SimilarityKey | None]:
    src = corpus.read_source(path)
    if src is None:
        return path, None
    try:
        return path, similarity_key(src)
    except pytok.LexError as exc:
        log.warning("%s: %s; skipped", path, exc)
        return path, None


def keys_for(paths: Sequence[str], workers: int = 1) -> dict[str, SimilarityKey]:
    """Keys of all readable, lexable files; others are dropped with a warning."""
    out = {}
    for path, key in corpus.parallel_map(_key_for_path, sorted(set(paths)), workers):
        if key is not None:
            out[path] = key
    return out


def dedup_manifest(paths: Sequence[str], against: Sequence[str] = (),
                   workers: int = 1) -> list[str]:
    """Drop files similar to ``against``, then keep one exemplar per class."""
    keys = keys_for(paths, workers)
    if against:
        ref = keys_for(against, workers)
        keys = {p: keys[p] for p in filter_against(keys, ref)}
    return cluster(keys).exemplars

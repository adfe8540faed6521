"""Masked-language-model and next-sentence examples from source files.

A document is one file; its sentences are runs of consecutive logical lines
packed greedily up to a subtoken budget. Each adjacent sentence pair yields
one example whose second sentence is, half of the time, replaced by a
sentence of another document. Every random decision comes from a
:class:`random.Random` seeded by the digest of (seed, document, duplicate
index, sentence index), so examples do not depend on processing order.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from . import detrand, pytok, subword
from .pytok import ProgramToken
from .subword import SubwordVocabulary

BUCKETS = (128, 256, 512, 1024)
MAX_PREDICTIONS = 20
MASK_RATE = 0.15
DUPE_FACTOR = 10
POOL_RATE = 0.25

MASK, KEEP, RANDOM = "mask", "keep", "random"


@dataclass(frozen=True)
class Sentence:
    ids: tuple[int, ...]
    first_line: int
    last_line: int
    oversized: bool = False   # a hard-split piece of a too-long logical line

    def __len__(self) -> int:
        return len(self.ids)


@dataclass
class PretrainExample:
    subtokens: list[int]
    segment_ids: list[int]
    masked_positions: list[int]
    masked_labels: list[int]
    masked_kinds: list[str]
    nsp_label: bool | None    # True: the second sentence follows the first
    length_bucket: int
    source: str

    def unmasked(self) -> list[int]:
        ids = list(self.subtokens)
        for p, label in zip(self.masked_positions, self.masked_labels):
            ids[p] = label
        return ids

    def to_dict(self) -> dict:
        return {
            "subtokens": self.subtokens,
            "segment_ids": self.segment_ids,
            "masked_positions": self.masked_positions,
            "masked_labels": self.masked_labels,
            "masked_kinds": self.masked_kinds,
            "nsp_label": self.nsp_label,
            "length_bucket": self.length_bucket,
            "source": self.source,
        }


def sentence_budget(bucket: int, plain: bool = False) -> int:
    """Subtokens per sentence so that delimiters and two sentences fit."""
    return bucket - 2 if plain else (bucket - 3) // 2


def build_sentences(tokens: Sequence[ProgramToken], vocab: SubwordVocabulary,
                    target_len: int) -> list[Sentence]:
    """Greedy packing of whole logical lines into sentences of ≤ ``target_len``.

    A single logical line longer than the budget is hard-split into
    budget-sized pieces, flagged ``oversized``.
    """
    if target_len < 1:
        raise ValueError("target_len must be positive")
    out: list[Sentence] = []
    cur: list[int] = []
    first = 0
    for line in pytok.logical_lines(tokens):
        ids = subword.encode_tokens(vocab, line.tokens).ids
        if len(ids) > target_len:
            if cur:
                out.append(Sentence(tuple(cur), first, line.index - 1))
                cur = []
            for k in range(0, len(ids), target_len):
                out.append(Sentence(tuple(ids[k:k + target_len]), line.index, line.index, True))
            first = line.index + 1
            continue
        if cur and len(cur) + len(ids) > target_len:
            out.append(Sentence(tuple(cur), first, line.index - 1))
            cur = []
        if not cur:
            first = line.index
        cur.extend(ids)
        last = line.index
    if cur:
        out.append(Sentence(tuple(cur), first, last))
    return out


@dataclass
class Document:
    path: str
    sentences: list[Sentence] = field(default_factory=list)


def _split_single(doc: Document, vocab: SubwordVocabulary, tokens: Sequence[ProgramToken],
                  target_len: int) -> list[Sentence]:
    """Two sentences from a one-sentence document, split at a line boundary."""
    lines = pytok.logical_lines(tokens)
    if len(lines) < 2:
        return doc.sentences
    half = len(lines) // 2
    a = [i for ln in lines[:half] for i in subword.encode_tokens(vocab, ln.tokens).ids]
    b = [i for ln in lines[half:] for i in subword.encode_tokens(vocab, ln.tokens).ids]
    return [Sentence(tuple(a[:target_len]), 0, half - 1),
            Sentence(tuple(b[:target_len]), half, len(lines) - 1)]


def make_documents(files: Sequence[tuple[str, Sequence[ProgramToken]]],
                   vocab: SubwordVocabulary, bucket: int, plain: bool = False) -> list[Document]:
    budget = sentence_budget(bucket, plain)
    docs = []
    for path, tokens in sorted(files, key=lambda pt: pt[0]):
        doc = Document(path, build_sentences(tokens, vocab, budget))
        if len(doc.sentences) == 1 and not plain:
            doc.sentences = _split_single(doc, vocab, tokens, budget)
        if doc.sentences:
            docs.append(doc)
    return docs


class _Pool:
    """Sentences eligible as random second sentences, sampled by digest."""

    def __init__(self, docs: Sequence[Document], seed: str, rate: float) -> None:
        self.entries: list[tuple[int, int]] = []
        for d, doc in enumerate(docs):
            for s in range(len(doc.sentences)):
                if detrand.keep_sample(f"{seed}\0pool", [doc.path, s], rate):
                    self.entries.append((d, s))
        self.doc_starts = [bisect.bisect_left(self.entries, (d, 0)) for d in range(len(docs) + 1)]

    def pick(self, rng, exclude_doc: int) -> tuple[int, int] | None:
        lo, hi = self.doc_starts[exclude_doc], self.doc_starts[exclude_doc + 1]
        n = len(self.entries) - (hi - lo)
        if n <= 0:
            return None
        k = rng.randrange(n)
        return self.entries[k if k < lo else k + (hi - lo)]


def _mask(ids: list[int], rng, vocab: SubwordVocabulary,
          special: set[int], mask_rate: float, max_predictions: int
          ) -> tuple[list[int], list[int], list[int], list[str]]:
    cands = [k for k, i in enumerate(ids) if i not in special]
    n = min(max_predictions, max(1, math.ceil(mask_rate * len(cands)))) if cands else 0
    chosen = sorted(rng.sample(cands, n))
    out = list(ids)
    labels, kinds = [], []
    low = len(subword.RESERVED)
    for p in chosen:
        labels.append(ids[p])
        r = rng.random()
        if r < 0.8:
            out[p] = vocab.id_of[subword.MASK]
            kinds.append(MASK)
        elif r < 0.9:
            kinds.append(KEEP)
        else:
            out[p] = rng.randrange(low, max(low + 1, len(vocab)))
            kinds.append(RANDOM)
    return out, chosen, labels, kinds


def gen_pretrain_examples(docs: Sequence[Document], vocab: SubwordVocabulary, seed: str,
                          bucket: int = 512, dupe_factor: int = DUPE_FACTOR,
                          plain: bool = False, mask_rate: float = MASK_RATE,
                          max_predictions: int = MAX_PREDICTIONS,
                          pool_rate: float = POOL_RATE) -> Iterator[PretrainExample]:
    """Examples for ``dupe_factor`` passes over the documents.

    With ``plain`` set, every sentence becomes one unmasked single-sentence
    example and no negatives are made.
    """
    if bucket not in BUCKETS:
        raise ValueError(f"bucket must be one of {BUCKETS}")
    cls_id, sep_id = vocab.id_of[subword.CLS], vocab.id_of[subword.SEP]
    special = {cls_id, sep_id}
    if plain:
        for dup in range(dupe_factor):
            for doc in docs:
                for i, s in enumerate(doc.sentences):
                    ids = [cls_id, *s.ids, sep_id]
                    yield PretrainExample(ids, [0] * len(ids), [], [], [], None, bucket,
                                          f"{doc.path}:{i}/{dup}")
        return
    pool = _Pool(docs, seed, pool_rate)
    for dup in range(dupe_factor):
        for d, doc in enumerate(docs):
            sents = doc.sentences
            for i in range(len(sents) - 1):
                rng = detrand.digest(seed, "pretrain", doc.path, dup, i).rng()
                a = sents[i]
                is_next = True
                b = sents[i + 1]
                if rng.random() < 0.5:
                    other = pool.pick(rng, d)
                    if other is not None:
                        b = docs[other[0]].sentences[other[1]]
                        is_next = False
                ids = [cls_id, *a.ids, sep_id, *b.ids, sep_id]
                seg = [0] * (len(a) + 2) + [1] * (len(b) + 1)
                masked, pos, labels, kinds = _mask(ids, rng, vocab, special,
                                                   mask_rate, max_predictions)
                yield PretrainExample(masked, seg, pos, labels, kinds, is_next, bucket,
                                      f"{doc.path}:{i}/{dup}")

"""Subword vocabulary built by greedy compression of program tokens.

Each program token is encoded on its own, by greedy longest match, so no
subword ever spans two program tokens. Characters missing from the
vocabulary fall back to byte escapes, which makes encoding total.
"""
from __future__ import annotations

import json
import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import kernels
from .pytok import SPECIAL_TEXTS, ProgramToken

log = logging.getLogger(__name__)

PAD, UNK, CLS, SEP, MASK = "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"
RESERVED = (PAD, UNK, CLS, SEP, MASK) + SPECIAL_TEXTS

NUM_ITERATIONS = 4
_ESCAPE = re.compile(r"\\x([0-9a-f]{2})_\Z")


class VocabError(ValueError):
    pass


class DecodeError(ValueError):
    pass


def escape_piece(byte: int) -> str:
    return f"\\x{byte:02x}_"


@dataclass(frozen=True)
class SubwordSequence:
    ids: list[int]
    token_starts: list[bool]

    def __len__(self) -> int:
        return len(self.ids)


@dataclass
class SubwordVocabulary:
    """Ordered subword inventory.

    ``entries`` holds the reserved tokens followed by learned subwords and
    the alphabet. The 256 byte escapes take the ids right after the entries
    and are not counted in ``len(vocab)``.
    """
    entries: tuple[str, ...]
    id_of: dict[str, int] = field(init=False, repr=False)
    max_len: int = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.entries = tuple(self.entries)
        if len(set(self.entries)) != len(self.entries):
            raise VocabError("duplicate vocabulary entries")
        bad = [e for e in self.entries if not e or _ESCAPE.match(e)]
        if bad:
            raise VocabError(f"invalid entries: {bad[:5]!r}")
        self.id_of = {s: i for i, s in enumerate(self.entries)}
        self.max_len = max((len(e) for e in self.entries), default=1)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def escape_base(self) -> int:
        return len(self.entries)

    @property
    def size(self) -> int:
        """Number of valid ids, escapes included."""
        return len(self.entries) + 256

    @property
    def alphabet(self) -> set[str]:
        return {e for e in self.entries if len(e) == 1}

    def piece(self, i: int) -> str:
        if 0 <= i < len(self.entries):
            return self.entries[i]
        if len(self.entries) <= i < self.size:
            return escape_piece(i - len(self.entries))
        raise DecodeError(f"id {i} out of range [0, {self.size})")

    def encode_token(self, text: str) -> list[int]:
        return kernels.greedy_segment(text, self.id_of, self.max_len, len(self.entries))

    def decode_token(self, ids: Sequence[int]) -> str:
        out: list[str] = []
        pending = bytearray()
        n = len(self.entries)
        for i in ids:
            if 0 <= i < n:
                if pending:
                    out.append(_flush(pending))
                out.append(self.entries[i])
            elif n <= i < n + 256:
                pending.append(i - n)
            else:
                raise DecodeError(f"id {i} out of range [0, {self.size})")
        if pending:
            out.append(_flush(pending))
        return "".join(out)

    # -- file format: one JSON-quoted subword per line, line number - 1 == id

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for e in self.entries:
                fh.write(json.dumps(e, ensure_ascii=False) + "\n")
            for b in range(256):
                fh.write(json.dumps(escape_piece(b)) + "\n")

    @classmethod
    def load(cls, path: str) -> "SubwordVocabulary":
        with open(path, encoding="utf-8") as fh:
            items = [json.loads(line) for line in fh if line.strip()]
        if len(items) < 256 or any(items[-256 + b] != escape_piece(b) for b in range(256)):
            raise VocabError(f"{path}: missing byte-escape block")
        return cls(tuple(items[:-256]))


def _flush(pending: bytearray) -> str:
    try:
        text = pending.decode("utf-8", "surrogatepass")
    except UnicodeDecodeError as exc:
        raise DecodeError(f"invalid byte escape sequence {bytes(pending)!r}") from exc
    pending.clear()
    return text


def encode_token(v: SubwordVocabulary, t: str) -> list[int]:
    return v.encode_token(t)


def encode_tokens(v: SubwordVocabulary, tokens: Iterable[str | ProgramToken]) -> SubwordSequence:
    ids: list[int] = []
    starts: list[bool] = []
    for tok in tokens:
        text = tok.text if isinstance(tok, ProgramToken) else tok
        piece_ids = v.encode_token(text)
        ids.extend(piece_ids)
        starts.append(True)
        starts.extend([False] * (len(piece_ids) - 1))
    return SubwordSequence(ids, starts)


def decode(v: SubwordVocabulary, s: SubwordSequence) -> list[str]:
    if len(s.ids) != len(s.token_starts):
        raise DecodeError("ids and token_starts differ in length")
    if s.token_starts and not s.token_starts[0]:
        raise DecodeError("sequence does not begin at a token start")
    out: list[str] = []
    group: list[int] = []
    for i, start in zip(s.ids, s.token_starts):
        if start and group:
            out.append(v.decode_token(group))
            group = []
        group.append(i)
    if group:
        out.append(v.decode_token(group))
    return out


# --------------------------------------------------------------------------
# construction

def _build_with_threshold(items: Sequence[tuple[str, int]], alphabet: Sequence[str],
                          min_count: int, first_counts: Mapping[str, int],
                          num_iterations: int, reserved: Sequence[str]) -> tuple[str, ...]:
    alphabet_set = set(alphabet)
    known: set[str] = set(alphabet)
    max_len = 1
    ranked: list[tuple[int, str]] = []
    for it in range(num_iterations):
        if it == 0:
            counts = dict(first_counts)
        else:
            counts = kernels.count_substrings(items, known, max_len)
        by_len: dict[int, list[str]] = defaultdict(list)
        for s, c in counts.items():
            if c >= min_count:
                by_len[len(s)].append(s)
        ranked = []
        for length in sorted(by_len, reverse=True):
            for s in by_len[length]:
                c = counts[s]
                if c < min_count:
                    continue
                if s not in alphabet_set:
                    ranked.append((c, s))
                for k in range(1, length):
                    counts[s[:k]] -= c
        ranked.extend((counts.get(a, 0), a) for a in alphabet)
        ranked.sort(key=lambda x: (-x[0], x[1]))
        known = {s for _, s in ranked}
        max_len = max(len(s) for s in known)
    reserved_set = set(reserved)
    learned = [s for _, s in ranked if s not in reserved_set and not _ESCAPE.match(s)]
    return tuple(reserved) + tuple(learned)


def build_vocabulary(token_counts: Mapping[str, int], target_size: int,
                     num_iterations: int = NUM_ITERATIONS,
                     reserved: Sequence[str] = RESERVED,
                     tolerance: float = 0.01) -> SubwordVocabulary:
    """Build a vocabulary of about ``target_size`` entries.

    Binary search over the minimum substring count; stops early once the
    size is within ``tolerance`` of the target, otherwise returns the
    closest size seen. Smaller corpora may not reach the target at all, in
    which case the largest attainable vocabulary is returned.
    """
    items = sorted((t, int(c)) for t, c in token_counts.items() if t and c > 0)
    if not items:
        raise VocabError("empty token counts")
    alphabet = sorted({ch for t, _ in items for ch in t} - set(reserved))
    required = len(reserved) + len(alphabet)
    if target_size < required:
        raise VocabError(f"target size {target_size} is below the {required} entries "
                         "needed for reserved tokens and the alphabet")
    first = kernels.count_substrings(items, set(alphabet), 1)
    lo, hi = 1, max(c for _, c in items)
    best: tuple[int, int, tuple[str, ...]] | None = None
    while lo <= hi:
        mid = (lo + hi) // 2
        entries = _build_with_threshold(items, alphabet, mid, first, num_iterations, reserved)
        gap = abs(len(entries) - target_size)
        log.debug("threshold %d -> %d entries", mid, len(entries))
        if best is None or (gap, mid) < (best[0], best[1]):
            best = (gap, mid, entries)
        if gap <= tolerance * target_size:
            break
        if len(entries) > target_size:
            lo = mid + 1
        else:
            hi = mid - 1
    assert best is not None
    return SubwordVocabulary(best[2])

"""Localization-and-repair examples: subtokenized code plus three masks."""
from __future__ import annotations

from dataclasses import dataclass, replace

from .. import pysyntax, subword
from ..pysyntax import FunctionUnit
from ..subword import SubwordVocabulary
from .generators import ExamplePair

MAX_LENGTHS = (128, 256, 512, 1024)


class PointerError(ValueError):
    pass


@dataclass(frozen=True)
class PointerExample:
    subtokens: tuple[str, ...]
    token_starts: tuple[bool, ...]
    candidates_mask: tuple[bool, ...]
    targets_mask: tuple[bool, ...]
    error_location_mask: tuple[bool, ...]
    provenance: str
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.subtokens)

    @property
    def buggy(self) -> bool:
        return not self.error_location_mask[0] if self.error_location_mask else False

    def to_dict(self) -> dict:
        return {
            "subtokens": list(self.subtokens),
            "token_starts": list(self.token_starts),
            "candidates_mask": list(self.candidates_mask),
            "targets_mask": list(self.targets_mask),
            "error_location_mask": list(self.error_location_mask),
            "provenance": self.provenance,
            "truncated": self.truncated,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PointerExample":
        n = len(d["subtokens"])
        masks = [d["candidates_mask"], d["targets_mask"], d["error_location_mask"]]
        if any(len(m) != n for m in masks):
            raise PointerError(f"{d.get('provenance')}: mask lengths differ from subtokens")
        return cls(tuple(d["subtokens"]), tuple(d.get("token_starts") or (True,) * n),
                   *(tuple(bool(x) for x in m) for m in masks),
                   provenance=d["provenance"], truncated=bool(d.get("truncated", False)))


def _encode(unit: FunctionUnit, vocab: SubwordVocabulary) -> tuple[list[str], list[bool], list[int]]:
    """Subtokens with a leading [CLS], and the position of each program token."""
    seq = subword.encode_tokens(vocab, unit.tokens)
    pieces = [subword.CLS] + [vocab.piece(i) for i in seq.ids]
    starts = [True] + list(seq.token_starts)
    positions = [k for k, s in enumerate(starts) if s][1:]
    return pieces, starts, positions


def _example(unit: FunctionUnit, vocab: SubwordVocabulary, provenance: str,
             error_token: int | None, target_name: str | None) -> PointerExample:
    feats = pysyntax.analyze(unit)
    pieces, starts, positions = _encode(unit, vocab)
    n = len(pieces)
    cand = [False] * n
    targ = [False] * n
    err = [False] * n
    cand[0] = True
    for name, tok in feats.occurrences:
        cand[positions[tok]] = True
        if name == target_name:
            targ[positions[tok]] = True
    if error_token is None:
        err[0] = True
    else:
        # the mutated use may now be shadowed by a nested scope, but it
        # still holds a variable
        err[positions[error_token]] = True
        cand[positions[error_token]] = True
    return PointerExample(tuple(pieces), tuple(starts), tuple(cand), tuple(targ), tuple(err),
                          provenance)


def gen_pointer_example(pair: ExamplePair, vocab: SubwordVocabulary
                        ) -> tuple[PointerExample, PointerExample]:
    """(buggy, bug-free) pointer examples for a variable-misuse pair."""
    if pair.bug is None:
        raise PointerError("pointer examples need a variable-misuse pair")
    f = pair.unit
    buggy_unit = FunctionUnit(pair.buggy.code, f.path, f.qualname, f.line)
    at = {t.span[0]: i for i, t in enumerate(buggy_unit.tokens)}
    try:
        error_token = at[pair.bug.span.start]
    except KeyError:
        raise PointerError(f"{pair.buggy.info}: no token at the mutated use") from None
    buggy = _example(buggy_unit, vocab, pair.buggy.info, error_token, pair.bug.original)
    bugfree = _example(f, vocab, pair.bugfree.info, None, None)
    return buggy, bugfree


def prune_example(e: PointerExample, max_len: int) -> PointerExample:
    """Truncate to ``max_len`` subtokens.

    A buggy example whose error location or every repair target falls
    beyond the limit is kept but flagged ``truncated``; evaluation counts
    it as a failure.
    """
    if max_len < 1:
        raise ValueError("max_len must be positive")
    if len(e) <= max_len:
        return e
    lost = False
    if e.buggy:
        lost = not any(e.error_location_mask[:max_len]) or not any(e.targets_mask[:max_len])
    return replace(
        e,
        subtokens=e.subtokens[:max_len],
        token_starts=e.token_starts[:max_len],
        candidates_mask=e.candidates_mask[:max_len],
        targets_mask=e.targets_mask[:max_len],
        error_location_mask=e.error_location_mask[:max_len],
        truncated=e.truncated or lost,
    )


def _identifier_like(piece: str) -> bool:
    if piece in subword.RESERVED:
        return False
    return piece[:1] == "_" or piece[:1].isalpha() or piece.startswith("\\x")


def mask_violations(e: PointerExample) -> list[str]:
    """Broken mask invariants of an example (empty when it is well formed).

    Flagged truncated examples are only checked for the properties that
    survive truncation.
    """
    out = []
    n = len(e)
    if not (len(e.candidates_mask) == len(e.targets_mask) == len(e.error_location_mask) == n):
        return ["mask lengths differ"]
    if n == 0 or not e.candidates_mask[0]:
        out.append("position 0 is not a candidate")
    for name, mask in (("candidates", e.candidates_mask), ("targets", e.targets_mask),
                       ("error location", e.error_location_mask)):
        for k in range(1, n):
            if mask[k] and not e.token_starts[k]:
                out.append(f"{name} marks non-initial subtoken {k}")
                break
            if mask[k] and not _identifier_like(e.subtokens[k]):
                out.append(f"{name} marks non-identifier subtoken {k} {e.subtokens[k]!r}")
                break
    if any(t and not c for t, c in zip(e.targets_mask, e.candidates_mask)):
        out.append("target outside candidates")
    if any(x and not c for x, c in zip(e.error_location_mask, e.candidates_mask)):
        out.append("error location outside candidates")
    errs = sum(e.error_location_mask)
    if e.error_location_mask and e.error_location_mask[0]:
        if errs != 1:
            out.append("bug-free example with extra error locations")
        if any(e.targets_mask):
            out.append("bug-free example with targets")
    elif not e.truncated:
        if errs != 1:
            out.append(f"buggy example with {errs} error locations")
        if not any(e.targets_mask):
            out.append("buggy example without targets")
    return out

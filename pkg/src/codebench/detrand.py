"""Order-independent, seed-reproducible pseudorandom decisions.

Every decision is a pure function of an experiment seed and the data it
concerns, computed by hashing with MD5. Nothing depends on the order in
which items are processed or on which worker processes them.
"""
from __future__ import annotations

import hashlib
import json
import random
from typing import Any, NamedTuple, Sequence, TypeVar

T = TypeVar("T")

_SCALE = float(1 << 64)


class EmptyChoices(ValueError):
    pass


class DecisionDigest(NamedTuple):
    value: bytes  # 16-byte MD5 digest

    def as_int(self) -> int:
        """Leading 64 bits, big-endian."""
        return int.from_bytes(self.value[:8], "big")

    def uniform(self) -> float:
        return self.as_int() / _SCALE

    def derive(self, *parts: Any) -> "DecisionDigest":
        return DecisionDigest(_md5(self.value, *(serialize(p) for p in parts)))

    def rng(self) -> random.Random:
        """A :class:`random.Random` seeded from this digest."""
        return random.Random(int.from_bytes(self.value, "big"))


def serialize(obj: Any) -> bytes:
    """Canonical byte form of a JSON-like value (tuples become lists)."""
    if isinstance(obj, bytes):
        return obj
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def _md5(*parts: bytes) -> bytes:
    h = hashlib.md5()
    for i, p in enumerate(parts):
        if i:
            h.update(b"\0")
        h.update(p)
    return h.digest()


def digest(seed: str, *parts: Any) -> DecisionDigest:
    """Digest of a seed and arbitrary serializable parts."""
    return DecisionDigest(_md5(seed.encode("utf-8"), *(serialize(p) for p in parts)))


def function_digest(seed: str, f) -> DecisionDigest:
    """Digest of ``(seed, f)`` for a function unit.

    The function is serialized as path, NUL, qualified name, NUL, source.
    """
    data = f.path.encode("utf-8") + b"\0" + f.qualname.encode("utf-8") + b"\0" + f.source.encode("utf-8")
    return DecisionDigest(_md5(seed.encode("utf-8"), data))


def choose(d: DecisionDigest, choices: Sequence[T], purpose: str = "") -> T:
    """Pick one of ``choices``; the result ignores the order they come in.

    Choices are sorted by their serialized form, hashed together with the
    digest, and the hash indexes the sorted list. ``purpose`` separates
    decisions that would otherwise share an identical choice set.
    """
    if not choices:
        raise EmptyChoices("no choices to pick from")
    keyed = sorted(((serialize(c), c) for c in choices), key=lambda kc: kc[0])
    h = hashlib.md5(d.value)
    if purpose:
        h.update(b"\0" + purpose.encode("utf-8"))
    for k, _ in keyed:
        h.update(b"\0")
        h.update(k)
    index = int.from_bytes(h.digest()[:8], "big") % len(keyed)
    return keyed[index][1]


def uniform(seed: str, item: Any) -> float:
    return digest(seed, item).uniform()


def keep_sample(seed: str, item: Any, rate: float) -> bool:
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must lie in [0, 1], got {rate}")
    return uniform(seed, item) < rate


def seeded_permutation(seed: str, n: int) -> list[int]:
    """Permutation ``P`` of ``range(n)``: index ``i`` sorted by hash(seed, i)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    base = seed.encode("utf-8")
    order = sorted(range(n), key=lambda i: (_md5(base, str(i).encode("ascii")), i))
    return order


def subsample(seed: str, items: Sequence[Any], n: int) -> list[int]:
    """Indices of exactly ``min(n, len(items))`` items, chosen by digest.

    Equivalent to sampling with :func:`keep_sample` at rate
    ``n / len(items)`` followed by an exact-count top-up: the items with the
    smallest uniforms are kept. Returned indices are ascending.
    """
    if n >= len(items):
        return list(range(len(items)))
    ranked = sorted(range(len(items)), key=lambda i: (uniform(seed, items[i]), i))
    return sorted(ranked[:n])

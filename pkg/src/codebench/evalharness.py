"""Scoring prediction files against gold datasets.

Predictions are joined to gold examples by provenance, so row order in
either file does not matter.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .taskgen.pointer import PointerExample
from .taskgen.tables import labels_for


class EvalError(ValueError):
    pass


class MissingPrediction(EvalError):
    pass


class UnknownLabel(EvalError):
    pass


class IndexOutOfRange(EvalError):
    pass


class DuplicateProvenance(EvalError):
    pass


def _index(rows: Iterable[Mapping], key: str, what: str) -> dict[str, Mapping]:
    out: dict[str, Mapping] = {}
    for r in rows:
        try:
            k = r[key]
        except KeyError:
            raise EvalError(f"{what} row without {key!r}: {json.dumps(r)[:80]}") from None
        if k in out:
            raise DuplicateProvenance(f"{what}: duplicate provenance {k!r}")
        out[k] = r
    return out


@dataclass
class ClassificationReport:
    total: int
    correct: int
    per_label: dict[str, dict[str, float]] = field(default_factory=dict)

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {"total": self.total, "correct": self.correct, "accuracy": self.accuracy,
                "per_label": self.per_label}

    def table(self) -> str:
        width = max([len("label")] + [len(k) for k in self.per_label])
        rows = [f"{'label':<{width}}  {'support':>7}  {'precision':>9}  {'recall':>6}"]
        for label, m in sorted(self.per_label.items()):
            rows.append(f"{label:<{width}}  {int(m['support']):>7}  {m['precision']:>9.4f}"
                        f"  {m['recall']:>6.4f}")
        rows.append(f"{'accuracy':<{width}}  {self.total:>7}  {self.accuracy:>9.4f}")
        return "\n".join(rows)


def score_classification(preds: Iterable[Mapping], gold: Iterable[Mapping],
                         task: str | None = None) -> ClassificationReport:
    """Accuracy and per-label precision/recall.

    Gold rows carry ``info`` (provenance) and ``label``; prediction rows
    carry ``provenance`` and ``label``. With ``task`` given, labels outside
    its label set are rejected.
    """
    gold_ix = _index(gold, "info", "gold")
    pred_ix = _index(preds, "provenance", "predictions")
    allowed = set(labels_for(task)) if task else None
    extra = set(pred_ix) - set(gold_ix)
    if extra:
        raise EvalError(f"predictions for unknown provenance, e.g. {sorted(extra)[0]!r}")
    tp: Counter[str] = Counter()
    predicted: Counter[str] = Counter()
    support: Counter[str] = Counter()
    correct = 0
    for prov, g in gold_ix.items():
        if prov not in pred_ix:
            raise MissingPrediction(f"no prediction for {prov!r}")
        want, got = g["label"], pred_ix[prov]["label"]
        if allowed is not None:
            for lab in (want, got):
                if lab not in allowed:
                    raise UnknownLabel(f"{prov!r}: label {lab!r} is not a {task} label")
        support[want] += 1
        predicted[got] += 1
        if want == got:
            tp[want] += 1
            correct += 1
    labels = set(support) | set(predicted) | (allowed or set())
    per_label = {}
    for lab in labels:
        per_label[lab] = {
            "support": support[lab],
            "precision": tp[lab] / predicted[lab] if predicted[lab] else 0.0,
            "recall": tp[lab] / support[lab] if support[lab] else 0.0,
        }
    return ClassificationReport(len(gold_ix), correct, per_label)


@dataclass
class PointerReport:
    bugfree: int = 0
    buggy: int = 0
    true_positive: int = 0
    classified: int = 0
    localized: int = 0
    repaired: int = 0

    @property
    def total(self) -> int:
        return self.bugfree + self.buggy

    def metrics(self) -> dict[str, float]:
        def ratio(a: int, b: int) -> float:
            return a / b if b else 0.0
        return {
            "true_positive": ratio(self.true_positive, self.bugfree),
            "classification_accuracy": ratio(self.classified, self.total),
            "localization_accuracy": ratio(self.localized, self.buggy),
            "localization_repair_accuracy": ratio(self.repaired, self.buggy),
        }

    def merge(self, other: "PointerReport") -> "PointerReport":
        return PointerReport(*(a + b for a, b in zip(self.__dict__.values(),
                                                    other.__dict__.values())))

    def to_dict(self) -> dict:
        return {"counts": dict(self.__dict__), **self.metrics()}

    def table(self) -> str:
        m = self.metrics()
        width = max(len(k) for k in m)
        return "\n".join(f"{k:<{width}}  {100 * v:8.2f}%" for k, v in m.items())


def _score_one(e: PointerExample, loc: int, repair: int, rep: PointerReport) -> None:
    n = len(e)
    for name, idx in (("loc", loc), ("repair", repair)):
        if not isinstance(idx, int) or isinstance(idx, bool) or not 0 <= idx < n:
            raise IndexOutOfRange(f"{e.provenance!r}: {name} index {idx!r} outside [0, {n})")
    said_bugfree = loc == 0
    if not e.buggy:
        rep.bugfree += 1
        if said_bugfree:
            rep.true_positive += 1
            rep.classified += 1
        return
    rep.buggy += 1
    if not said_bugfree:
        rep.classified += 1
    if e.truncated:
        return
    if e.error_location_mask[loc]:
        rep.localized += 1
        if e.targets_mask[repair]:
            rep.repaired += 1


def score_pointer(preds: Iterable[Mapping], gold: Sequence[PointerExample | Mapping]
                  ) -> PointerReport:
    """True-positive rate, classification, localization and loc+repair accuracy.

    Buggy examples flagged as truncated count as failures for localization
    and repair whatever the prediction.
    """
    examples = [g if isinstance(g, PointerExample) else PointerExample.from_dict(g) for g in gold]
    gold_ix = _index(({"provenance": e.provenance, "e": e} for e in examples), "provenance", "gold")
    pred_ix = _index(preds, "provenance", "predictions")
    extra = set(pred_ix) - set(gold_ix)
    if extra:
        raise EvalError(f"predictions for unknown provenance, e.g. {sorted(extra)[0]!r}")
    rep = PointerReport()
    for prov, row in gold_ix.items():
        if prov not in pred_ix:
            raise MissingPrediction(f"no prediction for {prov!r}")
        p = pred_ix[prov]
        try:
            loc, repair = p["loc"], p["repair"]
        except KeyError as exc:
            raise EvalError(f"{prov!r}: prediction lacks {exc.args[0]!r}") from None
        _score_one(row["e"], loc, repair, rep)
    return rep

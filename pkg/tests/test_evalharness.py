import json
import random
from fractions import Fraction
from pathlib import Path

import pytest

from codebench import evalharness as eh
from codebench.taskgen import read_jsonl
from codebench.taskgen.pointer import PointerExample

FIXTURES = Path(__file__).parent / "fixtures" / "eval"
EXPECTED = json.loads((FIXTURES / "expected.json").read_text())
CLASSIFICATION = ["misuse", "binop", "operand", "docstring", "exception"]


def load(task):
    return read_jsonl(str(FIXTURES / f"{task}_gold.jsonl")), read_jsonl(str(FIXTURES / f"{task}_pred.jsonl"))


def frac(s):
    return float(Fraction(s))


@pytest.mark.parametrize("task", CLASSIFICATION)
def test_classification_fixture(task):
    gold, preds = load(task)
    assert len(gold) == len(preds) == 10
    rep = eh.score_classification(preds, gold, task)
    want = EXPECTED[task]
    assert rep.accuracy == frac(want["accuracy"])
    for label, m in want["per_label"].items():
        got = rep.per_label[label]
        assert got["support"] == m["support"]
        assert got["precision"] == frac(m["precision"])
        assert got["recall"] == frac(m["recall"])


def test_exception_report_lists_all_labels():
    gold, preds = load("exception")
    rep = eh.score_classification(preds, gold, "exception")
    assert len(rep.per_label) == 20
    assert rep.per_label["SYSTEM_EXIT"] == {"support": 0, "precision": 0.0, "recall": 0.0}


def test_pointer_fixture():
    gold, preds = load("pointer")
    rep = eh.score_pointer(preds, gold)
    want = EXPECTED["pointer"]
    assert rep.to_dict()["counts"] == want["counts"]
    for k, v in rep.metrics().items():
        assert v == frac(want[k]), k


@pytest.mark.parametrize("task", CLASSIFICATION + ["pointer"])
def test_row_order_does_not_matter(task):
    gold, preds = load(task)
    score = eh.score_pointer if task == "pointer" else eh.score_classification
    base = score(preds, gold).to_dict()
    rng = random.Random(0)
    for _ in range(5):
        g, p = gold[:], preds[:]
        rng.shuffle(g)
        rng.shuffle(p)
        assert score(p, g).to_dict() == base


def test_three_of_four():
    gold = [{"info": str(i), "label": "Correct"} for i in range(4)]
    preds = [{"provenance": str(i), "label": "Correct" if i else "Variable misuse"}
             for i in range(4)]
    assert eh.score_classification(preds, gold, "misuse").accuracy == 0.75


def test_classification_errors():
    gold = [{"info": "a", "label": "Correct"}, {"info": "b", "label": "Correct"}]
    with pytest.raises(eh.MissingPrediction):
        eh.score_classification([{"provenance": "a", "label": "Correct"}], gold)
    with pytest.raises(eh.UnknownLabel):
        eh.score_classification([{"provenance": "a", "label": "Correct"},
                                 {"provenance": "b", "label": "Bogus"}], gold, "misuse")
    with pytest.raises(eh.DuplicateProvenance):
        eh.score_classification([{"provenance": "a", "label": "Correct"}] * 2, gold)
    with pytest.raises(eh.EvalError):
        eh.score_classification([{"provenance": "a", "label": "Correct"},
                                 {"provenance": "b", "label": "Correct"},
                                 {"provenance": "c", "label": "Correct"}], gold)


def pointer_gold():
    return [PointerExample.from_dict(r) for r in load("pointer")[0]]


def test_perfect_pointer_predictions():
    gold = [e for e in pointer_gold() if not e.truncated]
    preds = []
    for e in gold:
        loc = e.error_location_mask.index(True)
        repair = e.targets_mask.index(True) if any(e.targets_mask) else 0
        preds.append({"provenance": e.provenance, "loc": loc, "repair": repair})
    assert all(v == 1.0 for v in eh.score_pointer(preds, gold).metrics().values())


def test_truncated_example_always_fails():
    e = next(e for e in pointer_gold() if e.truncated)
    for loc in range(len(e)):
        for repair in range(len(e)):
            rep = eh.score_pointer([{"provenance": e.provenance, "loc": loc, "repair": repair}], [e])
            assert rep.localized == rep.repaired == 0


def test_pointer_index_range():
    e = pointer_gold()[0]
    for bad in (-1, len(e), 1.5, True):
        with pytest.raises(eh.IndexOutOfRange):
            eh.score_pointer([{"provenance": e.provenance, "loc": bad, "repair": 0}], [e])


def test_metric_ordering_and_merge():
    gold, preds = load("pointer")
    rep = eh.score_pointer(preds, gold)
    m = rep.metrics()
    assert m["localization_repair_accuracy"] <= m["localization_accuracy"] <= 1
    half = eh.score_pointer(preds[:5], gold[:5]).merge(eh.score_pointer(preds[5:], gold[5:]))
    assert half == rep
    assert "localization_accuracy" in rep.table()

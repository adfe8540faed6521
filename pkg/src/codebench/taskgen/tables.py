"""Fixed tables: binary-operator rows, exception labels, task label strings."""
from __future__ import annotations

from typing import NamedTuple

from ..pytok import split_identifier


class OperatorRow(NamedTuple):
    name: str
    commutative: tuple[str, ...]
    non_commutative: tuple[str, ...]

    @property
    def ops(self) -> tuple[str, ...]:
        return self.commutative + self.non_commutative


OPERATOR_TABLE = (
    OperatorRow("Arithmetic", ("+", "*"), ("-", "/", "%")),
    OperatorRow("Comparison", ("==", "!=", "is", "is not"), ("<", "<=", ">", ">=")),
    OperatorRow("Membership", (), ("in", "not in")),
    OperatorRow("Boolean", ("and", "or"), ()),
)

ROW_OF = {op: row for row in OPERATOR_TABLE for op in row.ops}
NON_COMMUTATIVE = frozenset(op for row in OPERATOR_TABLE for op in row.non_commutative)

EXCEPTION_LABELS = (
    "ASSERTION_ERROR", "ATTRIBUTE_ERROR", "DOES_NOT_EXIST", "HTTP_ERROR",
    "IMPORT_ERROR", "INDEX_ERROR", "IO_ERROR", "KEY_ERROR", "KEYBOARD_INTERRUPT",
    "NAME_ERROR", "NOT_IMPLEMENTED_ERROR", "OBJECT_DOES_NOT_EXIST", "OS_ERROR",
    "RUNTIME_ERROR", "STOP_ITERATION", "SYSTEM_EXIT", "TYPE_ERROR",
    "UNICODE_DECODE_ERROR", "VALIDATION_ERROR", "VALUE_ERROR",
)
_LABEL_SET = frozenset(EXCEPTION_LABELS)

HOLE = "__HOLE__"

CORRECT = "Correct"
TASKS = ("misuse", "binop", "operand", "docstring", "exception", "pointer")
CLASSIFICATION_TASKS = TASKS[:5]
BUG_LABELS = {
    "misuse": "Variable misuse",
    "binop": "Wrong binary operator",
    "operand": "Swapped operands",
    "docstring": "Incorrect docstring",
}


def labels_for(task: str) -> tuple[str, ...]:
    if task == "exception":
        return EXCEPTION_LABELS
    if task in BUG_LABELS:
        return (CORRECT, BUG_LABELS[task])
    raise ValueError(f"task {task!r} has no label set")


def exception_label(name: str) -> str | None:
    """Label for a caught exception name, or ``None`` if it is not tabled.

    The final dotted component is split at case boundaries and joined with
    underscores: ``django.core.exceptions.ValidationError`` maps to
    ``VALIDATION_ERROR``.
    """
    final = name.rsplit(".", 1)[-1]
    parts = [p.upper() for p in split_identifier(final) if p.strip("_")]
    label = "_".join(parts)
    return label if label in _LABEL_SET else None

"""Per-function example generators for the classification tasks.

Mutations are applied by splicing the function source at the character
spans reported by :mod:`codebench.pysyntax`, so buggy and bug-free code
differ only at the mutation site. Every mutant is re-parsed before it is
emitted.
"""
from __future__ import annotations

import ast
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .. import detrand, pysyntax
from ..pysyntax import BinaryOp, FunctionFeatures, FunctionUnit, Span
from . import tables
from .tables import BUG_LABELS, CORRECT, HOLE

log = logging.getLogger(__name__)

MIN_DEFINED = 2
MAX_DEFINED = 50


def function_key(f: FunctionUnit) -> str:
    return f"{f.path}#{f.qualname}@{f.line}"


@dataclass(frozen=True)
class ClassificationExample:
    task: str
    code: str
    label: str
    info: str
    docstring: str | None = None

    @property
    def buggy(self) -> bool:
        return self.label != CORRECT

    def to_dict(self) -> dict:
        d = {"function": self.code, "label": self.label, "info": self.info}
        if self.docstring is not None:
            d["docstring"] = self.docstring
        return d


@dataclass(frozen=True)
class MisuseBug:
    original: str       # the correct variable
    replacement: str    # the variable put in its place
    span: Span          # the use, in the bug-free source


@dataclass(frozen=True)
class ExamplePair:
    buggy: ClassificationExample
    bugfree: ClassificationExample
    unit: FunctionUnit = field(compare=False)
    bug: MisuseBug | None = None

    def __iter__(self):
        yield self.bugfree
        yield self.buggy


def _splice(source: str, span: Span, text: str) -> str:
    return source[:span.start] + text + source[span.end:]


def _pair(task: str, f: FunctionUnit, buggy_code: str, bug: MisuseBug | None = None
          ) -> ExamplePair | None:
    if not pysyntax.parses(buggy_code):
        log.warning("%s: %s mutant does not parse; function skipped", function_key(f), task)
        return None
    key = function_key(f)
    return ExamplePair(
        buggy=ClassificationExample(task, buggy_code, BUG_LABELS[task], key + "/buggy"),
        bugfree=ClassificationExample(task, f.source, CORRECT, key + "/original"),
        unit=f, bug=bug)


# --------------------------------------------------------------------------
# variable misuse

def misuse_uses(feats: FunctionFeatures) -> list[tuple[str, int]]:
    """Uses that may host a bug: loads of variables defined in the function."""
    return [u for u in feats.var_uses if u[0] in feats.defined_vars]


def misuse_eligible(feats: FunctionFeatures) -> bool:
    n = len(feats.defined_vars)
    return MIN_DEFINED <= n <= MAX_DEFINED and bool(misuse_uses(feats))


def gen_variable_misuse(f: FunctionUnit, feats: FunctionFeatures, seed: str
                        ) -> ExamplePair | None:
    if not misuse_eligible(feats):
        return None
    d = detrand.function_digest(seed, f)
    name, tok = detrand.choose(d, [list(u) for u in misuse_uses(feats)], "misuse-use")
    replacement = detrand.choose(d, sorted(feats.defined_vars - {name}), "misuse-variable")
    span = feats.use_spans[tok]
    bug = MisuseBug(name, replacement, span)
    return _pair("misuse", f, _splice(f.source, span, replacement), bug)


# --------------------------------------------------------------------------
# wrong binary operator

def _pad(source: str, span: Span, op: str) -> str:
    """``op`` with spaces added where it would fuse with its neighbours."""
    before = source[span.start - 1] if span.start > 0 else " "
    after = source[span.end] if span.end < len(source) else " "
    text = op
    if op[0].isalpha() and not before.isspace():
        text = " " + text
    if op[-1].isalpha() and not after.isspace():
        text = text + " "
    return text


def binop_candidates(feats: FunctionFeatures) -> list[BinaryOp]:
    return [b for b in feats.binary_ops if b.op in tables.ROW_OF]


def gen_wrong_binop(f: FunctionUnit, feats: FunctionFeatures, seed: str) -> ExamplePair | None:
    cands = binop_candidates(feats)
    if not cands:
        return None
    d = detrand.function_digest(seed, f)
    by_key = {(b.op, b.token): b for b in cands}
    op, tok = detrand.choose(d, [list(k) for k in by_key], "binop-site")
    site = by_key[(op, tok)]
    others = [o for o in tables.ROW_OF[op].ops if o != op]
    new_op = detrand.choose(d, others, "binop-operator")
    code = _splice(f.source, site.op_span, _pad(f.source, site.op_span, new_op))
    return _pair("binop", f, code)


# --------------------------------------------------------------------------
# swapped operands

def operand_candidates(feats: FunctionFeatures) -> list[BinaryOp]:
    return [b for b in feats.binary_ops
            if b.op in tables.NON_COMMUTATIVE and b.single_line and not b.same_operands]


def _swap_text(source: str, site: BinaryOp, wrap: bool) -> str:
    ls, rs = site.left_span, site.right_span
    left, right = source[ls.start:ls.end], source[rs.start:rs.end]
    if wrap:
        left, right = f"({left})", f"({right})"
    return source[:ls.start] + right + source[ls.end:rs.start] + left + source[rs.end:]


def _operand_nodes(tree: ast.AST) -> list[tuple[ast.AST, str, int]]:
    """(node, operator symbol, operand index) for each table operator."""
    out = []
    for node in ast.walk(tree):
        if isinstance(node, ast.BinOp) and type(node.op) in pysyntax.BINOP_SYMBOLS:
            out.append((node, pysyntax.BINOP_SYMBOLS[type(node.op)], 0))
        elif isinstance(node, ast.Compare):
            for k, op in enumerate(node.ops):
                out.append((node, pysyntax.CMPOP_SYMBOLS[type(op)], k))
    return out


def _expected_swap(source: str, site: BinaryOp) -> str:
    """Dump of the original tree with the chosen operands exchanged."""
    tree = ast.parse(source)
    lines = source.split("\n")
    starts = [0]
    for ln in lines[:-1]:
        starts.append(starts[-1] + len(ln) + 1)

    def off(line: int, col: int) -> int:
        return starts[line - 1] + pysyntax._byte_col_to_char(lines[line - 1], col)

    for node, sym, k in _operand_nodes(tree):
        if sym != site.op:
            continue
        if isinstance(node, ast.BinOp):
            left, right = node.left, node.right
        else:
            operands = [node.left] + list(node.comparators)
            left, right = operands[k], operands[k + 1]
        ls = off(left.lineno, left.col_offset)
        re_ = off(right.end_lineno, right.end_col_offset)
        if site.left_span.start <= ls and re_ <= site.right_span.end and \
                ls < site.op_span.start < re_:
            if isinstance(node, ast.BinOp):
                node.left, node.right = node.right, node.left
            else:
                operands[k], operands[k + 1] = operands[k + 1], operands[k]
                node.left, node.comparators = operands[0], operands[1:]
            return ast.dump(tree)
    raise pysyntax.ParseError(f"operator {site.op!r} not found in tree")


def gen_swapped_operand(f: FunctionUnit, feats: FunctionFeatures, seed: str
                        ) -> ExamplePair | None:
    cands = operand_candidates(feats)
    if not cands:
        return None
    d = detrand.function_digest(seed, f)
    by_key = {(b.op, b.token): b for b in cands}
    op, tok = detrand.choose(d, [list(k) for k in by_key], "operand-site")
    site = by_key[(op, tok)]
    expected = _expected_swap(f.source, site)
    for wrap in (False, True):
        code = _swap_text(f.source, site, wrap)
        try:
            if ast.dump(ast.parse(code)) == expected:
                return _pair("operand", f, code)
        except SyntaxError:
            continue
    log.warning("%s: operand swap changes structure; function skipped", function_key(f))
    return None


# --------------------------------------------------------------------------
# exception type

def exception_candidates(feats: FunctionFeatures) -> list[tuple[pysyntax.ExceptSlot, str]]:
    out = []
    for slot in feats.except_slots:
        label = tables.exception_label(slot.name)
        if label is not None:
            out.append((slot, label))
    return out


def gen_exception_type(f: FunctionUnit, feats: FunctionFeatures, seed: str
                       ) -> ClassificationExample | None:
    cands = exception_candidates(feats)
    if not cands:
        return None
    d = detrand.function_digest(seed, f)
    by_tok = {slot.token: (slot, label) for slot, label in cands}
    tok = detrand.choose(d, sorted(by_tok), "exception-slot")
    slot, label = by_tok[tok]
    code = _splice(f.source, slot.span, HOLE)
    if not pysyntax.parses(code):
        log.warning("%s: holed code does not parse; function skipped", function_key(f))
        return None
    return ClassificationExample("exception", code, label, function_key(f) + "/hole")


# --------------------------------------------------------------------------
# function-docstring mismatch

@dataclass(frozen=True)
class DocstringItem:
    unit: FunctionUnit
    body: str
    summary: str


def docstring_item(f: FunctionUnit, feats: FunctionFeatures) -> DocstringItem | None:
    summary = pysyntax.docstring_summary(feats.docstring)
    body = feats.body_without_docstring
    if summary is None or body is None or not pysyntax.parses(body):
        return None
    return DocstringItem(f, body, summary)


def gen_function_docstring(items: Iterable[DocstringItem], seed: str, split: str = ""
                           ) -> list[ExamplePair]:
    """Pairs for one split; ``items`` may come in any order.

    Function ``i`` (in provenance order) gets the summary of function
    ``P[i]`` for its negative, ``P`` a seeded permutation of the split.
    Functions with ``P[i] == i`` are dropped entirely to keep balance.
    """
    ordered = sorted(items, key=lambda it: it.unit.sort_key)
    perm = detrand.seeded_permutation(f"{seed}\0docstring\0{split}", len(ordered))
    pairs = []
    for i, it in enumerate(ordered):
        if perm[i] == i:
            log.info("%s: permutation fixed point; dropped", function_key(it.unit))
            continue
        key = function_key(it.unit)
        other = ordered[perm[i]].summary
        pairs.append(ExamplePair(
            buggy=ClassificationExample("docstring", it.body, BUG_LABELS["docstring"],
                                        key + "/buggy", other),
            bugfree=ClassificationExample("docstring", it.body, CORRECT,
                                          key + "/original", it.summary),
            unit=it.unit))
    return pairs


def fixed_points(n: int, seed: str, split: str = "") -> int:
    perm = detrand.seeded_permutation(f"{seed}\0docstring\0{split}", n)
    return sum(1 for i, p in enumerate(perm) if i == p)


def flatten(pairs: Sequence[ExamplePair]) -> list[ClassificationExample]:
    return [e for p in pairs for e in p]

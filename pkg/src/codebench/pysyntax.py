"""Function extraction and per-function syntactic features.

Functions are found in the module AST: every function definition with no
other function definition between itself and the module root, i.e.
module-level functions and methods of (nested) classes, but not functions
or classes defined inside function bodies.

Features are reported against the function's program-token sequence so
that mutations and masks can be expressed as token positions.
"""
from __future__ import annotations

import ast
import bisect
import inspect
import json
import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, NamedTuple

from . import pytok
from .pytok import Kind, ProgramToken

log = logging.getLogger(__name__)

_FUNCS = (ast.FunctionDef, ast.AsyncFunctionDef)
_SCOPES = (ast.FunctionDef, ast.AsyncFunctionDef, ast.Lambda, ast.ClassDef,
           ast.ListComp, ast.SetComp, ast.DictComp, ast.GeneratorExp)

BINOP_SYMBOLS = {ast.Add: "+", ast.Mult: "*", ast.Sub: "-", ast.Div: "/", ast.Mod: "%"}
CMPOP_SYMBOLS = {ast.Eq: "==", ast.NotEq: "!=", ast.Is: "is", ast.IsNot: "is not",
                 ast.Lt: "<", ast.LtE: "<=", ast.Gt: ">", ast.GtE: ">=",
                 ast.In: "in", ast.NotIn: "not in"}
BOOLOP_SYMBOLS = {ast.And: "and", ast.Or: "or"}

_LAYOUT = (Kind.NEWLINE_INNER, Kind.COMMENT_PIECE)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0) -> None:
        super().__init__(f"{msg} (line {line}, column {col})")
        self.line = line
        self.col = col


def parse(source: str, filename: str = "<unknown>") -> ast.Module:
    try:
        return ast.parse(source, filename=filename)
    except (SyntaxError, ValueError) as exc:
        raise ParseError(getattr(exc, "msg", str(exc)), getattr(exc, "lineno", 0) or 0,
                         getattr(exc, "offset", 0) or 0) from None


def parses(source: str) -> bool:
    try:
        ast.parse(source)
    except (SyntaxError, ValueError):
        return False
    return True


@dataclass
class FunctionUnit:
    source: str
    path: str
    qualname: str
    line: int

    @cached_property
    def tokens(self) -> list[ProgramToken]:
        return pytok.tokenize(self.source)

    @property
    def provenance(self) -> str:
        return f"{self.path}:{self.line}:{self.qualname}"

    @property
    def sort_key(self) -> tuple[str, int, str]:
        return (self.path, self.line, self.qualname)


class Span(NamedTuple):
    start: int
    end: int


class BinaryOp(NamedTuple):
    op: str
    token: int                 # first token of the operator
    left: tuple[int, int]      # token range [start, end) incl. grouping parens
    right: tuple[int, int]
    single_line: bool
    op_span: Span              # character spans into the function source
    left_span: Span
    right_span: Span
    same_operands: bool        # operands are structurally identical


class ExceptSlot(NamedTuple):
    token: int
    name: str                  # as written, e.g. "models.DoesNotExist"
    span: Span

    @property
    def final_name(self) -> str:
        return self.name.rsplit(".", 1)[-1]


@dataclass
class FunctionFeatures:
    defined_vars: frozenset[str]
    var_uses: list[tuple[str, int]]
    binary_ops: list[BinaryOp]
    except_slots: list[ExceptSlot]
    docstring: str | None
    body_without_docstring: str | None
    occurrences: list[tuple[str, int]] = field(default_factory=list)
    use_spans: dict[int, Span] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({
            "defined_vars": sorted(self.defined_vars),
            "var_uses": self.var_uses,
            "binary_ops": [[b.op, b.token, list(b.left), list(b.right), b.single_line]
                           for b in self.binary_ops],
            "except_slots": [[s.token, s.name] for s in self.except_slots],
            "docstring": self.docstring,
        }, ensure_ascii=False)


# --------------------------------------------------------------------------
# splitting

def _top_level_functions(tree: ast.Module) -> Iterator[tuple[ast.AST, str]]:
    def walk(node: ast.AST, prefix: str) -> Iterator[tuple[ast.AST, str]]:
        for child in ast.iter_child_nodes(node):
            if isinstance(child, _FUNCS):
                yield child, prefix + child.name
            elif isinstance(child, ast.ClassDef):
                yield from walk(child, prefix + child.name + ".")
            elif isinstance(child, (ast.Lambda,)):
                continue
            else:
                yield from walk(child, prefix)
    yield from walk(tree, "")


def _byte_col_to_char(line: str, col: int) -> int:
    if line.isascii():
        return col
    return len(line.encode("utf-8")[:col].decode("utf-8", errors="ignore"))


def _extract(lines: list[str], node: ast.AST) -> str:
    first = min([node.lineno] + [d.lineno for d in node.decorator_list])
    head = lines[first - 1]
    indent = head[:len(head) - len(head.lstrip(" \t\f"))]
    end_line = node.end_lineno
    end_col = _byte_col_to_char(lines[end_line - 1], node.end_col_offset)
    out = []
    for ln in range(first, end_line + 1):
        text = lines[ln - 1]
        if ln == end_line:
            text = text[:end_col]
        if text.startswith(indent):
            text = text[len(indent):]
        elif not text.strip():
            text = text.lstrip(" \t\f")
        out.append(text)
    body = "\n".join(out)
    return body.rstrip("\n") + "\n"


def split_functions(module_source: str, path: str = "<unknown>") -> list[FunctionUnit]:
    tree = parse(module_source, path)
    lines = module_source.split("\n")
    units = []
    for node, qualname in _top_level_functions(tree):
        src = _extract(lines, node)
        if not parses(src):
            log.warning("%s:%d: %s does not parse after extraction; skipped", path,
                        node.lineno, qualname)
            continue
        units.append(FunctionUnit(src, path, qualname, node.lineno))
    return units


# --------------------------------------------------------------------------
# analysis

class _Locator:
    """Maps AST (line, byte column) positions onto characters and tokens."""

    def __init__(self, source: str, tokens: list[ProgramToken]) -> None:
        self.source = source
        self.lines = source.split("\n")
        self.starts = [0]
        for ln in self.lines[:-1]:
            self.starts.append(self.starts[-1] + len(ln) + 1)
        self.tokens = tokens
        self.by_start: dict[int, int] = {}
        for i, t in enumerate(tokens):
            if t.span[1] > t.span[0]:  # skip zero-width layout tokens
                self.by_start.setdefault(t.span[0], i)
        self.token_starts = [t.span[0] for t in tokens]

    def offset(self, line: int, col: int) -> int:
        return self.starts[line - 1] + _byte_col_to_char(self.lines[line - 1], col)

    def span(self, node: ast.AST) -> Span:
        return Span(self.offset(node.lineno, node.col_offset),
                    self.offset(node.end_lineno, node.end_col_offset))

    def line_of(self, offset: int) -> int:
        return bisect.bisect_right(self.starts, offset)

    def token_at(self, offset: int) -> int:
        try:
            return self.by_start[offset]
        except KeyError:
            raise ParseError(f"no token starts at offset {offset}") from None

    def token_range(self, span: Span) -> tuple[int, int]:
        a = self.token_at(span.start)
        b = bisect.bisect_left(self.token_starts, span.end)
        return a, b

    def prev_code(self, i: int) -> int:
        i -= 1
        while i >= 0 and self.tokens[i].kind in _LAYOUT:
            i -= 1
        return i

    def next_code(self, i: int) -> int:
        while i < len(self.tokens) and self.tokens[i].kind in _LAYOUT:
            i += 1
        return i


def _target_names(node: ast.AST, unpack: bool = True) -> Iterator[ast.Name]:
    if isinstance(node, ast.Name):
        yield node
    elif isinstance(node, ast.Starred):
        yield from _target_names(node.value, unpack)
    elif isinstance(node, (ast.Tuple, ast.List)) and unpack:
        for elt in node.elts:
            yield from _target_names(elt, unpack)


def _arg_nodes(args: ast.arguments) -> list[ast.arg]:
    out = list(args.posonlyargs) + list(args.args)
    if args.vararg:
        out.append(args.vararg)
    out.extend(args.kwonlyargs)
    if args.kwarg:
        out.append(args.kwarg)
    return out


def _own_scope_nodes(body: list[ast.AST]) -> Iterator[ast.AST]:
    """All nodes of a scope body, not descending into nested scopes."""
    stack = list(reversed(body))
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, _SCOPES):
            continue
        stack.extend(reversed(list(ast.iter_child_nodes(node))))


def _bound_names(body: list[ast.AST], unpack: bool = True) -> tuple[set[str], set[str]]:
    """Names assigned in a scope body, and names declared global/nonlocal."""
    bound: set[str] = set()
    declared: set[str] = set()
    for node in _own_scope_nodes(body):
        if isinstance(node, ast.Assign):
            for t in node.targets:
                bound.update(n.id for n in _target_names(t, unpack))
        elif isinstance(node, (ast.AugAssign, ast.AnnAssign)):
            bound.update(n.id for n in _target_names(node.target, unpack))
        elif isinstance(node, ast.NamedExpr):
            bound.add(node.target.id)
        elif isinstance(node, (ast.For, ast.AsyncFor)):
            bound.update(n.id for n in _target_names(node.target, unpack))
        elif isinstance(node, (ast.With, ast.AsyncWith)):
            for item in node.items:
                if item.optional_vars is not None:
                    bound.update(n.id for n in _target_names(item.optional_vars, unpack))
        elif isinstance(node, (ast.Global, ast.Nonlocal)):
            declared.update(node.names)
    return bound, declared


def _scope_locals(node: ast.AST) -> set[str]:
    """Names local to a nested scope (they shadow the outer function)."""
    if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
        bound, declared = _bound_names(node.body)
        names = {a.arg for a in _arg_nodes(node.args)} | bound
        for sub in _own_scope_nodes(node.body):
            if isinstance(sub, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
                names.add(sub.name)
            elif isinstance(sub, (ast.Import, ast.ImportFrom)):
                names.update((a.asname or a.name).split(".")[0] for a in sub.names)
            elif isinstance(sub, ast.ExceptHandler) and sub.name:
                names.add(sub.name)
        return names - declared
    if isinstance(node, ast.Lambda):
        return {a.arg for a in _arg_nodes(node.args)}
    if isinstance(node, ast.ClassDef):
        bound, declared = _bound_names(node.body)
        return bound - declared
    if isinstance(node, (ast.ListComp, ast.SetComp, ast.DictComp, ast.GeneratorExp)):
        names: set[str] = set()
        for gen in node.generators:
            names.update(n.id for n in _target_names(gen.target))
        return names
    return set()


class _Occurrence(NamedTuple):
    name: str
    node: ast.AST
    role: str  # "param", "store", "load", "aug"


def _collect_occurrences(fn: ast.AST) -> list[_Occurrence]:
    out: list[_Occurrence] = []
    for a in _arg_nodes(fn.args):
        out.append(_Occurrence(a.arg, a, "param"))

    def visit(node: ast.AST, shadowed: frozenset[str]) -> None:
        if isinstance(node, ast.Name):
            if node.id not in shadowed:
                role = {ast.Load: "load", ast.Store: "store"}.get(type(node.ctx))
                if role:
                    out.append(_Occurrence(node.id, node, role))
            return
        if isinstance(node, ast.JoinedStr):
            return  # f-string interiors lex as string pieces
        if isinstance(node, ast.AugAssign) and isinstance(node.target, ast.Name):
            if node.target.id not in shadowed:
                out.append(_Occurrence(node.target.id, node.target, "aug"))
            visit(node.value, shadowed)
            return
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.Lambda)):
            outer_parts = list(node.args.defaults) + [d for d in node.args.kw_defaults if d]
            if not isinstance(node, ast.Lambda):
                outer_parts += node.decorator_list
                outer_parts += [a.annotation for a in _arg_nodes(node.args) if a.annotation]
                if node.returns:
                    outer_parts.append(node.returns)
            for p in outer_parts:
                visit(p, shadowed)
            inner = shadowed | _scope_locals(node)
            body = node.body if isinstance(node.body, list) else [node.body]
            for stmt in body:
                visit(stmt, inner)
            return
        if isinstance(node, ast.ClassDef):
            for p in node.decorator_list + node.bases + [k.value for k in node.keywords]:
                visit(p, shadowed)
            inner = shadowed | _scope_locals(node)
            for stmt in node.body:
                visit(stmt, inner)
            return
        if isinstance(node, (ast.ListComp, ast.SetComp, ast.DictComp, ast.GeneratorExp)):
            inner = shadowed | _scope_locals(node)
            for k, gen in enumerate(node.generators):
                visit(gen.iter, shadowed if k == 0 else inner)
                for cond in gen.ifs:
                    visit(cond, inner)
            if isinstance(node, ast.DictComp):
                visit(node.key, inner)
                visit(node.value, inner)
            else:
                visit(node.elt, inner)
            return
        for child in ast.iter_child_nodes(node):
            visit(child, shadowed)

    for stmt in fn.body:
        visit(stmt, frozenset())
    return out


def _ext_operand(loc: _Locator, node: ast.AST, outer: Span) -> tuple[tuple[int, int], Span]:
    """Token range and span of an operand, widened over grouping parentheses."""
    span = loc.span(node)
    a, b = loc.token_range(span)
    toks = loc.tokens
    while True:
        p = loc.prev_code(a)
        q = loc.next_code(b)
        if (p >= 0 and q < len(toks) and toks[p].text == "(" and toks[q].text == ")"
                and toks[p].kind is Kind.PUNCTUATION and toks[q].kind is Kind.PUNCTUATION
                and toks[p].span[0] >= outer.start and toks[q].span[1] <= outer.end):
            a, b = p, q + 1
        else:
            break
    return (a, b), Span(toks[a].span[0], toks[b - 1].span[1])


def _walk_code(node: ast.AST) -> Iterator[ast.AST]:
    """Like ``ast.walk`` but skipping f-string interiors."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        if not isinstance(n, ast.JoinedStr):
            stack.extend(ast.iter_child_nodes(n))


def _binary_ops(loc: _Locator, fn: ast.AST) -> list[BinaryOp]:
    out: list[BinaryOp] = []

    def add(symbol: str, parent: ast.AST, left: ast.AST, right: ast.AST) -> None:
        outer = loc.span(parent)
        lr, ls = _ext_operand(loc, left, outer)
        rr, rs = _ext_operand(loc, right, outer)
        op_toks = [i for i in range(lr[1], rr[0]) if loc.tokens[i].kind not in _LAYOUT]
        if not op_toks:
            raise ParseError(f"operator {symbol!r} not found")
        first, last = op_toks[0], op_toks[-1]
        text = " ".join(loc.tokens[i].text for i in op_toks)
        if text != symbol:
            raise ParseError(f"expected operator {symbol!r}, found {text!r}")
        op_span = Span(loc.tokens[first].span[0], loc.tokens[last].span[1])
        single = loc.line_of(ls.start) == loc.line_of(rs.end - 1)
        same = ast.dump(left) == ast.dump(right)
        out.append(BinaryOp(symbol, first, lr, rr, single, op_span, ls, rs, same))

    for node in _walk_code(fn):
        if isinstance(node, ast.BinOp) and type(node.op) in BINOP_SYMBOLS:
            add(BINOP_SYMBOLS[type(node.op)], node, node.left, node.right)
        elif isinstance(node, ast.Compare):
            operands = [node.left] + list(node.comparators)
            for k, op in enumerate(node.ops):
                if type(op) in CMPOP_SYMBOLS:
                    add(CMPOP_SYMBOLS[type(op)], node, operands[k], operands[k + 1])
        elif isinstance(node, ast.BoolOp):
            sym = BOOLOP_SYMBOLS[type(node.op)]
            for k in range(1, len(node.values)):
                add(sym, node, node.values[k - 1], node.values[k])
    out.sort(key=lambda b: b.token)
    return out


def _dotted(node: ast.AST) -> str | None:
    if isinstance(node, ast.Name):
        return node.id
    if isinstance(node, ast.Attribute):
        base = _dotted(node.value)
        return None if base is None else f"{base}.{node.attr}"
    return None


def _except_slots(loc: _Locator, fn: ast.AST) -> list[ExceptSlot]:
    out = []
    for node in ast.walk(fn):
        if not isinstance(node, ast.ExceptHandler) or node.type is None:
            continue
        elts = node.type.elts if isinstance(node.type, ast.Tuple) else [node.type]
        for e in elts:
            name = _dotted(e)
            if name is None:
                continue
            span = loc.span(e)
            out.append(ExceptSlot(loc.token_at(span.start), name, span))
    out.sort(key=lambda s: s.token)
    return out


def docstring_summary(doc: str | None) -> str | None:
    """First non-empty line of a cleaned docstring, or ``None``."""
    if not doc:
        return None
    for line in inspect.cleandoc(doc).splitlines():
        if line.strip():
            return line.strip()
    return None


def _strip_docstring(loc: _Locator, fn: ast.AST) -> str:
    stmt = fn.body[0]
    span = loc.span(stmt)
    src = loc.source
    if len(fn.body) == 1:
        return src[:span.start] + "pass" + src[span.end:]
    line_start = src.rfind("\n", 0, span.start) + 1
    line_end = src.find("\n", span.end)
    line_end = len(src) if line_end < 0 else line_end
    before = src[line_start:span.start]
    after = src[span.end:line_end]
    if not before.strip() and (not after.strip() or after.strip().startswith("#")):
        return src[:line_start] + src[line_end + 1:]
    m = re.match(r"\s*;\s*", after)
    if m:
        return src[:span.start] + src[span.end + m.end():]
    return src[:span.start] + "pass" + src[span.end:]


def analyze(f: FunctionUnit, unpack_targets: bool = True) -> FunctionFeatures:
    """Features of one function.

    ``unpack_targets`` controls whether names inside tuple/list assignment
    targets count as definitions.
    """
    tree = parse(f.source, f.path)
    fns = [n for n in tree.body if isinstance(n, _FUNCS)]
    if len(fns) != 1:
        raise ParseError("source is not a single function definition")
    fn = fns[0]
    loc = _Locator(f.source, f.tokens)

    bound, declared = _bound_names(fn.body, unpack_targets)
    params = {a.arg for a in _arg_nodes(fn.args)}
    defined = frozenset((params | bound) - declared)

    uses: list[tuple[str, int]] = []
    use_spans: dict[int, Span] = {}
    occ: dict[int, str] = {}
    for o in _collect_occurrences(fn):
        if o.role == "param":
            start = loc.offset(o.node.lineno, o.node.col_offset)
            span = Span(start, start + len(o.name))
        else:
            span = loc.span(o.node)
        tok = loc.token_at(span.start)
        if o.role in ("load", "aug"):
            uses.append((o.name, tok))
            use_spans[tok] = span
        if o.name in defined:
            occ.setdefault(tok, o.name)
    uses.sort(key=lambda u: u[1])

    doc = ast.get_docstring(fn, clean=False)
    body = _strip_docstring(loc, fn) if doc is not None else None

    return FunctionFeatures(
        defined_vars=defined,
        var_uses=uses,
        binary_ops=_binary_ops(loc, fn),
        except_slots=_except_slots(loc, fn),
        docstring=doc,
        body_without_docstring=body,
        occurrences=sorted(((n, t) for t, n in occ.items()), key=lambda x: x[1]),
        use_spans=use_spans,
    )

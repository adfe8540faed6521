"""Program-vocabulary tokenizer for Python source.

Source is lexed with the standard :mod:`tokenize` module; the resulting
lexemes are then refined into short pieces:

* keywords are kept whole,
* identifiers are split at underscores, case changes and letter/digit
  changes (``HTTPServer`` -> ``HTTP``, ``Server``),
* string literals and comments are split on whitespace and on every
  non-alphanumeric character,
* layout (indentation, the different kinds of newline) becomes special
  tokens with fixed spellings,
* every piece longer than :data:`MAX_PIECE` characters is chunked.

:func:`detokenize` turns a token sequence back into parseable source whose
token sequence is identical; formatting is canonicalized.
"""
from __future__ import annotations

import enum
import functools
import io
import json
import keyword
import re
import tokenize as _tokenize
from typing import Iterable, Iterator, NamedTuple, Sequence

MAX_PIECE = 15

INDENT_TEXT = "___INDENT___"
DEDENT_TEXT = "___DEDENT___"
NL_TEXT = "___NL___"
NLCONT_TEXT = "___NLCONT___"
NLSTR_TEXT = "___NLSTR___"
ERROR_TEXT = "___ERROR___"

SPECIAL_TEXTS = (INDENT_TEXT, DEDENT_TEXT, NL_TEXT, NLCONT_TEXT, NLSTR_TEXT, ERROR_TEXT)

SOFT_KEYWORDS = frozenset({"match", "case"})


class Kind(str, enum.Enum):
    KEYWORD = "KEYWORD"
    IDENTIFIER_PIECE = "IDENTIFIER_PIECE"
    PUNCTUATION = "PUNCTUATION"
    NUMBER = "NUMBER"
    STRING_PIECE = "STRING_PIECE"
    COMMENT_PIECE = "COMMENT_PIECE"
    NEWLINE_LOGICAL = "NEWLINE_LOGICAL"
    NEWLINE_INNER = "NEWLINE_INNER"
    NEWLINE_IN_STRING = "NEWLINE_IN_STRING"
    INDENT = "INDENT"
    DEDENT = "DEDENT"
    SPECIAL = "SPECIAL"


class ProgramToken(NamedTuple):
    kind: Kind
    text: str
    span: tuple[int, int]  # character offsets into the tokenized source

    @property
    def key(self) -> tuple[Kind, str]:
        return (self.kind, self.text)


class LogicalLine(NamedTuple):
    index: int
    tokens: list[ProgramToken]


class Lexeme(NamedTuple):
    """A raw lexeme from the standard tokenizer, with character offsets."""
    type: int
    text: str
    start: int
    end: int


class LexError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0) -> None:
        super().__init__(f"{msg} (line {line}, column {col})")
        self.line = line
        self.col = col


class ReconstructError(ValueError):
    pass


def signature(tokens: Iterable[ProgramToken]) -> list[tuple[str, str]]:
    """Kind/text pairs, i.e. a token sequence with spans dropped."""
    return [(t.kind.value, t.text) for t in tokens]


# --------------------------------------------------------------------------
# raw lexing

def _line_starts(source: str) -> list[int]:
    starts = [0]
    starts.extend(m.end() for m in re.finditer("\n", source))
    return starts


def lex(source: str) -> list[Lexeme]:
    """Run the standard tokenizer, converting positions to offsets.

    Raises :class:`LexError` on unterminated strings, inconsistent
    indentation or characters that cannot start a token.
    """
    starts = _line_starts(source)
    out: list[Lexeme] = []
    readline = io.StringIO(source).readline
    try:
        for tok in _tokenize.generate_tokens(readline):
            (sr, sc), (er, ec) = tok.start, tok.end
            if tok.type == _tokenize.ENDMARKER:
                break
            if tok.type == _tokenize.ERRORTOKEN:
                if tok.string.isspace() or not tok.string:
                    continue
                raise LexError(f"unexpected character {tok.string!r}", sr, sc)
            start = starts[sr - 1] + sc if sr - 1 < len(starts) else len(source)
            end = starts[er - 1] + ec if er - 1 < len(starts) else len(source)
            out.append(Lexeme(tok.type, tok.string, start, end))
    except _tokenize.TokenError as exc:
        msg, (line, col) = exc.args
        raise LexError(msg, line, col) from None
    except IndentationError as exc:
        raise LexError(exc.msg, exc.lineno or 0, exc.offset or 0) from None
    return out


def _soft_keyword_positions(lexemes: Sequence[Lexeme]) -> set[int]:
    """Indices of ``match``/``case`` names used as statement keywords."""
    found: set[int] = set()
    ignorable = (_tokenize.COMMENT, _tokenize.NL)
    line_start = True
    n = len(lexemes)
    for i, lx in enumerate(lexemes):
        if lx.type in ignorable:
            continue
        if lx.type in (_tokenize.NEWLINE, _tokenize.INDENT, _tokenize.DEDENT):
            line_start = True
            continue
        was_start, line_start = line_start, False
        if not (was_start and lx.type == _tokenize.NAME and lx.text in SOFT_KEYWORDS):
            continue
        j = i + 1
        while j < n and lexemes[j].type in ignorable:
            j += 1
        if j >= n or lexemes[j].type == _tokenize.NEWLINE:
            continue
        nxt = lexemes[j]
        if nxt.type == _tokenize.OP and nxt.text in {":", "=", ".", ",", ";", ")"} | _AUGMENTED:
            continue
        # a statement keyword needs a top-level colon later in the line
        depth = 0
        for k in range(j, n):
            t = lexemes[k]
            if t.type == _tokenize.NEWLINE:
                break
            if t.type != _tokenize.OP:
                continue
            if t.text in "([{":
                depth += 1
            elif t.text in ")]}":
                depth -= 1
            elif t.text == ":" and depth == 0:
                found.add(i)
                break
            elif t.text == "=" and depth == 0:
                break
    return found


_AUGMENTED = {"+=", "-=", "*=", "/=", "//=", "%=", "**=", ">>=", "<<=", "&=", "^=", "|=", "@=", ":="}


# --------------------------------------------------------------------------
# piece splitting

def _char_class(c: str) -> int:
    if c == "_":
        return 0
    if c.isdigit():
        return 1
    if c.isupper():
        return 2
    return 3


def _chunk(piece: str) -> list[str]:
    if len(piece) <= MAX_PIECE:
        return [piece]
    return [piece[i:i + MAX_PIECE] for i in range(0, len(piece), MAX_PIECE)]


@functools.lru_cache(maxsize=1 << 16)
def split_identifier(name: str) -> tuple[str, ...]:
    """Split an identifier into pieces; ``"".join`` of the result is ``name``."""
    if not name:
        return ()
    cuts = [0]
    classes = [_char_class(c) for c in name]
    for i in range(1, len(name)):
        prev, cur = classes[i - 1], classes[i]
        if prev != cur and (prev in (0, 1) or cur in (0, 1)):
            cuts.append(i)
        elif prev == 3 and cur == 2:
            cuts.append(i)
        elif prev == 2 and cur == 3 and i >= 2 and classes[i - 2] == 2 and cuts[-1] != i - 1:
            cuts.append(i - 1)
    cuts.append(len(name))
    pieces: list[str] = []
    for a, b in zip(cuts, cuts[1:]):
        pieces.extend(_chunk(name[a:b]))
    return tuple(pieces)


# backslash+whitespace stays one piece so that dropping whitespace never
# turns an escaped space into an escaped quote
_TEXT_PIECE = re.compile(r"\n|[^\W_]+|\\[^\S\n]|[^\S\n]+|.", re.S)
_STRING_HEAD = re.compile(r"([A-Za-z]*)('''|\"\"\"|'|\")")
_DELIMITERS = ("'''", '"""', "'", '"')


def split_text(text: str, newline_pieces: bool = True) -> list[tuple[str, int, int]]:
    """Split literal/comment text into (piece, start, end) triples.

    Whitespace runs are dropped; each newline becomes a ``"\\n"`` entry
    when ``newline_pieces`` is set.
    """
    out = []
    for m in _TEXT_PIECE.finditer(text):
        s = m.group()
        if s == "\n":
            if newline_pieces:
                out.append(("\n", m.start(), m.end()))
            continue
        if s.isspace():
            continue
        if len(s) > MAX_PIECE:
            for k in range(0, len(s), MAX_PIECE):
                out.append((s[k:k + MAX_PIECE], m.start() + k, m.start() + min(k + MAX_PIECE, len(s))))
        else:
            out.append((s, m.start(), m.end()))
    return out


def _string_tokens(literal: str, offset: int) -> list[ProgramToken]:
    m = _STRING_HEAD.match(literal)
    if m is None:
        raise LexError(f"unrecognized string literal {literal[:20]!r}")
    prefix, quote = m.group(1), m.group(2)
    toks = []
    if prefix:
        toks.append(ProgramToken(Kind.STRING_PIECE, prefix, (offset, offset + len(prefix))))
    q0 = offset + len(prefix)
    toks.append(ProgramToken(Kind.STRING_PIECE, quote, (q0, q0 + len(quote))))
    body_start = len(prefix) + len(quote)
    body = literal[body_start:len(literal) - len(quote)]
    for piece, a, b in split_text(body):
        span = (offset + body_start + a, offset + body_start + b)
        if piece == "\n":
            toks.append(ProgramToken(Kind.NEWLINE_IN_STRING, NLSTR_TEXT, span))
        else:
            toks.append(ProgramToken(Kind.STRING_PIECE, piece, span))
    end = offset + len(literal)
    toks.append(ProgramToken(Kind.STRING_PIECE, quote, (end - len(quote), end)))
    return toks


def _pieces(kind: Kind, text: str, start: int) -> list[ProgramToken]:
    out = []
    pos = start
    for piece in _chunk(text):
        out.append(ProgramToken(kind, piece, (pos, pos + len(piece))))
        pos += len(piece)
    return out


# --------------------------------------------------------------------------
# public tokenizer

def tokenize(source: str) -> list[ProgramToken]:
    """Lex ``source`` into program-vocabulary tokens."""
    lexemes = lex(source)
    soft = _soft_keyword_positions(lexemes)
    out: list[ProgramToken] = []
    prev_type = _tokenize.NEWLINE
    for i, lx in enumerate(lexemes):
        t = lx.type
        if t == _tokenize.NAME:
            if keyword.iskeyword(lx.text) or i in soft:
                out.append(ProgramToken(Kind.KEYWORD, lx.text, (lx.start, lx.end)))
            else:
                pos = lx.start
                for piece in split_identifier(lx.text):
                    out.append(ProgramToken(Kind.IDENTIFIER_PIECE, piece, (pos, pos + len(piece))))
                    pos += len(piece)
        elif t == _tokenize.OP:
            out.append(ProgramToken(Kind.PUNCTUATION, lx.text, (lx.start, lx.end)))
        elif t == _tokenize.NUMBER:
            out.extend(_pieces(Kind.NUMBER, lx.text, lx.start))
        elif t == _tokenize.STRING:
            out.extend(_string_tokens(lx.text, lx.start))
        elif t == _tokenize.COMMENT:
            for piece, a, b in split_text(lx.text, newline_pieces=False):
                out.append(ProgramToken(Kind.COMMENT_PIECE, piece, (lx.start + a, lx.start + b)))
        elif t == _tokenize.NEWLINE:
            if lx.text:
                out.append(ProgramToken(Kind.NEWLINE_LOGICAL, NL_TEXT, (lx.start, lx.end)))
        elif t == _tokenize.NL:
            # blank lines carry no information; NL after a comment or inside
            # brackets does
            blank = prev_type in (_tokenize.NEWLINE, _tokenize.NL, _tokenize.INDENT,
                                  _tokenize.DEDENT)
            if lx.text and not blank:
                out.append(ProgramToken(Kind.NEWLINE_INNER, NLCONT_TEXT, (lx.start, lx.end)))
        elif t == _tokenize.INDENT:
            out.append(ProgramToken(Kind.INDENT, INDENT_TEXT, (lx.start, lx.end)))
        elif t == _tokenize.DEDENT:
            out.append(ProgramToken(Kind.DEDENT, DEDENT_TEXT, (lx.start, lx.end)))
        else:
            out.append(ProgramToken(Kind.SPECIAL, ERROR_TEXT, (lx.start, lx.end)))
        prev_type = t
    return out


def logical_lines(tokens: Sequence[ProgramToken]) -> list[LogicalLine]:
    """Group tokens into logical lines, each ended by a logical newline.

    Layout and comment tokens preceding a statement belong to that
    statement's line; trailing tokens after the last logical newline are
    attached to the final line.
    """
    lines: list[LogicalLine] = []
    current: list[ProgramToken] = []
    for tok in tokens:
        current.append(tok)
        if tok.kind is Kind.NEWLINE_LOGICAL:
            lines.append(LogicalLine(len(lines), current))
            current = []
    if current:
        if lines and not any(t.kind not in (Kind.DEDENT, Kind.COMMENT_PIECE, Kind.NEWLINE_INNER)
                             for t in current):
            lines[-1].tokens.extend(current)
        else:
            lines.append(LogicalLine(len(lines), current))
    return lines


# --------------------------------------------------------------------------
# reconstruction

_OPENERS = {"(", "[", "{"}
_GLUE_BEFORE = {")", "]", "}", ",", ":", ";"}


class _Word(NamedTuple):
    kind: str  # "ident", "number", "keyword", "op", "string", "comment"
    text: str


def _join_text_pieces(pieces: Sequence[str], quote: str = "") -> str:
    """Join literal/comment pieces, guessing the dropped whitespace.

    Inside a triple-quoted literal a space is put wherever pieces would
    otherwise form a run of three unescaped delimiter characters.
    """
    out: list[str] = []
    prev = ""
    run = 0  # trailing unescaped delimiter characters
    qc = quote[0] if len(quote) == 3 else ""
    for p in pieces:
        if p == "\n":
            out.append("\n")
            prev = ""
            run = 0
            continue
        if prev and prev[-1].isalnum() and p[0].isalnum() and len(prev) < MAX_PIECE:
            out.append(" ")
        elif qc and p == qc and run == 2:
            out.append(" ")
            run = 0
        out.append(p)
        if qc:
            if p == qc and not (prev == "\\" and _odd_backslashes(out)):
                run += 1
            else:
                run = 0
        prev = p
    return "".join(out)


def _odd_backslashes(out: list[str]) -> bool:
    """Whether the backslash run just before the last piece is odd."""
    k = 0
    for piece in reversed(out[:-1]):
        if piece != "\\":
            break
        k += 1
    return k % 2 == 1


def _words(tokens: Sequence[ProgramToken]) -> Iterator[object]:
    """Merge pieces into source words; layout tokens are passed through."""
    i, n = 0, len(tokens)
    while i < n:
        tok = tokens[i]
        k = tok.kind
        if k is Kind.IDENTIFIER_PIECE:
            run = [tok.text]
            i += 1
            while i < n and tokens[i].kind is Kind.IDENTIFIER_PIECE:
                cand = run + [tokens[i].text]
                if list(split_identifier("".join(cand))) != cand:
                    break
                run = cand
                i += 1
            yield _Word("ident", "".join(run))
        elif k is Kind.NUMBER:
            run = [tok.text]
            i += 1
            while i < n and tokens[i].kind is Kind.NUMBER:
                run.append(tokens[i].text)
                i += 1
            yield _Word("number", "".join(run))
        elif k is Kind.COMMENT_PIECE:
            run = [tok.text]
            i += 1
            while i < n and tokens[i].kind is Kind.COMMENT_PIECE:
                run.append(tokens[i].text)
                i += 1
            yield _Word("comment", _join_text_pieces(run))
        elif k in (Kind.STRING_PIECE, Kind.NEWLINE_IN_STRING):
            literal, i = _read_string(tokens, i)
            yield _Word("string", literal)
        elif k is Kind.KEYWORD:
            yield _Word("keyword", tok.text)
            i += 1
        elif k is Kind.PUNCTUATION:
            yield _Word("op", tok.text)
            i += 1
        else:
            yield tok
            i += 1


def _read_string(tokens: Sequence[ProgramToken], i: int) -> tuple[str, int]:
    n = len(tokens)
    prefix = ""
    if tokens[i].text not in _DELIMITERS:
        if tokens[i].kind is not Kind.STRING_PIECE or not tokens[i].text.isalpha():
            raise ReconstructError(f"string piece {tokens[i].text!r} outside a literal")
        prefix = tokens[i].text
        i += 1
    if i >= n or tokens[i].text not in _DELIMITERS:
        raise ReconstructError("string prefix without a quote")
    quote = tokens[i].text
    i += 1
    body: list[str] = []
    backslashes = 0
    while i < n:
        tok = tokens[i]
        if tok.kind is Kind.NEWLINE_IN_STRING:
            body.append("\n")
            backslashes = 0
        elif tok.kind is Kind.STRING_PIECE:
            if tok.text == quote and backslashes % 2 == 0:
                text = _join_text_pieces(body, quote)
                if len(quote) == 3 and text.endswith(quote[0]):
                    text += " "
                return prefix + quote + text + quote, i + 1
            body.append(tok.text)
            backslashes = backslashes + 1 if tok.text == "\\" else 0
        else:
            break
        i += 1
    raise ReconstructError("unterminated string literal in token stream")


def _needs_space(prev: _Word | None, cur: _Word) -> bool:
    if prev is None:
        return False
    if prev.kind == "op" and prev.text in _OPENERS:
        return False
    if cur.kind == "op":
        if cur.text in _GLUE_BEFORE:
            return False
        if cur.text == ".":
            return prev.kind not in ("ident", "string") and not (prev.kind == "op" and prev.text in ")]}")
        if cur.text in ("(", "["):
            return not (prev.kind in ("ident", "string") or (prev.kind == "op" and prev.text in ")]}"))
    if prev.kind == "op" and prev.text == "." and cur.kind == "ident":
        return False
    return True


def detokenize(tokens: Sequence[ProgramToken], indent: str = "    ") -> str:
    """Render tokens as source with canonical spacing and indentation."""
    out: list[str] = []
    depth = 0
    at_line_start = True
    prev: _Word | None = None
    for item in _words(tokens):
        if isinstance(item, ProgramToken):
            k = item.kind
            if k is Kind.INDENT:
                depth += 1
            elif k is Kind.DEDENT:
                depth -= 1
                if depth < 0:
                    raise ReconstructError("dedent below column zero")
            elif k in (Kind.NEWLINE_LOGICAL, Kind.NEWLINE_INNER):
                out.append("\n")
                at_line_start = True
                prev = None
            else:
                raise ReconstructError(f"cannot render token {item.text!r}")
            continue
        if at_line_start:
            out.append(indent * depth)
            at_line_start = False
        elif _needs_space(prev, item):
            out.append(" ")
        out.append(item.text)
        prev = item
    if depth:
        raise ReconstructError(f"{depth} indentation level(s) left open")
    return "".join(out)


def roundtrip_problem(tokens: Sequence[ProgramToken]) -> str | None:
    """Why ``tokens`` fail to survive detokenize/tokenize, or ``None``."""
    try:
        again = tokenize(detokenize(tokens))
    except (LexError, ReconstructError) as exc:
        return str(exc)
    a, b = signature(tokens), signature(again)
    if a == b:
        return None
    k = next((i for i, (x, y) in enumerate(zip(a, b)) if x != y), min(len(a), len(b)))
    return f"first difference at token {k}: {a[k:k + 1]} vs {b[k:k + 1]}"


# --------------------------------------------------------------------------
# token-stream files

def token_record(path: str, tokens: Sequence[ProgramToken]) -> str:
    return json.dumps({"path": path, "tokens": [[t.kind.value, t.text] for t in tokens]},
                      ensure_ascii=False)


def read_token_records(lines: Iterable[str]) -> Iterator[tuple[str, list[tuple[str, str]]]]:
    for line in lines:
        if line.strip():
            rec = json.loads(line)
            yield rec["path"], [tuple(p) for p in rec["tokens"]]

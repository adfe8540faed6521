"""Dataset generation over a file manifest.

Files are processed independently (optionally in a worker pool) and the
results merged in canonical provenance order, so neither the manifest
order nor the worker count affects the output.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import partial
from typing import IO, Iterable, Sequence

from .. import corpus, detrand, pysyntax
from ..subword import SubwordVocabulary
from . import generators as g
from .pointer import gen_pointer_example, prune_example
from .tables import TASKS

log = logging.getLogger(__name__)


class TaskError(ValueError):
    pass


@dataclass
class GenerationReport:
    files: int = 0
    skipped_files: int = 0
    functions: int = 0
    skipped_functions: int = 0
    eligible: int = 0
    examples: int = 0
    subsampled_from: int | None = None
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k != "diagnostics"}


@dataclass
class _FileResult:
    path: str
    functions: int = 0
    skipped: list[str] = field(default_factory=list)
    # (sort key, records) per eligible function
    groups: list[tuple[tuple, list[dict]]] = field(default_factory=list)
    docstring_items: list[g.DocstringItem] = field(default_factory=list)
    error: str | None = None


def _units(path: str) -> tuple[list[pysyntax.FunctionUnit], str | None]:
    src = corpus.read_source(path)
    if src is None:
        return [], f"{path}: unreadable or not UTF-8"
    try:
        return pysyntax.split_functions(src, path), None
    except pysyntax.ParseError as exc:
        return [], f"{path}: {exc}"


def _process_file(path: str, task: str, seed: str, vocab: SubwordVocabulary | None,
                  max_len: int | None) -> _FileResult:
    units, error = _units(path)
    res = _FileResult(path, len(units), error=error)
    for f in units:
        try:
            feats = pysyntax.analyze(f)
        except pysyntax.ParseError as exc:
            res.skipped.append(f"{f.path}:{f.line}: {f.qualname}: {exc}")
            continue
        if task == "docstring":
            item = g.docstring_item(f, feats)
            if item is not None:
                res.docstring_items.append(item)
            continue
        records = _records_for(task, f, feats, seed, vocab, max_len)
        if records:
            res.groups.append((f.sort_key, records))
    return res


def _records_for(task: str, f: pysyntax.FunctionUnit, feats: pysyntax.FunctionFeatures,
                 seed: str, vocab: SubwordVocabulary | None, max_len: int | None) -> list[dict]:
    if task == "exception":
        e = g.gen_exception_type(f, feats, seed)
        return [e.to_dict()] if e else []
    gen = {"misuse": g.gen_variable_misuse, "pointer": g.gen_variable_misuse,
           "binop": g.gen_wrong_binop, "operand": g.gen_swapped_operand}[task]
    pair = gen(f, feats, seed)
    if pair is None:
        return []
    if task != "pointer":
        return [e.to_dict() for e in pair]
    assert vocab is not None
    buggy, bugfree = gen_pointer_example(pair, vocab)
    if max_len:
        buggy, bugfree = prune_example(buggy, max_len), prune_example(bugfree, max_len)
    return [bugfree.to_dict(), buggy.to_dict()]


def generate(paths: Sequence[str], task: str, seed: str, split: str = "train",
             workers: int = 1, vocab: SubwordVocabulary | None = None,
             max_len: int | None = None, subsample: int | None = None
             ) -> tuple[list[dict], GenerationReport]:
    """Records of one task dataset for one split, in canonical order."""
    if task not in TASKS:
        raise TaskError(f"unknown task {task!r}; expected one of {', '.join(TASKS)}")
    if task == "pointer" and vocab is None:
        raise TaskError("the pointer task needs a subword vocabulary")
    report = GenerationReport()
    work = partial(_process_file, task=task, seed=seed, vocab=vocab, max_len=max_len)
    groups: list[tuple[tuple, list[dict]]] = []
    items: list[g.DocstringItem] = []
    for res in corpus.parallel_map(work, sorted(set(paths)), workers):
        report.files += 1
        if res.error:
            report.skipped_files += 1
            report.diagnostics.append(res.error)
            log.warning("%s", res.error)
        report.functions += res.functions
        report.skipped_functions += len(res.skipped)
        report.diagnostics.extend(res.skipped)
        groups.extend(res.groups)
        items.extend(res.docstring_items)
    if task == "docstring":
        for pair in g.gen_function_docstring(items, seed, split):
            groups.append((pair.unit.sort_key, [e.to_dict() for e in pair]))
    groups.sort(key=lambda kg: kg[0])
    report.eligible = len(groups)
    if subsample is not None:
        groups = subsample_groups(groups, subsample, seed)
        report.subsampled_from = report.eligible
    records = [r for _, rs in groups for r in rs]
    report.examples = len(records)
    return records, report


def subsample_groups(groups: Sequence[tuple[tuple, list[dict]]], n_examples: int, seed: str
                     ) -> list[tuple[tuple, list[dict]]]:
    """Keep whole groups (pairs stay together) totalling ``n_examples``."""
    if not groups:
        return []
    per = max(len(rs) for _, rs in groups)
    keys = [list(k) for k, _ in groups]
    keep = detrand.subsample(f"{seed}\0subsample", keys, n_examples // per)
    return [groups[i] for i in keep]


def write_jsonl(fh: IO[str], records: Iterable[dict]) -> int:
    n = 0
    for r in records:
        fh.write(json.dumps(r, ensure_ascii=False) + "\n")
        n += 1
    return n


def read_jsonl(path: str) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise TaskError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from None
    return out

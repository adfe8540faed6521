"""Manifests, corpus loading and the ordered worker pool."""
from __future__ import annotations

import hashlib
import logging
import multiprocessing
import os
import sysconfig
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence, TypeVar

log = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

WORKERS_ENV = "CODEBENCH_WORKERS"

_SKIP_DIRS = ("test", "tests", "idle_test", "site-packages", "dist-packages", "__pycache__")


def read_manifest(path: str | os.PathLike) -> list[str]:
    """One path per line; blank lines and ``#`` comments are ignored."""
    with open(path, encoding="utf-8") as fh:
        return [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]


def write_manifest(path: str | os.PathLike, paths: Iterable[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in sorted(paths):
            fh.write(p + "\n")


def read_source(path: str) -> str | None:
    """File text, or ``None`` if it is not UTF-8 (such files are skipped)."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
        return data.decode("utf-8").replace("\r\n", "\n")
    except (OSError, UnicodeDecodeError) as exc:
        log.warning("skipping %s: %s", path, exc)
        return None


def stdlib_manifest(limit: int = 240, max_bytes: int = 30000) -> list[str]:
    """A deterministic corpus of small standard-library modules.

    Used as the bundled mini-corpus: every CPython installation carries it.
    """
    root = Path(sysconfig.get_paths()["stdlib"])
    found = []
    for p in sorted(root.rglob("*.py")):
        rel = p.relative_to(root).parts
        if any(part in _SKIP_DIRS or part.startswith("test") for part in rel[:-1]):
            continue
        if rel[-1].startswith("test_") or p.is_symlink():
            continue
        try:
            size = p.stat().st_size
        except OSError:
            continue
        if 0 < size <= max_bytes:
            found.append(str(p))
        if len(found) >= limit:
            break
    return found


def input_digest(paths: Iterable[str], extra: Sequence[str] = ()) -> str:
    """Order-independent MD5 over (path, content-digest) pairs."""
    h = hashlib.md5()
    for p in sorted(set(paths)):
        try:
            with open(p, "rb") as fh:
                content = hashlib.md5(fh.read()).hexdigest()
        except OSError:
            content = "missing"
        h.update(f"{p}\0{content}\n".encode("utf-8"))
    for e in extra:
        h.update(e.encode("utf-8"))
    return h.hexdigest()


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, requested)
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", WORKERS_ENV, env)
    return 1


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1,
                 chunksize: int = 4) -> Iterator[R]:
    """Map preserving input order; the worker count never changes results."""
    if workers <= 1 or len(items) <= 1:
        yield from map(fn, items)
        return
    ctx = multiprocessing.get_context("fork" if "fork" in multiprocessing.get_all_start_methods()
                                      else None)
    with ctx.Pool(workers) as pool:
        yield from pool.imap(fn, items, chunksize=chunksize)

"""Command-line entry point.

Every command that writes a dataset also writes ``<output>.meta.json``
holding the seed, tool version, command arguments and an order-independent
digest of the inputs. Worker count comes from ``CODEBENCH_WORKERS`` only.
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import logging
import sys
from collections import Counter
from typing import Iterable, Sequence

from . import __version__, corpus, dedup, evalharness, pretraingen, pytok, subword
from .taskgen import pipeline
from .taskgen.pointer import MAX_LENGTHS, PointerExample, mask_violations
from .taskgen.tables import EXCEPTION_LABELS, TASKS

log = logging.getLogger("codebench")

SPLITS = ("train", "valid", "test")
CONFIG_KEYS = {"seed": str, "max_len": int, "vocab_size": int, "dupe_factor": int,
               "subsample": int, "mask_rate": float, "max_predictions": int}


class DataError(Exception):
    pass


def _file_md5(path: str) -> str:
    h = hashlib.md5()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_metadata(out: str, args: argparse.Namespace, inputs: Sequence[str],
                   extra_files: Sequence[str] = (), **fields) -> None:
    meta = {
        "tool": "codebench",
        "version": __version__,
        "command": args.command,
        "seed": getattr(args, "seed", None),
        "input_digest": corpus.input_digest(inputs),
        "input_files": len(set(inputs)),
        "auxiliary_digests": {p: _file_md5(p) for p in extra_files},
        "arguments": {k: v for k, v in sorted(vars(args).items())
                      if k not in ("func", "out", "config", "verbose", "command")},
    }
    meta.update(fields)
    with open(out + ".meta.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_metadata(path: str) -> dict:
    try:
        with open(path + ".meta.json", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        return {}


def load_config(path: str) -> dict:
    """``key = value`` lines (an optional ``[section]`` header is ignored)."""
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None
    if not text.lstrip().startswith("["):
        text = "[codebench]\n" + text
    try:
        cp.read_string(text, source=path)
    except configparser.Error as exc:
        raise DataError(f"{path}: {exc}") from None
    out = {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            key = key.replace("-", "_")
            if key not in CONFIG_KEYS:
                raise DataError(f"{path}: unknown key {key!r}")
            value = raw.strip().strip('"').strip("'")
            try:
                out[key] = CONFIG_KEYS[key](value)
            except ValueError:
                raise DataError(f"{path}: bad value for {key}: {raw!r}") from None
    return out


def _manifest(path: str) -> list[str]:
    try:
        paths = corpus.read_manifest(path)
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None
    if not paths:
        raise DataError(f"{path}: empty manifest")
    return paths


def _tokenize_path(path: str) -> tuple[str, list | None, str | None]:
    src = corpus.read_source(path)
    if src is None:
        return path, None, f"{path}: unreadable or not UTF-8"
    try:
        return path, pytok.tokenize(src), None
    except pytok.LexError as exc:
        return path, None, f"{path}:{exc.line}:{exc.col}: {exc}"


def _tokenized(paths: Sequence[str]) -> Iterable:
    for path, toks, err in corpus.parallel_map(_tokenize_path, sorted(set(paths)),
                                               corpus.worker_count()):
        if err:
            log.warning("%s", err)
            continue
        yield path, toks


def _load_vocab(path: str) -> subword.SubwordVocabulary:
    try:
        return subword.SubwordVocabulary.load(path)
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None


# --------------------------------------------------------------------------
# commands

def cmd_dedup(args: argparse.Namespace) -> int:
    paths = _manifest(args.manifest)
    against = _manifest(args.against) if args.against else []
    kept = dedup.dedup_manifest(paths, against, corpus.worker_count())
    corpus.write_manifest(args.out, kept)
    write_metadata(args.out, args, paths + against, kept=len(kept))
    print(f"{len(paths)} files -> {len(kept)} kept")
    return 0


def cmd_vocab(args: argparse.Namespace) -> int:
    paths = _manifest(args.manifest)
    counts: Counter[str] = Counter()
    for _, toks in _tokenized(paths):
        counts.update(t.text for t in toks)
    try:
        v = subword.build_vocabulary(counts, args.size)
    except subword.VocabError as exc:
        raise DataError(str(exc)) from None
    v.save(args.out)
    write_metadata(args.out, args, paths, entries=len(v), target_size=args.size)
    print(f"{len(counts)} distinct tokens -> {len(v)} subwords (+256 byte escapes)")
    return 0


def cmd_tokenize(args: argparse.Namespace) -> int:
    paths = _manifest(args.manifest)
    failures = 0
    n = 0
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        for path, toks in _tokenized(paths):
            n += 1
            fh.write(pytok.token_record(path, toks) + "\n")
            if args.check:
                problem = pytok.roundtrip_problem(toks)
                if problem:
                    failures += 1
                    print(f"{path}: round trip failed: {problem}", file=sys.stderr)
    write_metadata(args.out, args, paths, files=n)
    if args.check:
        print(f"round trip: {n - failures}/{n} files")
    return 1 if failures else 0


def cmd_encode(args: argparse.Namespace) -> int:
    paths = _manifest(args.manifest)
    v = _load_vocab(args.vocab)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        for path, toks in _tokenized(paths):
            seq = subword.encode_tokens(v, toks)
            fh.write(json.dumps({"path": path, "ids": seq.ids,
                                 "token_starts": seq.token_starts}) + "\n")
    write_metadata(args.out, args, paths, [args.vocab])
    return 0


def cmd_gen_task(args: argparse.Namespace) -> int:
    paths = _manifest(args.manifest)
    vocab = _load_vocab(args.vocab) if args.vocab else None
    if args.task == "pointer" and vocab is None:
        raise UsageError("--vocab is required for the pointer task")
    records, report = pipeline.generate(
        paths, args.task, args.seed, args.split, corpus.worker_count(), vocab,
        args.max_len if args.task == "pointer" else None, args.subsample)
    for d in report.diagnostics:
        print(f"warning: {d}", file=sys.stderr)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        pipeline.write_jsonl(fh, records)
    write_metadata(args.out, args, paths, [args.vocab] if args.vocab else [],
                   task=args.task, split=args.split, max_len=args.max_len,
                   subsample=args.subsample, report=report.to_dict())
    print(f"{args.task}/{args.split}: {report.eligible} eligible functions, "
          f"{report.examples} examples")
    return 0


def cmd_gen_pretrain(args: argparse.Namespace) -> int:
    paths = _manifest(args.manifest)
    v = _load_vocab(args.vocab)
    docs = pretraingen.make_documents(list(_tokenized(paths)), v, args.max_len, args.plain)
    n = 0
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        for e in pretraingen.gen_pretrain_examples(
                docs, v, args.seed, args.max_len, args.dupe_factor, args.plain,
                args.mask_rate, args.max_predictions):
            fh.write(json.dumps(e.to_dict()) + "\n")
            n += 1
    write_metadata(args.out, args, paths, [args.vocab], examples=n,
                   dupe_factor=args.dupe_factor, max_len=args.max_len, plain=args.plain)
    print(f"{n} pre-training examples")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    gold = pipeline.read_jsonl(args.gold)
    preds = pipeline.read_jsonl(args.predictions)
    if args.task == "pointer":
        rep = evalharness.score_pointer(preds, gold)
    else:
        rep = evalharness.score_classification(preds, gold, args.task)
    print(rep.table())
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            json.dump({"task": args.task, **rep.to_dict()}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def dataset_stats(path: str) -> dict:
    records = pipeline.read_jsonl(path)
    meta = read_metadata(path)
    out = {"path": path, "task": meta.get("task"), "split": meta.get("split"),
           "examples": len(records)}
    if records and "subtokens" in records[0] and "candidates_mask" in records[0]:
        examples = [PointerExample.from_dict(r) for r in records]
        out["labels"] = dict(sorted(Counter(
            "buggy" if e.buggy else "bug-free" for e in examples).items()))
        out["truncated"] = sum(e.truncated for e in examples)
        out["mask_violations"] = sum(1 for e in examples if mask_violations(e))
    else:
        counts = Counter(r.get("label") for r in records)
        if out["task"] == "exception":
            counts.update({label: 0 for label in EXCEPTION_LABELS})
        out["labels"] = dict(sorted(counts.items()))
    return out


def cmd_stats(args: argparse.Namespace) -> int:
    rows = [dataset_stats(p) for p in args.datasets]
    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    for r in rows:
        print(f"{r['path']}  task={r['task']}  split={r['split']}  examples={r['examples']}")
        width = max([len(k) for k in r["labels"]] + [5])
        for label, c in r["labels"].items():
            print(f"  {label:<{width}}  {c:>8}")
    return 0


# --------------------------------------------------------------------------
# argument parsing

class UsageError(Exception):
    pass


def build_parser(defaults: dict | None = None) -> argparse.ArgumentParser:
    d = {"seed": "0", "max_len": 512, "vocab_size": 50000, "dupe_factor": 10,
         "subsample": None, "mask_rate": pretraingen.MASK_RATE,
         "max_predictions": pretraingen.MAX_PREDICTIONS}
    d.update(defaults or {})
    p = argparse.ArgumentParser(prog="codebench",
                                description="Python corpus and benchmark toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="key = value file with default settings")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("dedup", help="drop near-duplicate files from a manifest")
    s.add_argument("--manifest", required=True)
    s.add_argument("--against", help="manifest of a reference corpus to filter against")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_dedup)

    s = sub.add_parser("vocab", help="build a subword vocabulary")
    s.add_argument("--manifest", required=True)
    s.add_argument("--size", type=int, default=d["vocab_size"])
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_vocab)

    s = sub.add_parser("tokenize", help="write program-token records")
    s.add_argument("--manifest", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--check", action="store_true", help="verify the detokenize round trip")
    s.set_defaults(func=cmd_tokenize)

    s = sub.add_parser("encode", help="write subword ids per file")
    s.add_argument("--manifest", required=True)
    s.add_argument("--vocab", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_encode)

    s = sub.add_parser("gen-task", help="generate a fine-tuning dataset split")
    s.add_argument("--task", required=True, choices=TASKS)
    s.add_argument("--split", required=True, choices=SPLITS)
    s.add_argument("--manifest", required=True)
    s.add_argument("--seed", default=d["seed"])
    s.add_argument("--max-len", type=int, default=d["max_len"], choices=MAX_LENGTHS)
    s.add_argument("--vocab", help="subword vocabulary (pointer task)")
    s.add_argument("--subsample", type=int, default=d["subsample"],
                   help="keep this many examples, pairs kept together")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen_task)

    s = sub.add_parser("gen-pretrain", help="generate pre-training examples")
    s.add_argument("--manifest", required=True)
    s.add_argument("--vocab", required=True)
    s.add_argument("--seed", default=d["seed"])
    s.add_argument("--dupe-factor", type=int, default=d["dupe_factor"])
    s.add_argument("--max-len", type=int, default=d["max_len"], choices=pretraingen.BUCKETS)
    s.add_argument("--mask-rate", type=float, default=d["mask_rate"])
    s.add_argument("--max-predictions", type=int, default=d["max_predictions"])
    s.add_argument("--plain", action="store_true",
                   help="unmasked single-sentence examples without negatives")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen_pretrain)

    s = sub.add_parser("eval", help="score predictions against a gold dataset")
    s.add_argument("--task", required=True, choices=TASKS)
    s.add_argument("--gold", required=True)
    s.add_argument("--predictions", required=True)
    s.add_argument("--out", help="write the report as JSON")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("stats", help="example and per-class counts of datasets")
    s.add_argument("datasets", nargs="+")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_stats)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    try:
        defaults = load_config(known.config) if known.config else {}
    except DataError as exc:
        print(f"codebench: error: {exc}", file=sys.stderr)
        return 1
    parser = build_parser(defaults)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"codebench: error: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError, ValueError) as exc:
        # LexError, VocabError, TaskError, EvalError and JSON errors are ValueErrors
        msg = f"{exc.filename}: {exc.strerror}" if isinstance(exc, OSError) and exc.filename else exc
        print(f"codebench: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

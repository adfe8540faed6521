import json

import pytest

from codebench import cli, corpus
from codebench.taskgen.tables import EXCEPTION_LABELS


@pytest.fixture(scope="module")
def work(tmp_path_factory, mini_manifest):
    d = tmp_path_factory.mktemp("cli")
    manifest = d / "manifest.txt"
    corpus.write_manifest(str(manifest), mini_manifest[:40])
    assert cli.main(["vocab", "--manifest", str(manifest), "--size", "800",
                     "--out", str(d / "vocab.txt")]) == 0
    return d, manifest


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_gen_task_is_byte_identical(work):
    d, manifest = work
    for task in ("misuse", "pointer"):
        outs = []
        for k in range(2):
            out = d / f"{task}{k}.jsonl"
            extra = ["--vocab", d / "vocab.txt"] if task == "pointer" else []
            assert run("gen-task", "--task", task, "--split", "train", "--seed", "s",
                       "--manifest", manifest, "--out", out, *extra) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1] and outs[0]
        meta = json.loads((d / f"{task}0.jsonl.meta.json").read_text())
        assert meta["seed"] == "s" and meta["version"] and meta["input_digest"]


def test_unknown_task_exits_2(work, capsys):
    d, manifest = work
    assert run("gen-task", "--task", "nope", "--split", "train", "--manifest", manifest,
               "--out", d / "x.jsonl") == 2
    assert run("frobnicate") == 2
    assert run("gen-task", "--task", "pointer", "--split", "train", "--manifest", manifest,
               "--out", d / "x.jsonl") == 2


def test_data_errors_exit_1(work, tmp_path, capsys):
    d, manifest = work
    assert run("gen-task", "--task", "misuse", "--split", "train",
               "--manifest", tmp_path / "missing.txt", "--out", tmp_path / "o.jsonl") == 1
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"info": "a", "label": "Correct"}\nnot json\n')
    assert run("eval", "--task", "misuse", "--gold", bad, "--predictions", bad) == 1
    assert f"{bad}:2" in capsys.readouterr().err


def test_stats_lists_twenty_exception_labels(work, capsys):
    d, manifest = work
    out = d / "exc.jsonl"
    assert run("gen-task", "--task", "exception", "--split", "train",
               "--manifest", manifest, "--out", out) == 0
    capsys.readouterr()
    assert run("stats", out, "--json") == 0
    rows = json.loads(capsys.readouterr().out)
    assert set(rows[0]["labels"]) == set(EXCEPTION_LABELS)
    assert sum(rows[0]["labels"].values()) == rows[0]["examples"]
    assert run("stats", out) == 0
    text = capsys.readouterr().out
    assert all(label in text for label in EXCEPTION_LABELS)


def test_stats_balance(work, capsys):
    d, manifest = work
    out = d / "binop.jsonl"
    assert run("gen-task", "--task", "binop", "--split", "valid",
               "--manifest", manifest, "--out", out) == 0
    capsys.readouterr()
    run("stats", out, "--json")
    labels = json.loads(capsys.readouterr().out)[0]["labels"]
    assert labels["Correct"] == labels["Wrong binary operator"] > 0


def test_config_file(work, tmp_path):
    d, manifest = work
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed = fromconfig\n")
    out = tmp_path / "m.jsonl"
    assert run("--config", cfg, "gen-task", "--task", "operand", "--split", "test",
               "--manifest", manifest, "--out", out) == 0
    assert json.loads((tmp_path / "m.jsonl.meta.json").read_text())["seed"] == "fromconfig"
    cfg.write_text("colour = blue\n")
    assert run("--config", cfg, "stats", out) == 1


def test_tokenize_check_and_encode(work, capsys):
    d, manifest = work
    assert run("tokenize", "--manifest", manifest, "--out", d / "toks.jsonl", "--check") == 0
    assert run("encode", "--manifest", manifest, "--vocab", d / "vocab.txt",
               "--out", d / "ids.jsonl") == 0
    rows = [json.loads(line) for line in (d / "ids.jsonl").read_text().splitlines()]
    assert len(rows) == 40


def test_gen_pretrain(work, capsys):
    d, manifest = work
    outs = []
    for k in range(2):
        out = d / f"pre{k}.jsonl"
        assert run("gen-pretrain", "--manifest", manifest, "--vocab", d / "vocab.txt",
                   "--dupe-factor", 1, "--max-len", 128, "--out", out) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    first = json.loads(outs[0].splitlines()[0])
    assert len(first["subtokens"]) <= 128 and len(first["masked_positions"]) <= 20


def test_dedup_command(work, tmp_path):
    d, manifest = work
    a = tmp_path / "a.py"
    b = tmp_path / "b.py"
    a.write_text("x = 'same'\nprint(x)\n")
    b.write_text("x = 'same'\nprint(x)\n")
    m = tmp_path / "m.txt"
    corpus.write_manifest(str(m), [str(b), str(a)])
    assert run("dedup", "--manifest", m, "--out", tmp_path / "kept.txt") == 0
    assert corpus.read_manifest(str(tmp_path / "kept.txt")) == [str(a)]


def test_eval_command(tmp_path, capsys):
    from pathlib import Path
    fx = Path(__file__).parent / "fixtures" / "eval"
    out = tmp_path / "report.json"
    assert run("eval", "--task", "pointer", "--gold", fx / "pointer_gold.jsonl",
               "--predictions", fx / "pointer_pred.jsonl", "--out", out) == 0
    assert json.loads(out.read_text())["localization_accuracy"] == 0.5

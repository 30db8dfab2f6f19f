import json

import pytest
from click.testing import CliRunner

from cli import cli
from params import EXIT_DATA, EXIT_UNSATISFIED, EXIT_USAGE


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def custom(walkthrough_rules_path):
    return f"custom:{walkthrough_rules_path}"


def _records(output: str) -> list[dict]:
    return [json.loads(line) for line in output.splitlines() if line.strip()]


def test_topk_walkthrough(runner, walkthrough_path, custom):
    result = runner.invoke(cli, ["topk", "--input", walkthrough_path, "--k", "6", "--constraints", custom])
    assert result.exit_code == 0, result.output
    rows = [line.split("\t") for line in result.output.splitlines()]
    assert [row[1] for row in rows] == ["1", "2", "3", "4", "5", "6"]
    assert [row[2] for row in rows] == ["8.0", "6.0", "6.0", "4.8", "4.5", "3.6"]
    assert [row[4] for row in rows] == ["No", "No", "No", "Yes", "Yes", "No"]
    assert [row[5] for row in rows] == ["-", "-", "-", "No", "Yes", "-"]
    assert rows[4][3] == "B-cash I-cash I-cash"


def test_topk_without_constraints(runner, walkthrough_path):
    result = runner.invoke(cli, ["topk", "--input", walkthrough_path, "--k", "2"])
    assert result.exit_code == 0
    assert [line.split("\t")[5] for line in result.output.splitlines()] == ["-", "-"]


def test_decode_without_constraints_keeps_argmax(runner, walkthrough_path):
    result = runner.invoke(cli, ["decode", "--input", walkthrough_path])
    assert result.exit_code == 0
    (record,) = _records(result.output)
    assert record["decoder"] == "lazyk"
    assert record["status"] == "satisfied"
    assert record["sequences_examined"] == 1
    assert record["labels"] == ["B-cash", "I-total", "I-total"]


def test_decode_show_fields(runner, walkthrough_path, custom, tmp_path):
    out = tmp_path / "decoded.jsonl"
    result = runner.invoke(cli, [
        "decode", "--input", walkthrough_path, "--constraints", custom, "--show-fields", "--output", str(out),
    ])
    assert result.exit_code == 0
    (record,) = _records(out.read_text(encoding="utf-8"))
    assert record["labels"] == ["B-cash", "I-cash", "I-cash"]
    assert record["sequences_examined"] == 5
    assert record["fields"] == {"cash": ["56000.00"], "total": ["56000.00"]}
    assert record["verdicts"] == {"bio": "satisfied", "parseable": "satisfied", "cash = total + change": "satisfied"}


def test_strict_exit_code(runner, walkthrough_path, custom):
    args = ["decode", "--input", walkthrough_path, "--constraints", custom, "--strict"]
    assert runner.invoke(cli, args + ["--max-k", "3"]).exit_code == EXIT_UNSATISFIED
    assert runner.invoke(cli, args + ["--max-k", "64"]).exit_code == 0


@pytest.mark.parametrize("args", [
    ["decode"],
    ["decode", "--input", "{path}", "--decoder", "greedy"],
    ["decode", "--input", "{path}", "--constraints", "sroie"],
    ["eval", "--input", "{path}", "--constraints", "custom"],
    ["bench", "--input", "{path}", "--jobs", "0"],
    ["decode", "--input", "{path}", "--decoder", "argmax", "--mass-threshold", "0.5"],
    ["decode", "--input", "{path}", "--max-k", "0"],
    ["topk", "--input", "{path}"],
    ["gen", "--output", "x.jsonl", "--noise", "2"],
    ["nonsense"],
])
def test_usage_errors(runner, walkthrough_path, args):
    args = [a.replace("{path}", walkthrough_path) for a in args]
    assert runner.invoke(cli, args).exit_code == EXIT_USAGE


def test_data_errors(runner, walkthrough_path, tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"doc_id": "a", "tokens": ["x"], "label_vocab": ["O"], "probs": [[0.5, 0.5]]}\n',
                   encoding="utf-8")
    result = runner.invoke(cli, ["decode", "--input", str(bad)])
    assert result.exit_code == EXIT_DATA
    assert f"{bad}:1:" in result.output
    missing = f"custom:{tmp_path / 'absent.json'}"
    result = runner.invoke(cli, ["decode", "--input", walkthrough_path, "--constraints", missing])
    assert result.exit_code == EXIT_DATA
    assert "Rule file not found" in result.output


def test_undecodable_corpus_is_a_data_error(runner, walkthrough_path, tmp_path):
    bad = tmp_path / "bad.jsonl"
    with open(walkthrough_path, "rb") as f:
        bad.write_bytes(f.read().replace(b"walkthrough", b"walk\xffthrough", 1))
    result = runner.invoke(cli, ["decode", "--input", str(bad)])
    assert result.exit_code == EXIT_DATA
    assert f"{bad}:1:" in result.output


def test_gen_then_eval_and_bench(runner, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for path in (a, b):
        result = runner.invoke(cli, ["gen", "--output", str(path), "--docs", "8", "--tokens-per-doc", "20",
                                     "--noise", "0.1", "--seed", "3"])
        assert result.exit_code == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text(encoding="utf-8").splitlines()) == 8

    result = runner.invoke(cli, ["eval", "--input", str(a), "--max-k", "1", "--max-k", "64"])
    assert result.exit_code == 0
    records = _records(result.output)
    assert [(r["decoder"], r["max_k"]) for r in records] == [
        ("argmax", 1), ("argmax", 64), ("lazyk", 1), ("lazyk", 64),
    ]
    assert all(r["docs"] == 8 for r in records)
    assert records[3]["csr"] >= records[0]["csr"]

    result = runner.invoke(cli, ["bench", "--input", str(a), "--repeats", "1", "--max-k", "8", "--max-k", "4",
                                 "--jobs", "2"])
    assert result.exit_code == 0
    assert [r["max_k"] for r in _records(result.output)] == [4, 8]

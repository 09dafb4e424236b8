from __future__ import annotations

import json

import pytest

from pae.cli import main
from pae.embeddings import load_word2vec_text

POLICY_TEXT = """We collect your name and email address when you register.

Usage data is shared with advertising partners.

You can delete your account at any time.
"""

PRIVACYQA_TSV = "\n".join(
    [
        "DocID\tQueryID\tQuery\tSegmentID\tSegment\tAnn1\tAnn2",
        "d1\tq1\tuser's device identifiers?\t0\tuser's device identifiers are stored\tRelevant\tIrrelevant",
        "d1\tq1\tuser's device identifiers?\t1\tcontact support with concerns\tIrrelevant\tIrrelevant",
        "d1\tq2\tcontact support?\t0\tuser's device identifiers are stored\tIrrelevant\tIrrelevant",
        "d1\tq2\tcontact support?\t1\tcontact support with concerns\tRelevant\tRelevant",
    ]
)


@pytest.fixture
def policy_file(tmp_path):
    path = tmp_path / "acme.txt"
    path.write_text(POLICY_TEXT, encoding="utf-8")
    return path


@pytest.fixture
def isolated_store(tmp_path, monkeypatch):
    monkeypatch.setenv("PAE_STORE", str(tmp_path / "policies.jsonl"))
    return tmp_path / "policies.jsonl"


class TestAnswer:
    def test_planted_fixture(self, policy_file, tmp_path, isolated_store, capsys):
        out = tmp_path / "answer.json"
        code = main(
            [
                "answer",
                "--policy",
                str(policy_file),
                "--question",
                "can I delete my account?",
                "--k",
                "2",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["summary"][0]["segment_index"] == 2
        assert len(payload["summary"]) == 2
        assert "delete" in capsys.readouterr().out

    def test_k_zero_is_usage_error(self, policy_file, isolated_store, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["answer", "--policy", str(policy_file), "--question", "x?", "--k", "0"])
        assert exc.value.code == 1
        assert "error" in capsys.readouterr().err

    def test_missing_policy_file_is_user_error(self, tmp_path, isolated_store):
        code = main(["answer", "--policy", str(tmp_path / "nope.txt"), "--question", "x?"])
        assert code == 1

    def test_ablate_expansion_equals_disabled_methods(self, policy_file, tmp_path, isolated_store):
        out_a = tmp_path / "a.json"
        out_b = tmp_path / "b.json"
        question = "is my data sold to partners?"
        assert (
            main(
                [
                    "answer", "--policy", str(policy_file), "--question", question,
                    "--ablate-expansion", "--out", str(out_a),
                ]
            )
            == 0
        )
        assert (
            main(
                [
                    "answer", "--policy", str(policy_file), "--question", question,
                    "--ablate-expansion", "--out", str(out_b),
                ]
            )
            == 0
        )
        a = json.loads(out_a.read_text())
        b = json.loads(out_b.read_text())
        a.pop("timing_ms")
        b.pop("timing_ms")
        assert a == b
        assert all(s["winning_method"] == "ORIGINAL" for s in a["summary"])


class TestIngest:
    def test_ingest_then_duplicate(self, policy_file, isolated_store, capsys):
        assert main(["ingest", "--policy", str(policy_file), "--id", "acme"]) == 0
        assert isolated_store.exists()
        assert "3 segments" in capsys.readouterr().out
        assert main(["ingest", "--policy", str(policy_file), "--id", "acme"]) == 1


class TestExpand:
    def test_prints_paraphrases(self, isolated_store, tmp_path, capsys):
        out = tmp_path / "expand.json"
        code = main(
            ["expand", "--question", "does it access my phone contacts?", "--out", str(out)]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        texts = [p["text"] for p in payload["paraphrases"]]
        assert "does it access user's device contacts?" in texts
        assert "ORIGINAL" in capsys.readouterr().out


class TestEvaluateCommand:
    def test_golden_rows(self, tmp_path, isolated_store, capsys):
        dataset = tmp_path / "privacyqa.tsv"
        dataset.write_text(PRIVACYQA_TSV + "\n", encoding="utf-8")
        out = tmp_path / "report.jsonl"
        code = main(
            [
                "evaluate",
                "--dataset",
                str(dataset),
                "--ks",
                "1,2",
                "--ablations",
                "full,-expansion",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        full_rows = {r["k"]: r for r in rows if r["config"] == "full"}
        # both queries have their planted segment ranked first
        assert full_rows[1]["f"] == 100.0
        assert full_rows[1]["mrr"] == 1.0
        assert len({r["config"] for r in rows}) == 2
        assert "MRR" in capsys.readouterr().out

    def test_malformed_dataset_user_error(self, tmp_path, isolated_store, capsys):
        dataset = tmp_path / "bad.tsv"
        dataset.write_text("DocID\tQueryID\n", encoding="utf-8")
        assert main(["evaluate", "--dataset", str(dataset)]) == 1


class TestExpansionReportCommand:
    def test_report_runs(self, tmp_path, isolated_store, capsys):
        dataset = tmp_path / "privacyqa.tsv"
        dataset.write_text(PRIVACYQA_TSV + "\n", encoding="utf-8")
        out = tmp_path / "expansion.json"
        code = main(["expansion-report", "--dataset", str(dataset), "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["n_queries"] == 2
        assert "rule_one" in payload["per_method"]
        assert "%recovered" in capsys.readouterr().out


class TestTrainEmbeddings:
    def test_seeded_runs_identical(self, tmp_path, isolated_store):
        corpus = tmp_path / "corpus.txt"
        corpus.write_text(
            "\n".join(["alpha beta filler", "alpha beta words", "gamma delta other"] * 30),
            encoding="utf-8",
        )
        out_a = tmp_path / "a.txt"
        out_b = tmp_path / "b.txt"
        base = [
            "train-embeddings", "--corpus", str(corpus), "--dim", "8", "--epochs", "2",
            "--min-count", "2", "--seed", "11",
        ]
        assert main(base + ["--vectors-out", str(out_a)]) == 0
        assert main(base + ["--vectors-out", str(out_b)]) == 0
        assert out_a.read_text() == out_b.read_text()
        store = load_word2vec_text(out_a)
        assert store.dim == 8 and "alpha" in store

    def test_different_seed_differs(self, tmp_path, isolated_store):
        corpus = tmp_path / "corpus.txt"
        corpus.write_text("\n".join(["alpha beta filler"] * 40), encoding="utf-8")
        out_a = tmp_path / "a.txt"
        out_b = tmp_path / "b.txt"
        main(["train-embeddings", "--corpus", str(corpus), "--dim", "8", "--min-count", "2",
              "--seed", "1", "--vectors-out", str(out_a)])
        main(["train-embeddings", "--corpus", str(corpus), "--dim", "8", "--min-count", "2",
              "--seed", "2", "--vectors-out", str(out_b)])
        assert out_a.read_text() != out_b.read_text()


class TestFixturesCommand:
    def test_builds_conformance_files(self, tmp_path, isolated_store):
        context = "We retain your data for two years."
        records = [
            {
                "question": "how long is data kept?",
                "context": context,
                "answers": [{"text": "two years", "answer_start": context.index("two years")}],
            }
        ]
        dataset = tmp_path / "policyqa.json"
        dataset.write_text(json.dumps(records), encoding="utf-8")
        out_dir = tmp_path / "fixtures"
        code = main(
            ["fixtures", "--policyqa", str(dataset), "--fixtures-dir", str(out_dir)]
        )
        assert code == 0
        request = json.loads((out_dir / "relevance_request.json").read_text())
        assert request["pairs"][0]["question"] == "how long is data kept?"
        answers = json.loads((out_dir / "expected_answers.json").read_text())
        assert answers[0]["answer_text"] == "two years"
        assert (out_dir / "spans_request.json").exists()


class TestUsageErrors:
    def test_unknown_command(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 1

    def test_missing_required_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["answer", "--question", "q?"])
        assert exc.value.code == 1

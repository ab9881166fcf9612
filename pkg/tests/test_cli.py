import hashlib
import json

import pytest

from remask.cli import build_scorer, parse_config_file, run_command
from remask.sufficiency import ClassifierModel

from conftest import VACCINATION_RECORD, synthetic_corpus
from remask.corpus import save_dataset


@pytest.fixture
def dataset_path(tmp_path):
    path = tmp_path / "data.jsonl"
    save_dataset(synthetic_corpus(3), path)
    return path


@pytest.fixture
def vaccination_path(tmp_path):
    path = tmp_path / "vacc.json"
    path.write_text(json.dumps(VACCINATION_RECORD))
    return path


def train(tmp_path, dataset_path, kind="categorical", seed="7", name="m.bin", length="24"):
    out = tmp_path / name
    rc = run_command(
        ["train-denoiser", "--data", str(dataset_path), "--out", str(out),
         "--seed", seed, "--epochs", "4", "--length", length, "--model-kind", kind]
    )
    assert rc == 0
    return out


class TestExitCodes:
    def test_unknown_subcommand_is_usage_error(self, capsys):
        assert run_command(["frobnicate"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_no_subcommand_is_usage_error(self):
        assert run_command([]) == 1

    def test_unknown_flag_is_usage_error(self, dataset_path, tmp_path):
        rc = run_command(["train-denoiser", "--data", str(dataset_path),
                          "--out", str(tmp_path / "m.bin"), "--frob"])
        assert rc == 1

    def test_missing_file_is_runtime_error(self, tmp_path, capsys):
        rc = run_command(["train-denoiser", "--data", str(tmp_path / "absent.jsonl"),
                          "--out", str(tmp_path / "m.bin")])
        assert rc == 2
        assert "error:" in capsys.readouterr().err

    def test_help_exits_zero(self):
        assert run_command(["--help"]) == 0


class TestTrainDenoiser:
    def test_byte_identical_across_runs(self, tmp_path, dataset_path):
        first = train(tmp_path, dataset_path, name="a.bin")
        second = train(tmp_path, dataset_path, name="b.bin")
        assert first.read_bytes() == second.read_bytes()

    def test_summary_json_on_stdout(self, tmp_path, dataset_path, capsys):
        train(tmp_path, dataset_path)
        out = capsys.readouterr().out
        summary = json.loads(out.strip().splitlines()[-1])
        assert summary["kind"] == "categorical"
        assert summary["instances"] == 3

    def test_inputs_not_mutated(self, tmp_path, dataset_path):
        before = hashlib.sha256(dataset_path.read_bytes()).hexdigest()
        train(tmp_path, dataset_path)
        assert hashlib.sha256(dataset_path.read_bytes()).hexdigest() == before


class TestGenerate:
    def test_oracle_on_memorized_corpus_covers_both_claims(
        self, tmp_path, vaccination_path, capsys
    ):
        model = train(tmp_path, vaccination_path, kind="oracle", length="80")
        report_path = tmp_path / "report.json"
        rc = run_command(
            ["generate", "--model", str(model), "--input", str(vaccination_path),
             "--refine", "3", "--seed", "1", "--report", str(report_path)]
        )
        assert rc == 0
        captured = capsys.readouterr()
        assert "rotashield" in captured.out
        report = json.loads(report_path.read_text())
        assert report["results"][0]["coverage"] == 1.0

    def test_trace_report_and_out_written(self, tmp_path, dataset_path):
        model = train(tmp_path, dataset_path)
        paths = {name: tmp_path / name for name in ("s.jsonl", "t.jsonl", "r.json")}
        rc = run_command(
            ["generate", "--model", str(model), "--input", str(dataset_path),
             "--refine", "2", "--seed", "3", "--out", str(paths["s.jsonl"]),
             "--trace", str(paths["t.jsonl"]), "--report", str(paths["r.json"])]
        )
        assert rc == 0
        rows = [json.loads(line) for line in paths["s.jsonl"].read_text().splitlines()]
        assert [row["id"] for row in rows] == ["syn-000", "syn-001", "syn-002"]
        trace_rows = [json.loads(line) for line in paths["t.jsonl"].read_text().splitlines()]
        assert all("instance" in row for row in trace_rows)
        report = json.loads(paths["r.json"].read_text())
        assert report["config_echo"]["seed"] == 3
        assert report["config_echo"]["refine_iterations"] == 2

    def test_end_to_end_byte_identical(self, tmp_path, dataset_path):
        model = train(tmp_path, dataset_path)
        outputs = {}
        for tag in ("x", "y"):
            files = {name: tmp_path / f"{tag}-{name}" for name in ("s", "t", "r")}
            rc = run_command(
                ["generate", "--model", str(model), "--input", str(dataset_path),
                 "--refine", "3", "--seed", "11", "--out", str(files["s"]),
                 "--trace", str(files["t"]), "--report", str(files["r"])]
            )
            assert rc == 0
            outputs[tag] = {name: path.read_bytes() for name, path in files.items()}
        assert outputs["x"] == outputs["y"]

    def test_requires_model_or_endpoint(self, dataset_path):
        assert run_command(["generate", "--input", str(dataset_path)]) == 1

    def test_out_of_range_flag_is_usage_error(self, tmp_path, dataset_path):
        model = train(tmp_path, dataset_path)
        rc = run_command(["generate", "--model", str(model), "--input", str(dataset_path),
                          "--r", "1.5"])
        assert rc == 1


class TestConfigFile:
    def test_parse_rejects_garbage(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("just words\n")
        from remask.cli import UsageError

        with pytest.raises(UsageError):
            parse_config_file(path)

    def test_file_values_used_and_flags_win(self, tmp_path, dataset_path):
        model = train(tmp_path, dataset_path)
        cfg = tmp_path / "run.cfg"
        cfg.write_text("seed = 5\nr = 0.4  # fraction per iteration\n")
        report_path = tmp_path / "r.json"
        rc = run_command(
            ["generate", "--model", str(model), "--input", str(dataset_path),
             "--config", str(cfg), "--seed", "9", "--report", str(report_path)]
        )
        assert rc == 0
        echo = json.loads(report_path.read_text())["config_echo"]
        assert echo["r"] == 0.4  # from file
        assert echo["seed"] == 9  # flag wins


class TestScore:
    def test_profile_json_emitted(self, vaccination_path, capsys):
        rc = run_command(
            ["score", "--input", str(vaccination_path),
             "--summary", "rotashield was withdrawn ."]
        )
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["scorer"] == "heuristic"
        assert payload["scores"] == [1.0, 1.0, 1.0, 1.0]

    def test_summary_and_file_are_exclusive(self, vaccination_path, tmp_path):
        both = run_command(
            ["score", "--input", str(vaccination_path), "--summary", "x",
             "--summary-file", str(tmp_path / "s.txt")]
        )
        assert both == 1
        neither = run_command(["score", "--input", str(vaccination_path)])
        assert neither == 1


class TestTrainClassifier:
    def test_archive_written_and_loadable(self, tmp_path, dataset_path, capsys):
        out = tmp_path / "clf.bin"
        rc = run_command(
            ["train-classifier", "--data", str(dataset_path), "--out", str(out),
             "--seed", "2", "--epochs", "40", "--k-per-type", "2"]
        )
        assert rc == 0
        summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert summary["spans"] >= 20
        model = ClassifierModel.load(out)
        assert 0.0 < model.score("alpha0 beta0 can gamma0 delta0", "alpha0 beta0 is vital",
                                 ["gamma0 shows alpha0 beta0 works"]) < 1.0


class TestEvaluate:
    def make_summaries(self, tmp_path, dataset_path):
        instances = json.loads("[" + ",".join(dataset_path.read_text().splitlines()) + "]")
        path = tmp_path / "sums.jsonl"
        path.write_text(
            "\n".join(
                json.dumps({"id": rec["id"], "summary": rec["summary"]}) for rec in instances
            )
        )
        return path

    def test_table_and_json_report(self, tmp_path, dataset_path, capsys):
        summaries = self.make_summaries(tmp_path, dataset_path)
        out = tmp_path / "report.json"
        rc = run_command(["evaluate", "--data", str(dataset_path),
                          "--summaries", str(summaries), "--out", str(out)])
        assert rc == 0
        table = capsys.readouterr().out
        assert table.splitlines()[0].split() == [
            "id", "rouge_1", "rouge_2", "rouge_l", "coverage", "faithfulness", "conciseness"
        ]
        assert table.splitlines()[-1].startswith("mean")
        report = json.loads(out.read_text())
        assert report["means"]["rouge_l"] == 1.0

    def test_csv_mode(self, tmp_path, dataset_path, capsys):
        summaries = self.make_summaries(tmp_path, dataset_path)
        rc = run_command(["evaluate", "--data", str(dataset_path),
                          "--summaries", str(summaries), "--csv"])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "id,rouge_1,rouge_2,rouge_l,coverage,faithfulness,conciseness"

    def test_missing_summary_is_runtime_error(self, tmp_path, dataset_path):
        path = tmp_path / "partial.jsonl"
        path.write_text(json.dumps({"id": "syn-000", "summary": "x"}))
        rc = run_command(["evaluate", "--data", str(dataset_path), "--summaries", str(path)])
        assert rc == 2


class TestAblate:
    def test_iteration_axis_has_four_rows(self, tmp_path, dataset_path, capsys):
        model = train(tmp_path, dataset_path)
        capsys.readouterr()
        rc = run_command(
            ["ablate", "--data", str(dataset_path), "--model", str(model),
             "--iterations", "0,1,2,3", "--scorers", "heuristic", "--seed", "5"]
        )
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 5  # header + one row per iteration count
        assert all(len(line.split()) == 5 for line in lines)

    def test_scorer_axis_rows(self, tmp_path, dataset_path, capsys):
        model = train(tmp_path, dataset_path)
        clf = tmp_path / "clf.bin"
        rc = run_command(
            ["train-classifier", "--data", str(dataset_path), "--out", str(clf),
             "--seed", "2", "--epochs", "30"]
        )
        assert rc == 0
        capsys.readouterr()
        rc = run_command(
            ["ablate", "--data", str(dataset_path), "--model", str(model),
             "--iterations", "2", "--scorers", "none,heuristic,classifier,classifier+heuristic",
             "--classifier", str(clf), "--seed", "5"]
        )
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 5
        assert [line.split()[0] for line in lines[1:]] == [
            "none", "heuristic", "classifier", "classifier+heuristic"
        ]

    def test_empty_scorer_list_is_success(self, tmp_path, dataset_path, capsys):
        model = train(tmp_path, dataset_path)
        capsys.readouterr()
        rc = run_command(
            ["ablate", "--data", str(dataset_path), "--model", str(model),
             "--iterations", "0,1", "--scorers", ""]
        )
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 1  # header only


class TestUncommonPaths:
    def test_sentence_granularity_generate(self, tmp_path, dataset_path):
        model = train(tmp_path, dataset_path)
        report_path = tmp_path / "r.json"
        rc = run_command(
            ["generate", "--model", str(model), "--input", str(dataset_path),
             "--refine", "2", "--granularity", "sentence", "--seed", "8",
             "--report", str(report_path)]
        )
        assert rc == 0
        assert json.loads(report_path.read_text())["config_echo"]["granularity"] == "sentence"

    def test_score_from_summary_file(self, vaccination_path, tmp_path, capsys):
        summary_file = tmp_path / "summary.txt"
        summary_file.write_text("rotashield was withdrawn .\n")
        rc = run_command(["score", "--input", str(vaccination_path),
                          "--summary-file", str(summary_file)])
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["scores"] == [1.0] * 4

    def test_denoiser_endpoint_requires_vocab(self, dataset_path):
        rc = run_command(["generate", "--input", str(dataset_path),
                          "--denoiser-endpoint", "http://fake/fill"])
        assert rc == 1

    def test_config_file_boolean(self, tmp_path, dataset_path, capsys):
        cfg = tmp_path / "train.cfg"
        cfg.write_text("gradient_refine = true\nepochs = 2\n")
        out = tmp_path / "m.bin"
        rc = run_command(["train-denoiser", "--data", str(dataset_path),
                          "--out", str(out), "--config", str(cfg), "--seed", "1",
                          "--length", "24"])
        assert rc == 0
        summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert summary["config_echo"]["gradient_refine"] is True
        assert summary["config_echo"]["epochs"] == 2

    def test_evaluate_with_external_command(self, tmp_path, dataset_path, capsys):
        import sys as _sys

        summaries = TestEvaluate().make_summaries(tmp_path, dataset_path)
        out = tmp_path / "report.json"
        cmd = f"{_sys.executable} -c \"import sys; sys.stdin.read(); print(0.25)\""
        rc = run_command(["evaluate", "--data", str(dataset_path),
                          "--summaries", str(summaries),
                          "--external-cmd", f"stub={cmd}", "--out", str(out)])
        assert rc == 0
        report = json.loads(out.read_text())
        assert report["external_scores"] == {"stub": 0.25}


class TestBuildScorer:
    def test_unknown_scorer(self):
        from remask.cli import UsageError

        with pytest.raises(UsageError):
            build_scorer("mystery")

    def test_classifier_requires_path(self):
        from remask.cli import UsageError

        with pytest.raises(UsageError, match="--classifier"):
            build_scorer("classifier")

    def test_cot_requires_endpoint_env(self):
        from remask.errors import SufficiencyError

        with pytest.raises(SufficiencyError, match="REMASK_LLM_ENDPOINT"):
            build_scorer("cot", environ={})

import json

import pytest

from metrics_fixture import fixture_records, fixture_tagged
from exsearch.analytics import REPORT_FILES
from exsearch.cli import main
from exsearch.logs import write_records
from exsearch.tagger import write_tagged

FAST = ["--set", "train.max_iterations=30", "--workers", "1", "-q"]


@pytest.fixture(autouse=True)
def _no_env_output(monkeypatch):
    monkeypatch.delenv("EXSEARCH_OUTPUT_DIR", raising=False)


@pytest.fixture(scope="module")
def logs(tmp_path_factory):
    d = tmp_path_factory.mktemp("logs")
    assert main(["synth", str(d), "--records", "3000", "--seed", "5"]) == 0
    return d / "train_logs.jsonl", d / "analysis_logs.jsonl"


def _pipeline(out, logs):
    return main(["pipeline", "-o", str(out), "--training-input", str(logs[0]),
                 "--analysis-input", str(logs[1]), "--seed", "3", *FAST])


def test_tag_without_model_exits_1(tmp_path, logs, capsys):
    rc = main(["tag", "-o", str(tmp_path / "out"), "--analysis-input", str(logs[1]), "-q"])
    assert rc == 1
    assert "model" in capsys.readouterr().err


def test_missing_required_input_exits_1(tmp_path, capsys):
    assert main(["filter", "-o", str(tmp_path), "-q"]) == 1
    assert "training" in capsys.readouterr().err


def test_malformed_config_lists_every_problem(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(
        "[train]\nl1 = -1\n\n[metrics]\nmin_sessions = 0\n\n"
        "[inputs]\nformat = \"xml\"\ntraining = \"missing.jsonl\"\n"
    )
    assert main(["filter", "-c", str(cfg), "-o", str(tmp_path / "o"), "-q"]) == 1
    err = capsys.readouterr().err
    for needle in ("[train]", "[metrics]", "format", "missing.jsonl"):
        assert needle in err
    assert err.count("config error:") == 4


def test_unparseable_config_exits_1(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[train\n")
    assert main(["filter", "-c", str(cfg), "-q"]) == 1
    assert main(["filter", "-c", str(tmp_path / "nope.toml"), "-q"]) == 1
    assert main(["filter", "--set", "bogus", "-q"]) == 1


def test_analyze_fixture_emits_reports(tmp_path):
    out = tmp_path / "out"
    out.mkdir()
    write_records(fixture_records(), out / "analysis_filtered.jsonl")
    write_tagged(fixture_tagged(), out / "tagged.jsonl")
    assert main(["analyze", "-o", str(out), "-q"]) == 0
    for name in REPORT_FILES:
        assert (out / "reports" / f"{name}.csv").exists()
    assert (out / "reports" / "domains.csv").read_text().splitlines()[1] == "1,stackoverflow.com,12"
    assert main(["report", "-o", str(out), "-q"]) == 0
    bundle = json.loads((out / "report.json").read_text())
    assert set(bundle) >= set(REPORT_FILES)
    manifest = json.loads((out / "manifest.json").read_text())
    assert "reports/popularity.csv" in manifest and "analyze.config.json" in manifest


def test_output_dir_precedence(tmp_path, monkeypatch):
    from exsearch.config import load_config

    monkeypatch.setenv("EXSEARCH_OUTPUT_DIR", str(tmp_path / "env"))
    cfg_file = tmp_path / "c.toml"
    cfg_file.write_text('output_dir = "from_file"\nseed = 4\n')
    assert load_config(cfg_file).out == tmp_path / "env"
    assert load_config(cfg_file, sets=["output_dir=\"s\""]).output_dir == "s"
    assert load_config(cfg_file, {"output_dir": "/flag"}, ["output_dir=\"s\""]).output_dir == "/flag"
    assert load_config(cfg_file, sets=["train.l1=0.5"]).train_config().l1 == 0.5


def test_pipeline_is_deterministic(tmp_path, logs):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _pipeline(a, logs) == 0
    assert _pipeline(b, logs) == 0
    for rel in ["model.crf", "corpus.jsonl", "tagged.jsonl", "report.json",
                *(f"reports/{n}.csv" for n in REPORT_FILES)]:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel
    ev = json.loads((a / "evaluation.json").read_text())
    assert ev["classes"]["macro"]["f1"] >= 0.9


def test_train_twice_same_checksum(tmp_path, logs):
    out = tmp_path / "o"
    args = ["-o", str(out), "--training-input", str(logs[0]), *FAST]
    for stage in ("filter", "weak-label", "build-corpus", "train"):
        assert main([stage, *args]) == 0
    first = json.loads((out / "model.crf").read_text())["checksum"]
    assert main(["train", *args]) == 0
    assert json.loads((out / "model.crf").read_text())["checksum"] == first

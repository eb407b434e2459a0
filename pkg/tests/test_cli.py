import json
from pathlib import Path

import pytest

from sgp.cli import main
from sgp import SynthConfig, snapshot_to_dict, synth_corpus, write_jsonl


@pytest.fixture()
def corpus(tmp_path):
    path = tmp_path / "snapshots.jsonl"
    write_jsonl(synth_corpus(SynthConfig(seed=3), 8), path)
    return path


def tree_bytes(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()
    }


def test_validate_ok(corpus, capsys):
    assert main(["validate", "--in", str(corpus)]) == 0
    assert "8 ok" in capsys.readouterr().out


def test_validate_reports_line_numbers(tmp_path, capsys):
    path = tmp_path / "bad.jsonl"
    good = '{"frame_id": "f1", "command": "Go.", "ego": {"id": "ego", "class": "ego", "x": 0, "y": 0, "yaw": 0}, "actors": [], "objects": [], "lanes": [{"id": "lane_1", "road_id": "road_9", "centerline": [[0, 0], [1, 0]], "width": 3.5, "successors": []}], "roads": [{"id": "road_1"}], "junctions": []}'
    path.write_text(good + "\n")
    assert main(["validate", "--in", str(path)]) == 1
    err = capsys.readouterr().err
    assert "line 1" in err and "road_9" in err


def test_validate_empty_file(tmp_path, capsys):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    assert main(["validate", "--in", str(path)]) == 1
    assert "no records" in capsys.readouterr().err


def test_validate_missing_file_is_io_error(tmp_path):
    assert main(["validate", "--in", str(tmp_path / "nope.jsonl")]) == 3


def test_build_writes_files_and_manifest(corpus, tmp_path):
    out = tmp_path / "out"
    assert (
        main(
            [
                "build",
                "--in",
                str(corpus),
                "--abstraction",
                "actor_only",
                "--format",
                "text",
                "--out",
                str(out),
            ]
        )
        == 0
    )
    manifest = (out / "manifest.txt").read_text().splitlines()
    assert len(manifest) == 8
    assert manifest[0] == "frame_000000.actor_only.txt"
    assert (out / manifest[0]).exists()


def test_build_rerun_is_byte_identical(corpus, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["build", "--in", str(corpus), "--format", "yaml", "--out", str(out)]) == 0
    assert tree_bytes(out1) == tree_bytes(out2)


def test_build_jobs_do_not_change_bytes(corpus, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["build", "--in", str(corpus), "--out", str(out1), "--jobs", "1"]) == 0
    assert main(["build", "--in", str(corpus), "--out", str(out2), "--jobs", "8"]) == 0
    assert tree_bytes(out1) == tree_bytes(out2)


def test_prompt_v3_fence(corpus, tmp_path):
    out = tmp_path / "prompts"
    assert (
        main(
            [
                "prompt",
                "--in",
                str(corpus),
                "--template",
                "v3",
                "--format",
                "json",
                "--abstraction",
                "actor_only",
                "--out",
                str(out),
            ]
        )
        == 0
    )
    prompt = (out / "frame_000000.prompt.txt").read_text()
    assert "```json\n" in prompt


def test_prompt_no_graph(corpus, tmp_path):
    out = tmp_path / "prompts"
    assert (
        main(["prompt", "--in", str(corpus), "--template", "v2", "--no-graph", "--out", str(out)])
        == 0
    )
    prompt = (out / "frame_000000.prompt.txt").read_text()
    assert "Scene Graph" not in prompt
    assert "### Navigation Command" in prompt


def test_prompt_without_template_is_usage_error(corpus, tmp_path, capsys):
    assert main(["prompt", "--in", str(corpus), "--out", str(tmp_path / "p")]) == 2
    assert "template" in capsys.readouterr().err


def test_stats_writes_grid(corpus, tmp_path):
    report = tmp_path / "report.csv"
    assert main(["stats", "--in", str(corpus), "--out", str(report)]) == 0
    lines = report.read_text().strip().splitlines()
    assert len(lines) == 10
    stats_json = json.loads((tmp_path / "report.stats.json").read_text())
    assert len(stats_json["cells"]) == 9


def test_stats_unknown_tokenizer_usage_error(corpus, tmp_path, capsys):
    code = main(
        ["stats", "--in", str(corpus), "--tokenizer", "nope", "--out", str(tmp_path / "r.csv")]
    )
    assert code == 2
    assert "unknown tokenizer" in capsys.readouterr().err


def test_synth_deterministic_and_valid(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert main(["synth", "--seed", "1", "--n", "5", "--out", str(a)]) == 0
    assert main(["synth", "--seed", "1", "--n", "5", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert main(["validate", "--in", str(a)]) == 0


def test_synth_zero_is_usage_error(tmp_path):
    assert main(["synth", "--seed", "1", "--n", "0", "--out", str(tmp_path / "x.jsonl")]) == 2


def test_unknown_subcommand_is_usage_error(capsys):
    assert main(["frobnicate"]) == 2
    capsys.readouterr()


def test_config_file_and_env(corpus, tmp_path, monkeypatch):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"format": "yaml", "abstraction": "road_level"}))
    out1 = tmp_path / "via-flag"
    assert main(["build", "--in", str(corpus), "--config", str(config), "--out", str(out1)]) == 0
    names = (out1 / "manifest.txt").read_text().splitlines()
    assert names[0].endswith(".road_level.yaml")

    monkeypatch.setenv("SGP_CONFIG", str(config))
    out2 = tmp_path / "via-env"
    assert main(["build", "--in", str(corpus), "--out", str(out2)]) == 0
    assert (out2 / "manifest.txt").read_text() == (out1 / "manifest.txt").read_text()

    # explicit flags beat the config file
    out3 = tmp_path / "override"
    assert main(["build", "--in", str(corpus), "--format", "text", "--out", str(out3)]) == 0
    assert (out3 / "manifest.txt").read_text().splitlines()[0].endswith(".road_level.txt")


def test_bad_config_keys_are_usage_errors(corpus, tmp_path, capsys):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"formats": "yaml"}))
    code = main(["build", "--in", str(corpus), "--config", str(config), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "unknown config keys" in capsys.readouterr().err


def test_build_isolates_bad_records(tmp_path, capsys):
    good = synth_corpus(SynthConfig(seed=4), 2)
    path = tmp_path / "mixed.jsonl"
    lines = [json.dumps(snapshot_to_dict(s)) for s in good]
    lines.insert(1, '{"frame_id": "broken"}')
    path.write_text("\n".join(lines) + "\n")
    out = tmp_path / "out"
    assert main(["build", "--in", str(path), "--out", str(out)]) == 1
    manifest = (out / "manifest.txt").read_text().splitlines()
    assert len(manifest) == 2  # both good records still serialized
    assert "line 2" in capsys.readouterr().err

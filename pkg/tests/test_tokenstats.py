import pytest

from sgp import (
    Abstraction,
    Format,
    SynthConfig,
    TokenStatsError,
    body_digest,
    corpus_stats,
    count_tokens,
    external_token_counts,
    serialize_corpus,
    stats_to_csv,
    stats_to_json,
    synth_corpus,
)
from sgp.tokenstats import approximate_token_count


def test_default_tokenizer_examples():
    assert count_tokens("") == 0
    # pieces: car, _, 1, near, ego -> one token each
    assert count_tokens("car_1 near ego") == 5


def test_default_tokenizer_long_runs():
    assert approximate_token_count("abcd") == 1
    assert approximate_token_count("abcde") == 2
    assert approximate_token_count("{}[]") == 4
    assert approximate_token_count("a b\tc\nd") == 4


def test_counting_is_deterministic():
    body = "lane_1 is in road_1 | car_1 near, direct front ego"
    assert count_tokens(body) == count_tokens(body)


def test_unknown_tokenizer_rejected():
    with pytest.raises(TokenStatsError):
        count_tokens("x", tokenizer="llava")


def test_single_scene_stats_degenerate():
    scenes = synth_corpus(SynthConfig(seed=5, n_actors=(0, 0)), 1)
    stats = corpus_stats(scenes)
    for cell in stats.cells.values():
        assert cell.n == 1
        assert cell.min == cell.max == cell.mean == cell.p50 == cell.p99


def test_stats_ordering_small_corpus():
    scenes = synth_corpus(SynthConfig(seed=6), 40)
    stats = corpus_stats(scenes)
    for fmt in Format:
        assert (
            stats.cells[(Abstraction.ACTOR_ONLY, fmt)].mean
            < stats.cells[(Abstraction.ROAD_LEVEL, fmt)].mean
            < stats.cells[(Abstraction.FULL, fmt)].mean
        )
    for abstraction in Abstraction:
        assert (
            stats.cells[(abstraction, Format.TEXT)].mean
            < stats.cells[(abstraction, Format.YAML)].mean
            < stats.cells[(abstraction, Format.JSON)].mean
        )


def test_stats_percentiles_are_ordered():
    scenes = synth_corpus(SynthConfig(seed=7), 25)
    for cell in corpus_stats(scenes).cells.values():
        assert cell.min <= cell.p50 <= cell.p99 <= cell.max


def test_stats_permutation_invariant():
    scenes = synth_corpus(SynthConfig(seed=8), 20)
    forward = corpus_stats(scenes)
    backward = corpus_stats(list(reversed(scenes)))
    assert forward.cells == backward.cells


def test_external_counts_full_file(tmp_path):
    scenes = synth_corpus(SynthConfig(seed=9), 5)
    bodies = serialize_corpus(scenes)
    lines = ["# tokenizer: offline-model"]
    for serialized in bodies.values():
        for entry in serialized:
            lines.append(f"{body_digest(entry.body)} {count_tokens(entry.body)}")
    counts_file = tmp_path / "counts.txt"
    counts_file.write_text("\n".join(lines) + "\n")
    stats = external_token_counts(bodies, counts_file)
    assert stats.tokenizer == "offline-model"
    assert stats.cells == corpus_stats(scenes).cells


def test_external_counts_missing_digest_names_frame(tmp_path):
    scenes = synth_corpus(SynthConfig(seed=9), 2)
    bodies = serialize_corpus(scenes)
    entries = [e for serialized in bodies.values() for e in serialized]
    skipped = entries[-1]
    lines = [
        f"{body_digest(e.body)} {count_tokens(e.body)}"
        for e in entries
        if e is not skipped
    ]
    counts_file = tmp_path / "counts.txt"
    counts_file.write_text("\n".join(lines) + "\n")
    with pytest.raises(TokenStatsError, match=skipped.source_frame):
        external_token_counts(bodies, counts_file)


def test_csv_report_shape():
    scenes = synth_corpus(SynthConfig(seed=10), 3)
    report = stats_to_csv(corpus_stats(scenes))
    lines = report.strip().split("\n")
    assert lines[0] == "abstraction,format,n,mean,min,p50,p99,max"
    assert len(lines) == 10
    assert lines[1].startswith("full,text,3,")


def test_json_report_mirrors_cells():
    import json

    scenes = synth_corpus(SynthConfig(seed=10), 3)
    stats = corpus_stats(scenes)
    payload = json.loads(stats_to_json(stats))
    assert payload["tokenizer"] == "default"
    assert payload["digest_algorithm"] == "sha256"
    assert len(payload["cells"]) == 9
    assert {c["abstraction"] for c in payload["cells"]} == {
        "full",
        "road_level",
        "actor_only",
    }

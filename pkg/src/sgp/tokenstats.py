"""Token counting and corpus-level statistics per (abstraction, format).

The built-in tokenizer is a documented approximation: alphanumeric runs
cost ceil(len/4) tokens, every other non-whitespace character costs one.
Exact counts from a real model tokenizer can be supplied out-of-band via a
digest-keyed counts file and aggregated with ``external_token_counts``.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .abstraction import to_actor_only, to_road_level
from .extraction import DEFAULT_CONFIG, ExtractionConfig, build_graph
from .graph import Abstraction
from .serialization import Format, SerializedGraph, serialize
from .snapshot import SceneSnapshot

DIGEST_ALGORITHM = "sha256"

ABSTRACTION_ORDER = (Abstraction.FULL, Abstraction.ROAD_LEVEL, Abstraction.ACTOR_ONLY)
FORMAT_ORDER = (Format.TEXT, Format.JSON, Format.YAML)


class TokenStatsError(Exception):
    """Unknown tokenizer, missing digest, or unusable counts file."""


_PIECE = re.compile(r"[0-9A-Za-z]+|[^\s0-9A-Za-z]")


def approximate_token_count(body: str) -> int:
    """Default tokenizer: ceil(len/4) per alphanumeric run, 1 per other character."""
    total = 0
    for piece in _PIECE.findall(body):
        if piece[0].isalnum():
            total += -(-len(piece) // 4)
        else:
            total += 1
    return total


_TOKENIZERS: dict[str, Callable[[str], int]] = {"default": approximate_token_count}


def register_tokenizer(name: str, count: Callable[[str], int]) -> None:
    _TOKENIZERS[name] = count


def count_tokens(body: str, tokenizer: str = "default") -> int:
    try:
        count = _TOKENIZERS[tokenizer]
    except KeyError:
        raise TokenStatsError(f"unknown tokenizer {tokenizer!r}") from None
    return count(body)


def known_tokenizers() -> tuple[str, ...]:
    return tuple(sorted(_TOKENIZERS))


@dataclass(frozen=True)
class CellStats:
    """Aggregates for one (abstraction, format) cell."""

    n: int
    mean: float
    min: int
    p50: float
    p99: float
    max: int


@dataclass(frozen=True)
class CorpusStats:
    tokenizer: str
    n_scenes: int
    cells: Mapping[tuple[Abstraction, Format], CellStats]


def _aggregate(counts: Sequence[int]) -> CellStats:
    if not counts:
        raise TokenStatsError("cannot aggregate an empty count list")
    data = np.asarray(counts, dtype=float)
    return CellStats(
        n=len(counts),
        mean=float(data.mean()),
        min=int(data.min()),
        p50=float(np.percentile(data, 50)),
        p99=float(np.percentile(data, 99)),
        max=int(data.max()),
    )


def serialize_corpus(
    scenes: Sequence[SceneSnapshot],
    config: ExtractionConfig = DEFAULT_CONFIG,
) -> dict[tuple[Abstraction, Format], list[SerializedGraph]]:
    """Run build -> abstract -> serialize for every scene and every cell."""
    bodies: dict[tuple[Abstraction, Format], list[SerializedGraph]] = {
        (abstraction, fmt): []
        for abstraction in ABSTRACTION_ORDER
        for fmt in FORMAT_ORDER
    }
    for scene in scenes:
        full = build_graph(scene, config)
        graphs = {
            Abstraction.FULL: full,
            Abstraction.ROAD_LEVEL: to_road_level(full),
            Abstraction.ACTOR_ONLY: to_actor_only(full),
        }
        for abstraction in ABSTRACTION_ORDER:
            for fmt in FORMAT_ORDER:
                bodies[(abstraction, fmt)].append(serialize(graphs[abstraction], fmt))
    return bodies


def stats_from_bodies(
    bodies: Mapping[tuple[Abstraction, Format], Sequence[SerializedGraph]],
    tokenizer: str = "default",
) -> CorpusStats:
    """Aggregate already-serialized bodies under a registered tokenizer."""
    count = _TOKENIZERS.get(tokenizer)
    if count is None:
        raise TokenStatsError(f"unknown tokenizer {tokenizer!r}")
    if not bodies or not all(bodies.values()):
        raise TokenStatsError("corpus must contain at least one scene")
    cells = {
        cell: _aggregate([count(s.body) for s in serialized])
        for cell, serialized in bodies.items()
    }
    n_scenes = max(len(serialized) for serialized in bodies.values())
    return CorpusStats(tokenizer=tokenizer, n_scenes=n_scenes, cells=cells)


def corpus_stats(
    scenes: Sequence[SceneSnapshot],
    config: ExtractionConfig = DEFAULT_CONFIG,
    tokenizer: str = "default",
) -> CorpusStats:
    """Token statistics of the serialized graph bodies (no prompt scaffolding)."""
    if not scenes:
        raise TokenStatsError("corpus must contain at least one scene")
    return stats_from_bodies(serialize_corpus(scenes, config), tokenizer)


def body_digest(body: str) -> str:
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


def read_counts_file(path: str | Path) -> tuple[str, dict[str, int]]:
    """Counts file: '<hex digest> <count>' per line; optional '# tokenizer: NAME' header."""
    tokenizer = "external"
    counts: dict[str, int] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            comment = line.lstrip("#").strip()
            if comment.startswith("tokenizer:"):
                tokenizer = comment.split(":", 1)[1].strip()
            continue
        parts = line.split()
        if len(parts) != 2 or not parts[1].isdigit():
            raise TokenStatsError(f"counts file line {line_no}: expected '<digest> <count>'")
        counts[parts[0]] = int(parts[1])
    return tokenizer, counts


def external_token_counts(
    bodies: Mapping[tuple[Abstraction, Format], Iterable[SerializedGraph]],
    counts_path: str | Path,
) -> CorpusStats:
    """Aggregate counts produced by an external tokenizer run, keyed by body digest."""
    tokenizer, counts = read_counts_file(counts_path)
    cells = {}
    n_scenes = 0
    for cell, serialized in bodies.items():
        cell_counts = []
        for entry in serialized:
            digest = body_digest(entry.body)
            if digest not in counts:
                raise TokenStatsError(
                    f"counts file has no entry for frame {entry.source_frame!r} "
                    f"({cell[0].value}/{cell[1].value}, digest {digest})"
                )
            cell_counts.append(counts[digest])
        cells[cell] = _aggregate(cell_counts)
        n_scenes = max(n_scenes, len(cell_counts))
    if not cells:
        raise TokenStatsError("no bodies to aggregate")
    return CorpusStats(tokenizer=tokenizer, n_scenes=n_scenes, cells=cells)


def stats_to_csv(stats: CorpusStats) -> str:
    """CSV report, one row per (abstraction, format) cell."""
    lines = ["abstraction,format,n,mean,min,p50,p99,max"]
    for abstraction in ABSTRACTION_ORDER:
        for fmt in FORMAT_ORDER:
            cell = stats.cells.get((abstraction, fmt))
            if cell is None:
                continue
            lines.append(
                f"{abstraction.value},{fmt.value},{cell.n},{cell.mean:.2f},"
                f"{cell.min},{cell.p50:.2f},{cell.p99:.2f},{cell.max}"
            )
    return "\n".join(lines) + "\n"


def stats_to_json(stats: CorpusStats) -> str:
    """Structured report mirroring CorpusStats (digest algorithm in the header)."""
    payload = {
        "tokenizer": stats.tokenizer,
        "digest_algorithm": DIGEST_ALGORITHM,
        "n_scenes": stats.n_scenes,
        "cells": [
            {
                "abstraction": abstraction.value,
                "format": fmt.value,
                "n": cell.n,
                "mean": round(cell.mean, 4),
                "min": cell.min,
                "p50": round(cell.p50, 4),
                "p99": round(cell.p99, 4),
                "max": cell.max,
            }
            for abstraction in ABSTRACTION_ORDER
            for fmt in FORMAT_ORDER
            for cell in [stats.cells.get((abstraction, fmt))]
            if cell is not None
        ],
    }
    return json.dumps(payload, indent=2) + "\n"

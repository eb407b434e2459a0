"""Command-line harness: validate, build, prompt, stats, synth.

Records are processed independently (optionally in parallel with --jobs),
outputs are written strictly in input order, and identical inputs always
produce byte-identical output trees. Exit codes: 0 ok, 1 data error,
2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .abstraction import AbstractionError, abstract, to_actor_only, to_road_level
from .extraction import DEFAULT_CONFIG, ExtractionConfig, ExtractionError, build_graph
from .graph import Abstraction, GraphError
from .prompting import PromptError, Template, load_override, render, render_without_graph
from .serialization import Format, SerializationError, serialize
from .snapshot import SceneSnapshot, scan_jsonl, write_jsonl
from .synth import SynthConfig, synth_corpus
from .tokenstats import (
    ABSTRACTION_ORDER,
    FORMAT_ORDER,
    TokenStatsError,
    known_tokenizers,
    stats_from_bodies,
    stats_to_csv,
    stats_to_json,
)

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2
EXIT_IO = 3

CONFIG_ENV_VAR = "SGP_CONFIG"

_PIPELINE_ERRORS = (
    ExtractionError,
    AbstractionError,
    GraphError,
    SerializationError,
    PromptError,
    TokenStatsError,
)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    extraction: ExtractionConfig = DEFAULT_CONFIG
    abstraction: Abstraction = Abstraction.FULL
    format: Format = Format.TEXT
    template: str = "none"  # v1 | v2 | v3 | none
    tokenizer: str = "default"
    template_override: str | None = None


def _config_from_dict(payload: dict) -> PipelineConfig:
    if not isinstance(payload, dict):
        raise UsageError("config file must hold a JSON object")
    known = {"extraction", "abstraction", "format", "template", "tokenizer", "template_override"}
    unknown = set(payload) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    extraction = DEFAULT_CONFIG
    if "extraction" in payload:
        entry = payload["extraction"]
        if not isinstance(entry, dict):
            raise UsageError("config 'extraction' must be an object")
        fields = {f.name for f in dataclasses.fields(ExtractionConfig)}
        bad = set(entry) - fields
        if bad:
            raise UsageError(f"unknown extraction keys: {', '.join(sorted(bad))}")
        try:
            extraction = ExtractionConfig(**entry)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad extraction config: {exc}") from None
    try:
        return PipelineConfig(
            extraction=extraction,
            abstraction=Abstraction(payload.get("abstraction", "full")),
            format=Format(payload.get("format", "text")),
            template=str(payload.get("template", "none")),
            tokenizer=str(payload.get("tokenizer", "default")),
            template_override=payload.get("template_override"),
        )
    except ValueError as exc:
        raise UsageError(f"bad config value: {exc}") from None


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    config = PipelineConfig()
    if path:
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {path} is not valid JSON: {exc.msg}") from None
        config = _config_from_dict(payload)
    # explicit flags override file values
    if getattr(args, "abstraction", None):
        config = dataclasses.replace(config, abstraction=Abstraction(args.abstraction))
    if getattr(args, "format", None):
        config = dataclasses.replace(config, format=Format(args.format))
    if getattr(args, "template", None):
        config = dataclasses.replace(config, template=args.template)
    if getattr(args, "tokenizer", None):
        config = dataclasses.replace(config, tokenizer=args.tokenizer)
    if getattr(args, "template_override", None):
        config = dataclasses.replace(config, template_override=args.template_override)
    return config


def _error(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _say(args: argparse.Namespace, message: str) -> None:
    if not getattr(args, "quiet", False):
        print(message)


def _read_records(path: str) -> list[tuple[int, SceneSnapshot | None, str | None]]:
    return list(scan_jsonl(path))


def _map_records(
    records: Sequence,
    worker: Callable,
    jobs: int,
) -> list:
    if jobs <= 1:
        return [worker(record) for record in records]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, records))


def _cmd_validate(args: argparse.Namespace) -> int:
    records = _read_records(args.input)
    if not records:
        _error("no records")
        return EXIT_DATA
    bad = 0
    for line_no, _, problem in records:
        if problem is not None:
            bad += 1
            _error(f"line {line_no}: {problem}")
    if bad:
        _say(args, f"{len(records) - bad} ok, {bad} bad")
        return EXIT_DATA
    _say(args, f"{len(records)} ok")
    return EXIT_OK


def _cmd_build(args: argparse.Namespace) -> int:
    config = _load_config(args)
    records = _read_records(args.input)
    if not records:
        _error("no records")
        return EXIT_DATA
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def worker(record):
        line_no, snapshot, problem = record
        if problem is not None:
            return line_no, None, None, problem
        try:
            graph = abstract(build_graph(snapshot, config.extraction), config.abstraction)
            serialized = serialize(graph, config.format)
        except _PIPELINE_ERRORS as exc:
            return line_no, snapshot.frame_id, None, str(exc)
        name = f"{snapshot.frame_id}.{config.abstraction.value}.{config.format.extension}"
        return line_no, snapshot.frame_id, (name, serialized.body), None

    results = _map_records(records, worker, args.jobs)
    manifest = []
    failures = 0
    for line_no, frame_id, output, problem in results:
        if problem is not None:
            failures += 1
            where = f"frame {frame_id}" if frame_id else f"line {line_no}"
            _error(f"{where}: {problem}")
            continue
        name, body = output
        (out_dir / name).write_text(body, encoding="utf-8")
        manifest.append(name)
    (out_dir / "manifest.txt").write_text(
        "".join(name + "\n" for name in manifest), encoding="utf-8"
    )
    _say(args, f"wrote {len(manifest)} files to {out_dir}")
    return EXIT_DATA if failures else EXIT_OK


def _cmd_prompt(args: argparse.Namespace) -> int:
    config = _load_config(args)
    if config.template == "none":
        _error("prompt emission disabled: template is 'none' (pass --template v1|v2|v3)")
        return EXIT_USAGE
    template = Template(config.template)
    override = None
    if config.template_override:
        override = load_override(config.template_override)
    records = _read_records(args.input)
    if not records:
        _error("no records")
        return EXIT_DATA

    def worker(record):
        line_no, snapshot, problem = record
        if problem is not None:
            return line_no, None, None, problem
        try:
            if args.no_graph:
                bundle = render_without_graph(template, snapshot.command)
            else:
                graph = abstract(
                    build_graph(snapshot, config.extraction), config.abstraction
                )
                serialized = serialize(graph, config.format)
                bundle = render(
                    template,
                    snapshot.command,
                    serialized.body,
                    format_tag=config.format.value,
                    override=override,
                )
        except _PIPELINE_ERRORS as exc:
            return line_no, snapshot.frame_id, None, str(exc)
        return line_no, snapshot.frame_id, bundle.rendered, None

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = _map_records(records, worker, args.jobs)
    failures = 0
    written = 0
    for line_no, frame_id, rendered, problem in results:
        if problem is not None:
            failures += 1
            where = f"frame {frame_id}" if frame_id else f"line {line_no}"
            _error(f"{where}: {problem}")
            continue
        (out_dir / f"{frame_id}.prompt.txt").write_text(rendered, encoding="utf-8")
        written += 1
    _say(args, f"wrote {written} prompts to {out_dir}")
    return EXIT_DATA if failures else EXIT_OK


def _cmd_stats(args: argparse.Namespace) -> int:
    config = _load_config(args)
    if config.tokenizer not in known_tokenizers():
        _error(f"unknown tokenizer {config.tokenizer!r} (known: {', '.join(known_tokenizers())})")
        return EXIT_USAGE
    records = _read_records(args.input)
    if not records:
        _error("no records")
        return EXIT_DATA
    for line_no, _, problem in records:
        if problem is not None:
            _error(f"line {line_no}: {problem}")
            return EXIT_DATA

    def worker(record):
        _, snapshot, _ = record
        full = build_graph(snapshot, config.extraction)
        graphs = {
            Abstraction.FULL: full,
            Abstraction.ROAD_LEVEL: to_road_level(full),
            Abstraction.ACTOR_ONLY: to_actor_only(full),
        }
        return {
            (abstraction, fmt): serialize(graphs[abstraction], fmt)
            for abstraction in ABSTRACTION_ORDER
            for fmt in FORMAT_ORDER
        }

    try:
        per_scene = _map_records(records, worker, args.jobs)
    except _PIPELINE_ERRORS as exc:
        _error(str(exc))
        return EXIT_DATA
    bodies = {
        (abstraction, fmt): [scene[(abstraction, fmt)] for scene in per_scene]
        for abstraction in ABSTRACTION_ORDER
        for fmt in FORMAT_ORDER
    }
    stats = stats_from_bodies(bodies, config.tokenizer)

    out_path = Path(args.out)
    json_path = (
        out_path.with_name(out_path.name[: -len(".csv")] + ".stats.json")
        if out_path.name.endswith(".csv")
        else out_path.with_name(out_path.name + ".stats.json")
    )
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(stats_to_csv(stats), encoding="utf-8")
    json_path.write_text(stats_to_json(stats), encoding="utf-8")
    _say(args, f"wrote {out_path} and {json_path}")
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    if args.n < 1:
        _error("--n must be at least 1")
        return EXIT_USAGE
    scenes = synth_corpus(SynthConfig(seed=args.seed), args.n)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_jsonl(scenes, out_path)
    _say(args, f"wrote {len(scenes)} snapshots to {out_path}")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser, jobs: bool = True) -> None:
    parser.add_argument("--config", help=f"pipeline config JSON (default: ${CONFIG_ENV_VAR})")
    parser.add_argument("--quiet", action="store_true", help="suppress non-error output")
    if jobs:
        parser.add_argument("--jobs", type=int, default=1, help="parallel record workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgp",
        description="Traffic scene graph pipeline: build, serialize, prompt, measure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a snapshot JSONL file")
    p.add_argument("--in", dest="input", required=True, help="snapshots.jsonl")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("build", help="serialize scene graphs to files")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--abstraction", choices=[a.value for a in Abstraction])
    p.add_argument("--format", choices=[f.value for f in Format])
    p.add_argument("--out", required=True, help="output directory")
    _add_common(p)
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("prompt", help="render prompt files")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--template", choices=["v1", "v2", "v3"])
    p.add_argument("--abstraction", choices=[a.value for a in Abstraction])
    p.add_argument("--format", choices=[f.value for f in Format])
    p.add_argument("--template-override", dest="template_override")
    p.add_argument("--no-graph", action="store_true", help="drop the scene-graph section")
    p.add_argument("--out", required=True, help="output directory")
    _add_common(p)
    p.set_defaults(func=_cmd_prompt)

    p = sub.add_parser("stats", help="token statistics over the 3x3 grid")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--tokenizer")
    p.add_argument("--out", required=True, help="report CSV path")
    _add_common(p)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("synth", help="generate a synthetic snapshot corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True, help="snapshots.jsonl path")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        _error(str(exc))
        return EXIT_USAGE
    except OSError as exc:
        _error(str(exc))
        return EXIT_IO


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()

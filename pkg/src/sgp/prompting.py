"""Prompt templates that inject a serialized scene graph beside a command.

Three layouts: v1 is a single-line concatenation, v2 adds an ego-role
sentence and section headers, v3 additionally fences the graph with a
format prefix and states a primary objective. Each template also has a
graph-free variant for prompts that carry only the navigation command.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path


class PromptError(Exception):
    """Unusable payload or malformed template override."""


class Template(str, Enum):
    V1 = "v1"
    V2 = "v2"
    V3 = "v3"


FENCE = "```"

_LAYOUTS = {
    Template.V1: "{command} Scene graph: {graph}",
    Template.V2: (
        "You are the ego vehicle.\n"
        "### Scene Graph\n"
        "{graph}\n"
        "### Navigation Command\n"
        "{command}\n"
    ),
    Template.V3: (
        "You are the ego vehicle.\n"
        "### Scene Graph (read-only)\n"
        "```{format}\n"
        "{graph}\n"
        "```\n"
        "### Navigation Command\n"
        "{command}\n"
        "### Primary Objective\n"
        "Follow the navigation command above.\n"
    ),
}

_NO_GRAPH_LAYOUTS = {
    Template.V1: "{command}",
    Template.V2: (
        "You are the ego vehicle.\n"
        "### Navigation Command\n"
        "{command}\n"
    ),
    Template.V3: (
        "You are the ego vehicle.\n"
        "### Navigation Command\n"
        "{command}\n"
        "### Primary Objective\n"
        "Follow the navigation command above.\n"
    ),
}

_PLACEHOLDER = re.compile(r"\{(command|graph|format)\}")


@dataclass(frozen=True)
class PromptBundle:
    template: Template
    format_tag: str | None
    command: str
    graph_body: str
    rendered: str


def _substitute(layout: str, values: dict[str, str]) -> str:
    # single pass so placeholder-looking text inside payloads stays untouched
    return _PLACEHOLDER.sub(lambda m: values[m.group(1)], layout)


def _render(
    template: Template,
    command: str,
    graph_body: str,
    format_tag: str | None,
    layout: str,
) -> PromptBundle:
    if not command:
        raise PromptError("command must be nonempty")
    values = {"command": command, "graph": graph_body, "format": format_tag or ""}
    return PromptBundle(template, format_tag, command, graph_body, _substitute(layout, values))


def render_v1(command: str, graph_body: str) -> PromptBundle:
    """Single line: command first, then a short cue and the graph."""
    return _render(Template.V1, command, graph_body, None, _LAYOUTS[Template.V1])


def render_v2(command: str, graph_body: str) -> PromptBundle:
    """Ego-role sentence, then headed graph and command sections."""
    return _render(Template.V2, command, graph_body, None, _LAYOUTS[Template.V2])


def render_v3(command: str, graph_body: str, format_tag: str) -> PromptBundle:
    """Sectioned layout with a fenced, format-prefixed graph block."""
    if format_tag not in ("text", "json", "yaml"):
        raise PromptError(f"format tag must be text/json/yaml, got {format_tag!r}")
    if FENCE in graph_body:
        raise PromptError("graph body contains a fence delimiter")
    return _render(Template.V3, command, graph_body, format_tag, _LAYOUTS[Template.V3])


def render(
    template: Template,
    command: str,
    graph_body: str,
    format_tag: str | None = None,
    override: str | None = None,
) -> PromptBundle:
    """Render any template; an override string replaces the built-in layout."""
    if override is not None:
        validate_override(override, template)
        if template is Template.V3 and FENCE in graph_body:
            raise PromptError("graph body contains a fence delimiter")
        return _render(template, command, graph_body, format_tag, override)
    if template is Template.V3:
        if format_tag is None:
            raise PromptError("v3 needs a format tag")
        return render_v3(command, graph_body, format_tag)
    if template is Template.V2:
        return render_v2(command, graph_body)
    return render_v1(command, graph_body)


def render_without_graph(template: Template, command: str) -> PromptBundle:
    """Graph-free prompt: the scene-graph section is dropped entirely."""
    return _render(template, command, "", None, _NO_GRAPH_LAYOUTS[template])


def validate_override(text: str, template: Template) -> None:
    """Overrides must use {command} and {graph} exactly once; {format} only for v3."""
    counts = {"command": 0, "graph": 0, "format": 0}
    for match in _PLACEHOLDER.finditer(text):
        counts[match.group(1)] += 1
    if counts["command"] != 1 or counts["graph"] != 1:
        raise PromptError("override must contain {command} and {graph} exactly once")
    expected_format = 1 if template is Template.V3 else 0
    if counts["format"] != expected_format:
        raise PromptError(
            "override must contain {format} exactly once for v3 and never otherwise"
        )


def load_override(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")

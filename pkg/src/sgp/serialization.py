"""Byte-exact Text/JSON/YAML renderings of a scene graph, plus JSON/YAML parsers.

All three formats share one emission order (hierarchy first, actor
interactions last) and one human-readable label vocabulary ("is in",
"direct front", ...). Text packs statements with membership grouping and
predicate merging; JSON/YAML mirror the graph as ``nodes`` and ``links``
arrays with one link per ordered pair. Serialization is deterministic down
to the byte, so identical graphs always produce identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import yaml

from .graph import (
    Abstraction,
    Edge,
    GraphError,
    Node,
    NodeClass,
    NodeGroup,
    RelationGroup,
    RelationLabel,
    SceneGraph,
    natural_key,
    validate_typing,
)


class SerializationError(Exception):
    """Body cannot be parsed or the parsed content violates the graph model."""


class Format(str, Enum):
    TEXT = "text"
    JSON = "json"
    YAML = "yaml"

    @property
    def extension(self) -> str:
        return {Format.TEXT: "txt", Format.JSON: "json", Format.YAML: "yaml"}[self]


@dataclass(frozen=True)
class SerializedGraph:
    format: Format
    body: str
    source_frame: str


@dataclass(frozen=True)
class Statement:
    """One Text statement: subjects, predicate display names, object."""

    subjects: tuple[str, ...]
    predicates: tuple[str, ...]
    object: str

    def render(self) -> str:
        return f"{', '.join(self.subjects)} {', '.join(self.predicates)} {self.object}"


_GROUP_RANK = {
    RelationGroup.PROXIMITY: 0,
    RelationGroup.DIRECTIONAL: 1,
    RelationGroup.LATERAL: 2,
    RelationGroup.HIERARCHICAL: 3,
    RelationGroup.TOPOLOGICAL: 4,
    RelationGroup.REGULATORY: 5,
}

# Emission blocks: roads->junctions, lanes->roads, structural connectivity,
# devices, actor memberships (ego last), actor interactions.
_BLOCK_ROAD_JUNCTION = 1
_BLOCK_LANE_ROAD = 2
_BLOCK_CONNECTIVITY = 3
_BLOCK_DEVICES = 4
_BLOCK_ACTOR_MEMBERSHIP = 5
_BLOCK_INTERACTIONS = 6

_MEMBERSHIP_BLOCKS = (_BLOCK_ROAD_JUNCTION, _BLOCK_LANE_ROAD, _BLOCK_ACTOR_MEMBERSHIP)


def _edge_block(graph: SceneGraph, edge: Edge) -> int:
    source_class = graph.class_of(edge.source)
    if edge.label is RelationLabel.IS_IN:
        if source_class is NodeClass.ROAD:
            return _BLOCK_ROAD_JUNCTION
        if source_class is NodeClass.LANE:
            return _BLOCK_LANE_ROAD
        if source_class.group is NodeGroup.OBJECT:
            return _BLOCK_DEVICES
        return _BLOCK_ACTOR_MEMBERSHIP
    if edge.label is RelationLabel.CONTROLS_TRAFFIC_OF:
        return _BLOCK_DEVICES
    if source_class.group is NodeGroup.STRUCTURAL:
        return _BLOCK_CONNECTIVITY
    return _BLOCK_INTERACTIONS


def _label_sort_key(label: RelationLabel) -> tuple[int, str]:
    return (_GROUP_RANK[label.group], label.display)


def canonical_order(
    graph: SceneGraph,
) -> list[tuple[str, str, tuple[RelationLabel, ...]]]:
    """Ordered (source, target, merged labels) entries, one per ordered pair.

    Pairs are grouped into the hierarchical emission blocks, sorted by
    (source, target) with natural numeric suffixes, ego membership last in
    its block; labels of one pair are merged and ordered group-first.
    """
    merged: dict[tuple[str, str], list[RelationLabel]] = {}
    blocks: dict[tuple[str, str], int] = {}
    for edge in graph.edges:
        pair = (edge.source, edge.target)
        merged.setdefault(pair, []).append(edge.label)
        blocks[pair] = _edge_block(graph, edge)

    def pair_key(pair: tuple[str, str]):
        source, target = pair
        ego_last = 1 if (blocks[pair] == _BLOCK_ACTOR_MEMBERSHIP and source == "ego") else 0
        return (blocks[pair], ego_last, natural_key(source), natural_key(target))

    return [
        (source, target, tuple(sorted(merged[(source, target)], key=_label_sort_key)))
        for source, target in sorted(merged, key=pair_key)
    ]


def text_statements(graph: SceneGraph) -> list[Statement]:
    """Statements in emission order with membership grouping and predicate merging."""
    statements: list[Statement] = []
    grouped_at: dict[tuple[int, str], int] = {}
    for source, target, labels in canonical_order(graph):
        block = _edge_block(graph, Edge(source, target, labels[0]))
        if block in _MEMBERSHIP_BLOCKS and labels == (RelationLabel.IS_IN,):
            key = (block, target)
            if key in grouped_at:
                at = grouped_at[key]
                prev = statements[at]
                statements[at] = Statement(prev.subjects + (source,), prev.predicates, target)
                continue
            grouped_at[key] = len(statements)
            statements.append(Statement((source,), (RelationLabel.IS_IN.display,), target))
        else:
            statements.append(Statement((source,), tuple(l.display for l in labels), target))
    return statements


def serialize_text(graph: SceneGraph) -> SerializedGraph:
    body = " | ".join(s.render() for s in text_statements(graph))
    return SerializedGraph(Format.TEXT, body, graph.frame_id)


_NODE_CLASS_RANK = {
    NodeClass.JUNCTION: 0,
    NodeClass.ROAD: 1,
    NodeClass.LANE: 2,
}


def _node_sort_key(node: Node):
    if node.node_class.group is NodeGroup.STRUCTURAL:
        block = _NODE_CLASS_RANK[node.node_class]
    elif node.node_class.group is NodeGroup.OBJECT:
        block = 3
    elif node.node_class is NodeClass.EGO:
        block = 5
    else:
        block = 4
    return (block, natural_key(node.id))


def _graph_payload(graph: SceneGraph) -> dict:
    nodes = [
        {"id": node.id, "base_class": node.node_class.value}
        for node in sorted(graph.nodes, key=_node_sort_key)
    ]
    links = [
        {"source": source, "target": target, "labels": [l.display for l in labels]}
        for source, target, labels in canonical_order(graph)
    ]
    return {"nodes": nodes, "links": links}


def serialize_json(graph: SceneGraph) -> SerializedGraph:
    body = json.dumps(_graph_payload(graph), indent=2) + "\n"
    return SerializedGraph(Format.JSON, body, graph.frame_id)


def _yaml_items(entries: list[dict], indent: str) -> list[str]:
    lines = []
    for entry in entries:
        first = True
        for key, value in entry.items():
            marker = f"{indent}- " if first else f"{indent}  "
            first = False
            if isinstance(value, list):
                lines.append(f"{marker}{key}:")
                for item in value:
                    lines.append(f"{indent}    - {item}")
            else:
                lines.append(f"{marker}{key}: {value}")
    return lines


def serialize_yaml(graph: SceneGraph) -> SerializedGraph:
    """Indentation-based analogue of the JSON schema (block style, two-space indent).

    Every scalar comes from the closed id/class/label vocabulary, so plain
    (unquoted) style is always valid YAML.
    """
    payload = _graph_payload(graph)
    lines: list[str] = []
    for key in ("nodes", "links"):
        entries = payload[key]
        if not entries:
            lines.append(f"{key}: []")
            continue
        lines.append(f"{key}:")
        lines.extend(_yaml_items(entries, "  "))
    body = "\n".join(lines) + "\n"
    return SerializedGraph(Format.YAML, body, graph.frame_id)


def serialize(graph: SceneGraph, fmt: Format) -> SerializedGraph:
    if fmt is Format.TEXT:
        return serialize_text(graph)
    if fmt is Format.JSON:
        return serialize_json(graph)
    return serialize_yaml(graph)


def _infer_abstraction(nodes: list[Node]) -> Abstraction:
    classes = {node.node_class for node in nodes}
    if NodeClass.LANE in classes:
        return Abstraction.FULL
    if NodeClass.ROAD in classes:
        return Abstraction.ROAD_LEVEL
    return Abstraction.ACTOR_ONLY


def _graph_from_payload(payload, frame_id: str) -> SceneGraph:
    if not isinstance(payload, dict):
        raise SerializationError("top level must be an object with nodes and links")
    for key in ("nodes", "links"):
        if not isinstance(payload.get(key), list):
            raise SerializationError(f"{key!r} must be an array")

    try:
        nodes = []
        for entry in payload["nodes"]:
            if not isinstance(entry, dict) or not isinstance(entry.get("id"), str):
                raise SerializationError("node entries need a string 'id'")
            base_class = entry.get("base_class")
            try:
                node_class = NodeClass(base_class)
            except ValueError:
                raise SerializationError(f"unknown node class {base_class!r}") from None
            nodes.append(Node(entry["id"], node_class))

        edges = []
        for entry in payload["links"]:
            if not isinstance(entry, dict):
                raise SerializationError("link entries must be objects")
            source, target = entry.get("source"), entry.get("target")
            labels = entry.get("labels")
            if not (isinstance(source, str) and isinstance(target, str) and isinstance(labels, list)):
                raise SerializationError("links need string source/target and a labels array")
            for display in labels:
                if not isinstance(display, str):
                    raise SerializationError("labels must be strings")
                edges.append(Edge(source, target, RelationLabel.from_display(display)))

        graph = SceneGraph(
            frame_id=frame_id,
            nodes=tuple(nodes),
            edges=tuple(edges),
            abstraction=_infer_abstraction(nodes),
        )
    except GraphError as exc:
        raise SerializationError(str(exc)) from None
    violations = validate_typing(graph)
    if violations:
        details = "; ".join(v.detail for v in violations)
        raise SerializationError(f"typing violations: {details}")
    return graph


def parse_json(body: str, frame_id: str = "") -> SceneGraph:
    try:
        payload = json.loads(body)
    except json.JSONDecodeError as exc:
        raise SerializationError(
            f"json syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    return _graph_from_payload(payload, frame_id)


def parse_yaml(body: str, frame_id: str = "") -> SceneGraph:
    try:
        payload = yaml.safe_load(body)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        position = (
            f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        )
        raise SerializationError(f"yaml syntax error{position}") from None
    return _graph_from_payload(payload, frame_id)

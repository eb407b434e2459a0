"""Typed traffic scene graph: node/relation vocabulary, invariants, typing rules.

A scene graph is a directed labeled multigraph over three disjoint node
groups (structural, actor, object) and a closed vocabulary of relation
labels in six groups.  Graphs are immutable; edits return new graphs.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping


class GraphError(Exception):
    """Structural problem: bad ids, unresolved endpoints, malformed graphs."""


class DuplicateEdgeError(GraphError):
    """The exact (source, target, label) triple is already present."""


class CardinalityError(GraphError):
    """Second label of the same group on one ordered actor pair."""


class TypingError(GraphError):
    """Edge not permitted by the typing matrix for the graph's abstraction."""


class NodeGroup(str, Enum):
    STRUCTURAL = "structural"
    ACTOR = "actor"
    OBJECT = "object"


class NodeClass(str, Enum):
    # structural
    LANE = "lane"
    ROAD = "road"
    JUNCTION = "junction"
    # actors
    EGO = "ego"
    CAR = "car"
    VAN = "van"
    TAXI = "taxi"
    ELECTRIC_VEHICLE = "electric_vehicle"
    TRUCK = "truck"
    BUS = "bus"
    MOTORCYCLE = "motorcycle"
    BICYCLE = "bicycle"
    EMERGENCY = "emergency"
    PEDESTRIAN = "pedestrian"
    # traffic-related objects
    TRAFFIC_LIGHT = "traffic_light"
    SPEED_LIMIT = "speed_limit"
    STOP_SIGN = "stop_sign"

    @property
    def group(self) -> NodeGroup:
        return _CLASS_GROUP[self]


_CLASS_GROUP = {
    NodeClass.LANE: NodeGroup.STRUCTURAL,
    NodeClass.ROAD: NodeGroup.STRUCTURAL,
    NodeClass.JUNCTION: NodeGroup.STRUCTURAL,
    NodeClass.EGO: NodeGroup.ACTOR,
    NodeClass.CAR: NodeGroup.ACTOR,
    NodeClass.VAN: NodeGroup.ACTOR,
    NodeClass.TAXI: NodeGroup.ACTOR,
    NodeClass.ELECTRIC_VEHICLE: NodeGroup.ACTOR,
    NodeClass.TRUCK: NodeGroup.ACTOR,
    NodeClass.BUS: NodeGroup.ACTOR,
    NodeClass.MOTORCYCLE: NodeGroup.ACTOR,
    NodeClass.BICYCLE: NodeGroup.ACTOR,
    NodeClass.EMERGENCY: NodeGroup.ACTOR,
    NodeClass.PEDESTRIAN: NodeGroup.ACTOR,
    NodeClass.TRAFFIC_LIGHT: NodeGroup.OBJECT,
    NodeClass.SPEED_LIMIT: NodeGroup.OBJECT,
    NodeClass.STOP_SIGN: NodeGroup.OBJECT,
}

ACTOR_CLASSES = tuple(c for c in NodeClass if c.group is NodeGroup.ACTOR)
OBJECT_CLASSES = tuple(c for c in NodeClass if c.group is NodeGroup.OBJECT)
STRUCTURAL_CLASSES = tuple(c for c in NodeClass if c.group is NodeGroup.STRUCTURAL)


class RelationGroup(str, Enum):
    PROXIMITY = "proximity"
    DIRECTIONAL = "directional"
    LATERAL = "lateral"
    HIERARCHICAL = "hierarchical"
    TOPOLOGICAL = "topological"
    REGULATORY = "regulatory"


class RelationLabel(str, Enum):
    # proximity (tightest to loosest)
    SAFETY_HAZARD = "safety_hazard"
    NEAR_COLLISION = "near_collision"
    SUPER_NEAR = "super_near"
    VERY_NEAR = "very_near"
    NEAR = "near"
    VISIBLE = "visible"
    # directional
    DIRECT_FRONT = "direct_front"
    SIDE_FRONT = "side_front"
    DIRECT_REAR = "direct_rear"
    SIDE_REAR = "side_rear"
    # lateral
    TO_LEFT_OF = "to_left_of"
    TO_RIGHT_OF = "to_right_of"
    # hierarchical
    IS_IN = "is_in"
    # topological
    OPPOSES = "opposes"
    TRAVELS_TO = "travels_to"
    LANE_CHANGE = "lane_change"
    # regulatory
    CONTROLS_TRAFFIC_OF = "controls_traffic_of"

    @property
    def group(self) -> RelationGroup:
        return _LABEL_GROUP[self]

    @property
    def display(self) -> str:
        """Human-readable form used by every serialization ("is in", "direct front")."""
        return self.value.replace("_", " ")

    @classmethod
    def from_display(cls, name: str) -> "RelationLabel":
        try:
            return _DISPLAY_TO_LABEL[name]
        except KeyError:
            raise GraphError(f"unknown relation label {name!r}") from None


_LABEL_GROUP = {
    RelationLabel.SAFETY_HAZARD: RelationGroup.PROXIMITY,
    RelationLabel.NEAR_COLLISION: RelationGroup.PROXIMITY,
    RelationLabel.SUPER_NEAR: RelationGroup.PROXIMITY,
    RelationLabel.VERY_NEAR: RelationGroup.PROXIMITY,
    RelationLabel.NEAR: RelationGroup.PROXIMITY,
    RelationLabel.VISIBLE: RelationGroup.PROXIMITY,
    RelationLabel.DIRECT_FRONT: RelationGroup.DIRECTIONAL,
    RelationLabel.SIDE_FRONT: RelationGroup.DIRECTIONAL,
    RelationLabel.DIRECT_REAR: RelationGroup.DIRECTIONAL,
    RelationLabel.SIDE_REAR: RelationGroup.DIRECTIONAL,
    RelationLabel.TO_LEFT_OF: RelationGroup.LATERAL,
    RelationLabel.TO_RIGHT_OF: RelationGroup.LATERAL,
    RelationLabel.IS_IN: RelationGroup.HIERARCHICAL,
    RelationLabel.OPPOSES: RelationGroup.TOPOLOGICAL,
    RelationLabel.TRAVELS_TO: RelationGroup.TOPOLOGICAL,
    RelationLabel.LANE_CHANGE: RelationGroup.TOPOLOGICAL,
    RelationLabel.CONTROLS_TRAFFIC_OF: RelationGroup.REGULATORY,
}

_DISPLAY_TO_LABEL = {label.display: label for label in RelationLabel}

# Label groups that may connect an ordered actor pair, at most once each.
ACTOR_PAIR_GROUPS = (
    RelationGroup.PROXIMITY,
    RelationGroup.DIRECTIONAL,
    RelationGroup.LATERAL,
)


class Abstraction(str, Enum):
    FULL = "full"
    ROAD_LEVEL = "road_level"
    ACTOR_ONLY = "actor_only"


_NATURAL_SPLIT = re.compile(r"(\d+)")


def natural_key(node_id: str) -> tuple:
    """Sort key with numeric suffixes compared as integers (lane_2 < lane_10)."""
    return tuple(
        int(part) if part.isdigit() else part
        for part in _NATURAL_SPLIT.split(node_id)
    )


def _check_id(node_id: str, node_class: NodeClass) -> None:
    if node_class is NodeClass.EGO:
        if node_id != "ego":
            raise GraphError(f"ego node must have id 'ego', got {node_id!r}")
        return
    prefix = node_class.value + "_"
    suffix = node_id[len(prefix):] if node_id.startswith(prefix) else ""
    if not (suffix.isdigit() and not suffix.startswith("0")):
        raise GraphError(
            f"node id {node_id!r} must be '{node_class.value}_<positive integer>'"
        )


@dataclass(frozen=True)
class Node:
    """Graph node. ``attrs`` are carried through but never serialized."""

    id: str
    node_class: NodeClass
    attrs: Mapping[str, object] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not self.id:
            raise GraphError("node id must be nonempty")
        _check_id(self.id, self.node_class)


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    label: RelationLabel

    @property
    def triple(self) -> tuple[str, str, RelationLabel]:
        return (self.source, self.target, self.label)


@dataclass(frozen=True)
class Violation:
    """An edge rejected by the typing matrix, with the offending triple spelled out."""

    edge: Edge
    detail: str


def typing_allows(
    source: NodeClass,
    label: RelationLabel,
    target: NodeClass,
    abstraction: Abstraction,
) -> bool:
    """Typing matrix: may ``source --label--> target`` exist at this abstraction?"""
    group = label.group
    if group in ACTOR_PAIR_GROUPS:
        if source.group is NodeGroup.ACTOR and target.group is NodeGroup.ACTOR:
            return True
        # lane-to-lane lateral adjacency exists only in the full graph
        if group is RelationGroup.LATERAL and abstraction is Abstraction.FULL:
            return source is NodeClass.LANE and target is NodeClass.LANE
        return False
    if abstraction is Abstraction.ACTOR_ONLY:
        return False
    if label is RelationLabel.IS_IN:
        member_target = (
            NodeClass.LANE if abstraction is Abstraction.FULL else NodeClass.ROAD
        )
        if source.group in (NodeGroup.ACTOR, NodeGroup.OBJECT):
            return target is member_target
        if source is NodeClass.LANE:
            return abstraction is Abstraction.FULL and target is NodeClass.ROAD
        return source is NodeClass.ROAD and target is NodeClass.JUNCTION
    if label is RelationLabel.TRAVELS_TO:
        if abstraction is Abstraction.FULL:
            return source is NodeClass.LANE and target is NodeClass.LANE
        return source is NodeClass.ROAD and target is NodeClass.ROAD
    if label in (RelationLabel.LANE_CHANGE, RelationLabel.OPPOSES):
        return (
            abstraction is Abstraction.FULL
            and source is NodeClass.LANE
            and target is NodeClass.LANE
        )
    if label is RelationLabel.CONTROLS_TRAFFIC_OF:
        governed = (
            NodeClass.LANE if abstraction is Abstraction.FULL else NodeClass.ROAD
        )
        return source is NodeClass.TRAFFIC_LIGHT and target is governed
    return False


@dataclass(frozen=True)
class SceneGraph:
    """Immutable directed labeled multigraph for one frame.

    Construction enforces the structural invariants (unique ids, resolved
    endpoints, no self-edges, no duplicate triples, at most one label per
    proximity/directional/lateral group on an ordered actor pair). Typing
    violations are *not* raised here; ``validate_typing`` collects them so
    callers can report every problem in one pass.
    """

    frame_id: str
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    abstraction: Abstraction = Abstraction.FULL
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        by_id: dict[str, Node] = {}
        for node in self.nodes:
            if node.id in by_id:
                raise GraphError(f"duplicate node id {node.id!r}")
            by_id[node.id] = node
        object.__setattr__(self, "_by_id", by_id)
        seen: set[tuple[str, str, RelationLabel]] = set()
        pair_groups: set[tuple[str, str, RelationGroup]] = set()
        for edge in self.edges:
            self._check_edge(edge, seen, pair_groups)
            seen.add(edge.triple)

    def _check_edge(
        self,
        edge: Edge,
        seen: set,
        pair_groups: set,
    ) -> None:
        source = self._by_id.get(edge.source)
        target = self._by_id.get(edge.target)
        if source is None or target is None:
            missing = edge.source if source is None else edge.target
            raise GraphError(f"edge {edge.triple} references unknown node {missing!r}")
        if edge.source == edge.target:
            raise GraphError(f"self-edge on {edge.source!r} not allowed")
        if edge.triple in seen:
            raise DuplicateEdgeError(f"duplicate edge {edge.triple}")
        group = edge.label.group
        if (
            group in ACTOR_PAIR_GROUPS
            and source.node_class.group is NodeGroup.ACTOR
            and target.node_class.group is NodeGroup.ACTOR
        ):
            key = (edge.source, edge.target, group)
            if key in pair_groups:
                raise CardinalityError(
                    f"second {group.value} label on actor pair "
                    f"({edge.source}, {edge.target})"
                )
            pair_groups.add(key)

    def node(self, node_id: str) -> Node:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise GraphError(f"unknown node id {node_id!r}") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self._by_id

    def class_of(self, node_id: str) -> NodeClass:
        return self.node(node_id).node_class


def validate_typing(graph: SceneGraph) -> list[Violation]:
    """Collect every edge that the typing matrix rejects for graph.abstraction."""
    violations = []
    for edge in graph.edges:
        source = graph.class_of(edge.source)
        target = graph.class_of(edge.target)
        if not typing_allows(source, edge.label, target, graph.abstraction):
            violations.append(
                Violation(
                    edge,
                    f"({source.value}, {edge.label.value}, {target.value}) "
                    f"not permitted at abstraction {graph.abstraction.value}",
                )
            )
    return violations


def add_edge(
    graph: SceneGraph, source: str, target: str, label: RelationLabel
) -> SceneGraph:
    """Return a new graph with the edge appended.

    Raises DuplicateEdgeError, CardinalityError, or TypingError; the input
    graph is never modified.
    """
    edge = Edge(source, target, label)
    src = graph.node(source)
    tgt = graph.node(target)
    if not typing_allows(src.node_class, label, tgt.node_class, graph.abstraction):
        raise TypingError(
            f"({src.node_class.value}, {label.value}, {tgt.node_class.value}) "
            f"not permitted at abstraction {graph.abstraction.value}"
        )
    return replace(graph, edges=graph.edges + (edge,))


def remove_edge(
    graph: SceneGraph, source: str, target: str, label: RelationLabel
) -> SceneGraph:
    """Return a new graph without the given triple; error if it is absent."""
    triple = (source, target, label)
    kept = tuple(e for e in graph.edges if e.triple != triple)
    if len(kept) == len(graph.edges):
        raise GraphError(f"edge {triple} not present")
    return replace(graph, edges=kept)


def graph_equal(a: SceneGraph, b: SceneGraph) -> bool:
    """Order-insensitive equality on (id, class) node sets and edge multisets."""
    nodes_a = {(n.id, n.node_class) for n in a.nodes}
    nodes_b = {(n.id, n.node_class) for n in b.nodes}
    if nodes_a != nodes_b:
        return False
    return Counter(e.triple for e in a.edges) == Counter(e.triple for e in b.edges)

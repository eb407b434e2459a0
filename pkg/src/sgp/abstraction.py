"""Road-Level and Actor-Only reductions of a full scene graph.

Road-Level collapses lanes into their parent roads: memberships and
regulatory edges are remapped to the road, lane-to-lane travel is lifted to
road pairs existentially (present iff some constituent lane pair had it),
and the lane-specific adjacency relations disappear. Actor-Only keeps just
the actors and their pairwise interaction edges. Both transforms return new
graphs and leave the input untouched.
"""

from __future__ import annotations

from dataclasses import replace

from .graph import (
    ACTOR_PAIR_GROUPS,
    Abstraction,
    Edge,
    NodeClass,
    NodeGroup,
    RelationLabel,
    SceneGraph,
)


class AbstractionError(Exception):
    """Input graph is not at the abstraction level the transform expects."""


def _require_full(graph: SceneGraph, op: str) -> None:
    if graph.abstraction is not Abstraction.FULL:
        raise AbstractionError(
            f"{op} expects a full graph, got {graph.abstraction.value}"
        )


def _lane_parents(graph: SceneGraph) -> dict[str, str]:
    parents: dict[str, str] = {}
    for edge in graph.edges:
        if (
            edge.label is RelationLabel.IS_IN
            and graph.class_of(edge.source) is NodeClass.LANE
            and graph.class_of(edge.target) is NodeClass.ROAD
        ):
            parents[edge.source] = edge.target
    return parents


def _parent_road(parents: dict[str, str], lane_id: str) -> str:
    try:
        return parents[lane_id]
    except KeyError:
        raise AbstractionError(f"lane {lane_id!r} has no parent road") from None


def to_road_level(graph: SceneGraph) -> SceneGraph:
    """Collapse lanes into roads, lifting eligible lane-level relations."""
    _require_full(graph, "to_road_level")
    parents = _lane_parents(graph)

    nodes = tuple(n for n in graph.nodes if n.node_class is not NodeClass.LANE)
    edges: list[Edge] = []
    seen: set[tuple[str, str, RelationLabel]] = set()

    def emit(source: str, target: str, label: RelationLabel) -> None:
        if source == target:
            return
        triple = (source, target, label)
        if triple not in seen:
            seen.add(triple)
            edges.append(Edge(source, target, label))

    for edge in graph.edges:
        src_class = graph.class_of(edge.source)
        tgt_class = graph.class_of(edge.target)
        label = edge.label
        if label is RelationLabel.IS_IN:
            if src_class is NodeClass.LANE:
                continue  # lane->road edges vanish with the lanes
            if tgt_class is NodeClass.LANE:
                emit(edge.source, _parent_road(parents, edge.target), label)
            else:
                emit(edge.source, edge.target, label)  # road->junction survives
        elif label is RelationLabel.TRAVELS_TO:
            emit(
                _parent_road(parents, edge.source),
                _parent_road(parents, edge.target),
                label,
            )
        elif label in (RelationLabel.LANE_CHANGE, RelationLabel.OPPOSES):
            continue  # lane specific, never mapped to roads
        elif label.group in ACTOR_PAIR_GROUPS:
            if src_class is NodeClass.LANE or tgt_class is NodeClass.LANE:
                continue  # lane lateral adjacency is lane specific too
            emit(edge.source, edge.target, label)
        elif label is RelationLabel.CONTROLS_TRAFFIC_OF:
            emit(edge.source, _parent_road(parents, edge.target), label)
        else:
            emit(edge.source, edge.target, label)

    return replace(
        graph, nodes=nodes, edges=tuple(edges), abstraction=Abstraction.ROAD_LEVEL
    )


def to_actor_only(graph: SceneGraph) -> SceneGraph:
    """Keep only actor nodes and their pairwise interaction edges."""
    _require_full(graph, "to_actor_only")
    nodes = tuple(n for n in graph.nodes if n.node_class.group is NodeGroup.ACTOR)
    kept_ids = {n.id for n in nodes}
    edges = tuple(
        e
        for e in graph.edges
        if e.label.group in ACTOR_PAIR_GROUPS
        and e.source in kept_ids
        and e.target in kept_ids
    )
    return replace(graph, nodes=nodes, edges=edges, abstraction=Abstraction.ACTOR_ONLY)


def lift_oracle(graph: SceneGraph) -> set[tuple[str, str]]:
    """Brute-force enumeration of the road pairs an existential lift must produce."""
    _require_full(graph, "lift_oracle")
    parents = _lane_parents(graph)
    lifted = set()
    for edge in graph.edges:
        if edge.label is not RelationLabel.TRAVELS_TO:
            continue
        r1 = _parent_road(parents, edge.source)
        r2 = _parent_road(parents, edge.target)
        if r1 != r2:
            lifted.add((r1, r2))
    return lifted


def abstract(graph: SceneGraph, level: Abstraction) -> SceneGraph:
    """Dispatch helper: full input in, requested abstraction out."""
    if level is Abstraction.FULL:
        _require_full(graph, "abstract")
        return graph
    if level is Abstraction.ROAD_LEVEL:
        return to_road_level(graph)
    return to_actor_only(graph)

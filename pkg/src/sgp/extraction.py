"""Relation extraction: turn a snapshot into a full-abstraction scene graph.

Pairwise actor geometry is classified into proximity bands (distance),
directional sectors (bearing in the reference actor's frame), and lateral
relations (signed lateral offset, left positive). Memberships anchor actors
and devices to lanes; lane topology and regulatory edges come straight from
the map scaffold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .graph import (
    Abstraction,
    Edge,
    Node,
    NodeClass,
    RelationLabel,
    SceneGraph,
    natural_key,
)
from .snapshot import ActorState, DeviceState, LaneSpec, SceneSnapshot


class ExtractionError(Exception):
    """Snapshot cannot be turned into a graph (e.g. unassignable entity)."""


@dataclass(frozen=True)
class ExtractionConfig:
    """Thresholds for the geometric relation classifiers.

    Band values are inclusive upper bounds in meters, tightest first; sector
    angles are absolute bearing bounds in degrees; the lateral threshold is
    the dead-zone half-width in meters.
    """

    safety_hazard_m: float = 2.0
    near_collision_m: float = 4.0
    super_near_m: float = 7.0
    very_near_m: float = 10.0
    near_m: float = 16.0
    visible_m: float = 25.0
    direct_deg: float = 45.0
    side_deg: float = 90.0
    rear_split_deg: float = 135.0
    lateral_threshold_m: float = 1.75
    membership_tolerance_m: float = 0.5

    def __post_init__(self) -> None:
        bounds = [bound for _, bound in self.bands]
        if any(b <= 0 for b in bounds) or sorted(bounds) != bounds or len(set(bounds)) != 6:
            raise ValueError("proximity band bounds must be positive and strictly increasing")
        if not 0 < self.direct_deg < self.side_deg < self.rear_split_deg < 180:
            raise ValueError("sector angles must satisfy 0 < direct < side < rear < 180")
        if self.lateral_threshold_m <= 0 or self.membership_tolerance_m <= 0:
            raise ValueError("lateral threshold and membership tolerance must be positive")

    @property
    def bands(self) -> tuple[tuple[RelationLabel, float], ...]:
        return (
            (RelationLabel.SAFETY_HAZARD, self.safety_hazard_m),
            (RelationLabel.NEAR_COLLISION, self.near_collision_m),
            (RelationLabel.SUPER_NEAR, self.super_near_m),
            (RelationLabel.VERY_NEAR, self.very_near_m),
            (RelationLabel.NEAR, self.near_m),
            (RelationLabel.VISIBLE, self.visible_m),
        )


DEFAULT_CONFIG = ExtractionConfig()


def proximity_band(
    distance_m: float, config: ExtractionConfig = DEFAULT_CONFIG
) -> RelationLabel | None:
    """Tightest band whose upper bound covers the distance; None beyond visible."""
    if distance_m < 0:
        raise ValueError("distance must be nonnegative")
    for label, bound in config.bands:
        if distance_m <= bound:
            return label
    return None


def directional_sector(
    bearing_rad: float, config: ExtractionConfig = DEFAULT_CONFIG
) -> RelationLabel:
    """Sector of a bearing measured against the reference heading.

    Boundaries belong to the frontward sector: |b| <= 45 deg is direct front,
    then side front up to 90, side rear up to 135, direct rear beyond.
    """
    bearing = math.remainder(bearing_rad, math.tau)
    if bearing <= -math.pi:
        bearing += math.tau
    magnitude = abs(bearing)
    if magnitude <= math.radians(config.direct_deg):
        return RelationLabel.DIRECT_FRONT
    if magnitude <= math.radians(config.side_deg):
        return RelationLabel.SIDE_FRONT
    if magnitude <= math.radians(config.rear_split_deg):
        return RelationLabel.SIDE_REAR
    return RelationLabel.DIRECT_REAR


def lateral_relation(
    lateral_offset_m: float, config: ExtractionConfig = DEFAULT_CONFIG
) -> RelationLabel | None:
    """Left/right of the reference actor outside the dead zone, else None."""
    if lateral_offset_m > config.lateral_threshold_m:
        return RelationLabel.TO_LEFT_OF
    if lateral_offset_m < -config.lateral_threshold_m:
        return RelationLabel.TO_RIGHT_OF
    return None


def point_to_polyline_m(x: float, y: float, polyline) -> float:
    """Minimum distance from a point to a polyline (per-segment projection)."""
    points = np.asarray(polyline, dtype=float)
    p = np.array((x, y), dtype=float)
    if len(points) == 1:
        return float(np.hypot(*(p - points[0])))
    a, b = points[:-1], points[1:]
    ab = b - a
    norms = np.einsum("ij,ij->i", ab, ab)
    norms[norms == 0.0] = 1.0
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / norms, 0.0, 1.0)
    nearest = a + t[:, None] * ab
    return float(np.min(np.hypot(*(p - nearest).T)))


def assign_membership(
    entity: ActorState | DeviceState,
    lanes: tuple[LaneSpec, ...],
    config: ExtractionConfig = DEFAULT_CONFIG,
) -> str:
    """Lane owning the entity: explicit assignment wins, else the nearest
    centerline within width/2 + tolerance; exact ties go to the smaller id."""
    if isinstance(entity, DeviceState):
        return entity.lane_ids[0]
    if entity.lane_id is not None:
        return entity.lane_id
    if not lanes:
        raise ExtractionError(f"{entity.id}: no lanes to assign membership against")
    candidates = []
    for lane in lanes:
        distance = point_to_polyline_m(entity.x, entity.y, lane.centerline)
        if distance <= lane.width / 2.0 + config.membership_tolerance_m:
            candidates.append((distance, lane.id))
    if not candidates:
        raise ExtractionError(f"{entity.id}: no lane within membership tolerance")
    best = min(d for d, _ in candidates)
    tied = [lane_id for d, lane_id in candidates if d <= best + 1e-9]
    return min(tied)


def relative_pose(subject: ActorState, reference: ActorState) -> tuple[float, float]:
    """(forward, left) coordinates of the subject in the reference actor's frame."""
    dx = subject.x - reference.x
    dy = subject.y - reference.y
    cos_h = math.cos(reference.yaw)
    sin_h = math.sin(reference.yaw)
    return dx * cos_h + dy * sin_h, -dx * sin_h + dy * cos_h


def actor_pair_labels(
    subject: ActorState,
    reference: ActorState,
    config: ExtractionConfig = DEFAULT_CONFIG,
) -> list[RelationLabel]:
    """Labels describing the subject's position relative to the reference actor."""
    forward, left = relative_pose(subject, reference)
    labels = []
    band = proximity_band(math.hypot(forward, left), config)
    if band is not None:
        labels.append(band)
    labels.append(directional_sector(math.atan2(left, forward), config))
    side = lateral_relation(left, config)
    if side is not None:
        labels.append(side)
    return labels


def _pair_subject_reference(a: ActorState, b: ActorState) -> tuple[ActorState, ActorState]:
    # canonical direction: other -> ego, else smaller id -> larger id
    if b.id == "ego":
        return a, b
    if a.id == "ego":
        return b, a
    if natural_key(a.id) <= natural_key(b.id):
        return a, b
    return b, a


def build_graph(
    snapshot: SceneSnapshot, config: ExtractionConfig = DEFAULT_CONFIG
) -> SceneGraph:
    """Full-abstraction graph of the snapshot.

    Actors beyond the ego's visible band are dropped entirely; pair edges are
    emitted once per unordered pair within the visible band of each other,
    directed subject -> reference.
    """
    ego = snapshot.ego
    kept_actors = [
        actor
        for actor in snapshot.actors
        if math.hypot(actor.x - ego.x, actor.y - ego.y) <= config.visible_m
    ]

    nodes = [Node(j, NodeClass.JUNCTION) for j in snapshot.junctions]
    nodes += [Node(r.id, NodeClass.ROAD) for r in snapshot.roads]
    nodes += [Node(l.id, NodeClass.LANE) for l in snapshot.lanes]
    nodes += [Node(d.id, d.node_class) for d in snapshot.objects]
    nodes += [Node(a.id, a.node_class) for a in kept_actors]
    nodes.append(Node(ego.id, ego.node_class))

    edges: list[Edge] = []
    seen: set[tuple[str, str, RelationLabel]] = set()

    def emit(source: str, target: str, label: RelationLabel) -> None:
        triple = (source, target, label)
        if triple not in seen:
            seen.add(triple)
            edges.append(Edge(source, target, label))

    # (a) membership hierarchy
    for actor in kept_actors + [ego]:
        emit(actor.id, assign_membership(actor, snapshot.lanes, config), RelationLabel.IS_IN)
    for device in snapshot.objects:
        emit(device.id, device.lane_ids[0], RelationLabel.IS_IN)
    for lane in snapshot.lanes:
        emit(lane.id, lane.road_id, RelationLabel.IS_IN)
    for road in snapshot.roads:
        if road.junction_id is not None:
            emit(road.id, road.junction_id, RelationLabel.IS_IN)

    # (b) lane topology
    for lane in snapshot.lanes:
        for successor in lane.successors:
            emit(lane.id, successor, RelationLabel.TRAVELS_TO)
        if lane.left_neighbor is not None:
            emit(lane.left_neighbor.id, lane.id, RelationLabel.TO_LEFT_OF)
            adjacency = (
                RelationLabel.LANE_CHANGE
                if lane.left_neighbor.same_direction
                else RelationLabel.OPPOSES
            )
            emit(lane.id, lane.left_neighbor.id, adjacency)
        if lane.right_neighbor is not None:
            emit(lane.right_neighbor.id, lane.id, RelationLabel.TO_RIGHT_OF)
            adjacency = (
                RelationLabel.LANE_CHANGE
                if lane.right_neighbor.same_direction
                else RelationLabel.OPPOSES
            )
            emit(lane.id, lane.right_neighbor.id, adjacency)

    # (c) regulatory edges: traffic lights only
    for device in snapshot.objects:
        if device.node_class is NodeClass.TRAFFIC_LIGHT:
            for lane_id in device.lane_ids:
                emit(device.id, lane_id, RelationLabel.CONTROLS_TRAFFIC_OF)

    # (d) actor pair interactions
    for a, b in combinations(kept_actors + [ego], 2):
        if math.hypot(a.x - b.x, a.y - b.y) > config.visible_m:
            continue
        subject, reference = _pair_subject_reference(a, b)
        for label in actor_pair_labels(subject, reference, config):
            emit(subject.id, reference.id, label)

    return SceneGraph(
        frame_id=snapshot.frame_id,
        nodes=tuple(nodes),
        edges=tuple(edges),
        abstraction=Abstraction.FULL,
    )

"""Per-frame world state: entities consumed by graph construction.

A snapshot is the raw input record: ego and actor poses, traffic devices,
and the lane/road/junction scaffold. The JSON Lines wire format (one
snapshot per line) is defined by ``snapshot_to_dict``/``snapshot_from_dict``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .graph import NodeClass, NodeGroup

MAX_LANE_WIDTH_M = 10.0


class SnapshotError(Exception):
    """Malformed or inconsistent snapshot record."""


@dataclass(frozen=True)
class ActorState:
    id: str
    node_class: NodeClass
    x: float
    y: float
    yaw: float
    lane_id: str | None = None


@dataclass(frozen=True)
class DeviceState:
    id: str
    node_class: NodeClass
    x: float
    y: float
    lane_ids: tuple[str, ...]


@dataclass(frozen=True)
class LaneNeighbor:
    id: str
    same_direction: bool


@dataclass(frozen=True)
class LaneSpec:
    id: str
    road_id: str
    centerline: tuple[tuple[float, float], ...]
    width: float
    successors: tuple[str, ...] = ()
    left_neighbor: LaneNeighbor | None = None
    right_neighbor: LaneNeighbor | None = None


@dataclass(frozen=True)
class RoadSpec:
    id: str
    junction_id: str | None = None


@dataclass(frozen=True)
class SceneSnapshot:
    frame_id: str
    command: str
    ego: ActorState
    actors: tuple[ActorState, ...]
    objects: tuple[DeviceState, ...]
    lanes: tuple[LaneSpec, ...]
    roads: tuple[RoadSpec, ...]
    junctions: tuple[str, ...]


def validate_snapshot(snapshot: SceneSnapshot) -> list[str]:
    """Return every invariant violation (empty list means the snapshot is valid)."""
    problems: list[str] = []
    lane_ids = {lane.id for lane in snapshot.lanes}
    road_ids = {road.id for road in snapshot.roads}
    junction_ids = set(snapshot.junctions)

    if not snapshot.frame_id:
        problems.append("frame_id must be nonempty")
    if snapshot.ego.id != "ego" or snapshot.ego.node_class is not NodeClass.EGO:
        problems.append("ego entry must have id 'ego' and class 'ego'")

    seen: set[str] = set()
    entity_ids = (
        [snapshot.ego.id]
        + [a.id for a in snapshot.actors]
        + [d.id for d in snapshot.objects]
        + sorted(lane_ids)
        + sorted(road_ids)
        + sorted(junction_ids)
    )
    for entity_id in entity_ids:
        if entity_id in seen:
            problems.append(f"duplicate entity id {entity_id!r}")
        seen.add(entity_id)

    for actor in snapshot.actors:
        if actor.node_class.group is not NodeGroup.ACTOR:
            problems.append(f"{actor.id}: class {actor.node_class.value} is not an actor")
        if actor.node_class is NodeClass.EGO:
            problems.append(f"{actor.id}: only the ego entry may use class 'ego'")
        if actor.lane_id is not None and actor.lane_id not in lane_ids:
            problems.append(f"{actor.id}: lane_id {actor.lane_id!r} does not resolve")
    if snapshot.ego.lane_id is not None and snapshot.ego.lane_id not in lane_ids:
        problems.append(f"ego: lane_id {snapshot.ego.lane_id!r} does not resolve")

    for device in snapshot.objects:
        if device.node_class.group is not NodeGroup.OBJECT:
            problems.append(f"{device.id}: class {device.node_class.value} is not a traffic object")
        if not device.lane_ids:
            problems.append(f"{device.id}: lane_ids must be nonempty")
        for lane_id in device.lane_ids:
            if lane_id not in lane_ids:
                problems.append(f"{device.id}: lane id {lane_id!r} does not resolve")

    for lane in snapshot.lanes:
        if len(lane.centerline) < 2:
            problems.append(f"{lane.id}: centerline needs at least 2 points")
        if not 0.0 < lane.width <= MAX_LANE_WIDTH_M:
            problems.append(f"{lane.id}: width {lane.width} outside (0, {MAX_LANE_WIDTH_M}]")
        if lane.road_id not in road_ids:
            problems.append(f"{lane.id}: road_id {lane.road_id!r} does not resolve")
        for succ in lane.successors:
            if succ not in lane_ids:
                problems.append(f"{lane.id}: successor {succ!r} does not resolve")
            if succ == lane.id:
                problems.append(f"{lane.id}: lane cannot be its own successor")
        for side, neighbor in (("left", lane.left_neighbor), ("right", lane.right_neighbor)):
            if neighbor is None:
                continue
            if neighbor.id not in lane_ids:
                problems.append(f"{lane.id}: {side} neighbor {neighbor.id!r} does not resolve")
            if neighbor.id == lane.id:
                problems.append(f"{lane.id}: lane cannot be its own neighbor")

    for road in snapshot.roads:
        if road.junction_id is not None and road.junction_id not in junction_ids:
            problems.append(f"{road.id}: junction_id {road.junction_id!r} does not resolve")

    return problems


def _require(record: dict, key: str, kind: type, where: str):
    if key not in record:
        raise SnapshotError(f"{where}: missing field {key!r}")
    value = record[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SnapshotError(f"{where}: field {key!r} must be a number")
        return float(value)
    if not isinstance(value, kind):
        raise SnapshotError(f"{where}: field {key!r} must be {kind.__name__}")
    return value


def _node_class(name: str, where: str) -> NodeClass:
    try:
        return NodeClass(name)
    except ValueError:
        raise SnapshotError(f"{where}: unknown class {name!r}") from None


def _actor_from_dict(record: dict, where: str) -> ActorState:
    lane_id = record.get("lane_id")
    if lane_id is not None and not isinstance(lane_id, str):
        raise SnapshotError(f"{where}: lane_id must be a string")
    return ActorState(
        id=_require(record, "id", str, where),
        node_class=_node_class(_require(record, "class", str, where), where),
        x=_require(record, "x", float, where),
        y=_require(record, "y", float, where),
        yaw=_require(record, "yaw", float, where),
        lane_id=lane_id,
    )


def _neighbor_from_dict(record, where: str) -> LaneNeighbor:
    if not isinstance(record, dict):
        raise SnapshotError(f"{where}: neighbor must be an object")
    return LaneNeighbor(
        id=_require(record, "id", str, where),
        same_direction=_require(record, "same_direction", bool, where),
    )


def snapshot_from_dict(record: dict) -> SceneSnapshot:
    """Build a snapshot from one decoded JSONL record; raises SnapshotError."""
    if not isinstance(record, dict):
        raise SnapshotError("record must be a JSON object")
    frame_id = _require(record, "frame_id", str, "record")
    where = f"frame {frame_id or '?'}"
    ego = _actor_from_dict(_require(record, "ego", dict, where), f"{where} ego")

    actors = []
    for entry in _require(record, "actors", list, where):
        actors.append(_actor_from_dict(entry, f"{where} actor"))

    objects = []
    for entry in _require(record, "objects", list, where):
        if not isinstance(entry, dict):
            raise SnapshotError(f"{where}: object entry must be an object")
        lane_ids = _require(entry, "lane_ids", list, f"{where} object")
        if not all(isinstance(x, str) for x in lane_ids):
            raise SnapshotError(f"{where}: object lane_ids must be strings")
        objects.append(
            DeviceState(
                id=_require(entry, "id", str, f"{where} object"),
                node_class=_node_class(
                    _require(entry, "class", str, f"{where} object"), f"{where} object"
                ),
                x=_require(entry, "x", float, f"{where} object"),
                y=_require(entry, "y", float, f"{where} object"),
                lane_ids=tuple(lane_ids),
            )
        )

    lanes = []
    for entry in _require(record, "lanes", list, where):
        if not isinstance(entry, dict):
            raise SnapshotError(f"{where}: lane entry must be an object")
        lane_where = f"{where} lane"
        centerline = _require(entry, "centerline", list, lane_where)
        points = []
        for point in centerline:
            if not (isinstance(point, list) and len(point) == 2):
                raise SnapshotError(f"{lane_where}: centerline points must be [x, y]")
            points.append((float(point[0]), float(point[1])))
        successors = _require(entry, "successors", list, lane_where)
        if not all(isinstance(x, str) for x in successors):
            raise SnapshotError(f"{lane_where}: successors must be strings")
        lanes.append(
            LaneSpec(
                id=_require(entry, "id", str, lane_where),
                road_id=_require(entry, "road_id", str, lane_where),
                centerline=tuple(points),
                width=_require(entry, "width", float, lane_where),
                successors=tuple(successors),
                left_neighbor=(
                    _neighbor_from_dict(entry["left_neighbor"], lane_where)
                    if entry.get("left_neighbor") is not None
                    else None
                ),
                right_neighbor=(
                    _neighbor_from_dict(entry["right_neighbor"], lane_where)
                    if entry.get("right_neighbor") is not None
                    else None
                ),
            )
        )

    roads = []
    for entry in _require(record, "roads", list, where):
        if not isinstance(entry, dict):
            raise SnapshotError(f"{where}: road entry must be an object")
        junction_id = entry.get("junction_id")
        if junction_id is not None and not isinstance(junction_id, str):
            raise SnapshotError(f"{where}: road junction_id must be a string")
        roads.append(
            RoadSpec(id=_require(entry, "id", str, f"{where} road"), junction_id=junction_id)
        )

    junctions = _require(record, "junctions", list, where)
    if not all(isinstance(x, str) for x in junctions):
        raise SnapshotError(f"{where}: junctions must be strings")

    return SceneSnapshot(
        frame_id=frame_id,
        command=_require(record, "command", str, where),
        ego=ego,
        actors=tuple(actors),
        objects=tuple(objects),
        lanes=tuple(lanes),
        roads=tuple(roads),
        junctions=tuple(junctions),
    )


def _actor_to_dict(actor: ActorState) -> dict:
    record = {
        "id": actor.id,
        "class": actor.node_class.value,
        "x": actor.x,
        "y": actor.y,
        "yaw": actor.yaw,
    }
    if actor.lane_id is not None:
        record["lane_id"] = actor.lane_id
    return record


def snapshot_to_dict(snapshot: SceneSnapshot) -> dict:
    lanes = []
    for lane in snapshot.lanes:
        entry = {
            "id": lane.id,
            "road_id": lane.road_id,
            "centerline": [[x, y] for x, y in lane.centerline],
            "width": lane.width,
            "successors": list(lane.successors),
        }
        if lane.left_neighbor is not None:
            entry["left_neighbor"] = {
                "id": lane.left_neighbor.id,
                "same_direction": lane.left_neighbor.same_direction,
            }
        if lane.right_neighbor is not None:
            entry["right_neighbor"] = {
                "id": lane.right_neighbor.id,
                "same_direction": lane.right_neighbor.same_direction,
            }
        lanes.append(entry)
    roads = []
    for road in snapshot.roads:
        entry = {"id": road.id}
        if road.junction_id is not None:
            entry["junction_id"] = road.junction_id
        roads.append(entry)
    return {
        "frame_id": snapshot.frame_id,
        "command": snapshot.command,
        "ego": _actor_to_dict(snapshot.ego),
        "actors": [_actor_to_dict(a) for a in snapshot.actors],
        "objects": [
            {
                "id": d.id,
                "class": d.node_class.value,
                "x": d.x,
                "y": d.y,
                "lane_ids": list(d.lane_ids),
            }
            for d in snapshot.objects
        ],
        "lanes": lanes,
        "roads": roads,
        "junctions": list(snapshot.junctions),
    }


def scan_jsonl(path: str | Path) -> Iterator[tuple[int, SceneSnapshot | None, str | None]]:
    """Yield (line_number, snapshot, error) per record; bad records carry an error
    message instead of a snapshot so callers can keep processing the rest."""
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                yield line_no, None, f"invalid JSON: {exc.msg}"
                continue
            try:
                snapshot = snapshot_from_dict(record)
            except SnapshotError as exc:
                yield line_no, None, str(exc)
                continue
            problems = validate_snapshot(snapshot)
            if problems:
                yield line_no, None, "; ".join(problems)
            else:
                yield line_no, snapshot, None


def read_jsonl(path: str | Path) -> Iterator[tuple[int, SceneSnapshot]]:
    """Yield (line_number, snapshot) pairs; raises SnapshotError on the first bad record."""
    for line_no, snapshot, error in scan_jsonl(path):
        if error is not None:
            raise SnapshotError(f"line {line_no}: {error}")
        assert snapshot is not None
        yield line_no, snapshot


def write_jsonl(snapshots: Iterable[SceneSnapshot], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for snapshot in snapshots:
            handle.write(json.dumps(snapshot_to_dict(snapshot)) + "\n")

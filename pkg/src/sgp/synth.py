"""Seeded generator of valid scene snapshots for property tests and corpora.

Streams are drawn from a Philox 4x64 counter-based generator keyed by
(seed, scene index), so every scene is a pure function of those two values
and scenes can be generated independently in any order.

Geometry is deliberately simple: straight roads chained along +x, parallel
lanes spaced one lane width apart, the lower half of each road's lanes
heading forward and the rest opposing (so any road with two or more lanes
contains an opposing neighbor pair). Actors are placed on lane centerlines
inside the ego's visible band; devices attach to random lanes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import NodeClass
from .snapshot import (
    ActorState,
    DeviceState,
    LaneNeighbor,
    LaneSpec,
    RoadSpec,
    SceneSnapshot,
)

LANE_WIDTH_M = 3.5
ROAD_DIRECTION_RAD = 0.0

_ACTOR_CLASSES = (
    NodeClass.CAR,
    NodeClass.VAN,
    NodeClass.TAXI,
    NodeClass.ELECTRIC_VEHICLE,
    NodeClass.TRUCK,
    NodeClass.BUS,
    NodeClass.MOTORCYCLE,
    NodeClass.BICYCLE,
    NodeClass.EMERGENCY,
    NodeClass.PEDESTRIAN,
)
_DEVICE_CLASSES = (NodeClass.TRAFFIC_LIGHT, NodeClass.SPEED_LIMIT, NodeClass.STOP_SIGN)

_COMMANDS = (
    "Follow the road.",
    "Turn left at the next intersection.",
    "Turn right at the next intersection.",
    "Go straight through the intersection.",
    "Change to the left lane.",
    "Change to the right lane.",
    "Stop at the next stop sign.",
    "Keep your lane and maintain speed.",
)

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_roads: tuple[int, int] = (2, 6)
    lanes_per_road: tuple[int, int] = (1, 4)
    n_actors: tuple[int, int] = (0, 12)
    n_devices: tuple[int, int] = (0, 4)
    junction_probability: float = 0.3
    area_m: float = 200.0

    def __post_init__(self) -> None:
        for name, (lo, hi) in (
            ("n_roads", self.n_roads),
            ("lanes_per_road", self.lanes_per_road),
            ("n_actors", self.n_actors),
            ("n_devices", self.n_devices),
        ):
            if lo > hi or lo < 0:
                raise ValueError(f"{name} range ({lo}, {hi}) is empty or negative")
        if self.n_roads[0] < 1 or self.lanes_per_road[0] < 1:
            raise ValueError("need at least one road and one lane per road")
        if not 0.0 <= self.junction_probability <= 1.0:
            raise ValueError("junction_probability must be within [0, 1]")
        if self.area_m <= 0:
            raise ValueError("area_m must be positive")


def _rng(config: SynthConfig, index: int) -> np.random.Generator:
    key = np.array([config.seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _sample(rng: np.random.Generator, bounds: tuple[int, int]) -> int:
    return int(rng.integers(bounds[0], bounds[1] + 1))


def _sample_sparse(rng: np.random.Generator, bounds: tuple[int, int]) -> int:
    # min of two draws: skews toward sparse traffic so pairwise interaction
    # edges do not dominate the token mass of the full graph
    return min(_sample(rng, bounds), _sample(rng, bounds))


def synth_scene(config: SynthConfig, index: int) -> SceneSnapshot:
    """Deterministic snapshot for (config.seed, index)."""
    if index < 0:
        raise ValueError("index must be nonnegative")
    rng = _rng(config, index)

    n_roads = _sample(rng, config.n_roads)
    road_len = config.area_m / n_roads
    lanes_per_road = [_sample(rng, config.lanes_per_road) for _ in range(n_roads)]
    forward_counts = [-(-k // 2) for k in lanes_per_road]  # lower half heads +x

    junctions: list[str] = []
    roads: list[RoadSpec] = []
    for i in range(n_roads):
        junction_id = None
        if rng.random() < config.junction_probability:
            junction_id = f"junction_{len(junctions) + 1}"
            junctions.append(junction_id)
        roads.append(RoadSpec(id=f"road_{i + 1}", junction_id=junction_id))

    # lane_grid[i][j]: lane id of slot j on road i
    lane_grid: list[list[str]] = []
    counter = 0
    for i in range(n_roads):
        row = []
        for _ in range(lanes_per_road[i]):
            counter += 1
            row.append(f"lane_{counter}")
        lane_grid.append(row)

    def is_forward(i: int, j: int) -> bool:
        return j < forward_counts[i]

    lanes: list[LaneSpec] = []
    lane_geometry: dict[str, tuple[float, float, float, bool]] = {}
    for i in range(n_roads):
        x0, x1 = i * road_len, (i + 1) * road_len
        for j, lane_id in enumerate(lane_grid[i]):
            y = j * LANE_WIDTH_M
            forward = is_forward(i, j)
            points = [(x0, y), ((x0 + x1) / 2.0, y), (x1, y)]
            if not forward:
                points.reverse()
            successors = []
            if forward and i + 1 < n_roads and j < len(lane_grid[i + 1]):
                if is_forward(i + 1, j):
                    successors.append(lane_grid[i + 1][j])
            if not forward and i > 0 and j < len(lane_grid[i - 1]):
                if not is_forward(i - 1, j):
                    successors.append(lane_grid[i - 1][j])
            # +y is to the left when heading +x, to the right when heading -x
            upper = lane_grid[i][j + 1] if j + 1 < len(lane_grid[i]) else None
            lower = lane_grid[i][j - 1] if j > 0 else None
            if forward:
                left_id, right_id = upper, lower
                left_j, right_j = j + 1, j - 1
            else:
                left_id, right_id = lower, upper
                left_j, right_j = j - 1, j + 1
            left = (
                LaneNeighbor(left_id, is_forward(i, left_j) == forward)
                if left_id is not None
                else None
            )
            right = (
                LaneNeighbor(right_id, is_forward(i, right_j) == forward)
                if right_id is not None
                else None
            )
            lanes.append(
                LaneSpec(
                    id=lane_id,
                    road_id=roads[i].id,
                    centerline=tuple(points),
                    width=LANE_WIDTH_M,
                    successors=tuple(successors),
                    left_neighbor=left,
                    right_neighbor=right,
                )
            )
            lane_geometry[lane_id] = (x0, x1, y, forward)

    def place_on(lane_id: str, x: float, jitter: float) -> tuple[float, float, float]:
        x0, x1, y, forward = lane_geometry[lane_id]
        x = float(np.clip(x, x0, x1))
        heading = ROAD_DIRECTION_RAD if forward else ROAD_DIRECTION_RAD + np.pi
        heading += rng.normal(0.0, 0.05)
        return x, float(y + jitter), float(heading)

    ego_road = int(rng.integers(0, n_roads))
    ego_lane = str(rng.choice(lane_grid[ego_road]))
    ego_x = float(rng.uniform(ego_road * road_len, (ego_road + 1) * road_len))
    ex, ey, eyaw = place_on(ego_lane, ego_x, 0.0)
    ego = ActorState(
        id="ego",
        node_class=NodeClass.EGO,
        x=ex,
        y=ey,
        yaw=eyaw,
        lane_id=ego_lane if rng.random() < 0.5 else None,
    )

    # actors stay inside the ego's visible band: |dx| <= 22 and |dy| <= ~11
    window = 22.0
    reachable = [
        lane.id
        for lane in lanes
        if lane_geometry[lane.id][0] <= ex + window
        and lane_geometry[lane.id][1] >= ex - window
    ]
    actors: list[ActorState] = []
    class_counters: dict[str, int] = {}
    for _ in range(_sample_sparse(rng, config.n_actors)):
        node_class = _ACTOR_CLASSES[int(rng.integers(0, len(_ACTOR_CLASSES)))]
        class_counters[node_class.value] = class_counters.get(node_class.value, 0) + 1
        lane_id = str(rng.choice(reachable))
        x = float(rng.uniform(ex - window, ex + window))
        jitter = float(rng.uniform(-0.3, 0.3))
        ax, ay, ayaw = place_on(lane_id, x, jitter)
        if np.hypot(ax - ex, ay - ey) > 24.9:
            # unusually wide custom layouts fall back to the ego lane nearby
            lane_id = ego_lane
            ax, ay, ayaw = place_on(lane_id, ex + (x % 5.0) - 2.5, jitter)
        actors.append(
            ActorState(
                id=f"{node_class.value}_{class_counters[node_class.value]}",
                node_class=node_class,
                x=ax,
                y=ay,
                yaw=ayaw,
                lane_id=lane_id if rng.random() < 0.5 else None,
            )
        )

    devices: list[DeviceState] = []
    device_counters: dict[str, int] = {}
    for _ in range(_sample(rng, config.n_devices)):
        node_class = _DEVICE_CLASSES[int(rng.integers(0, len(_DEVICE_CLASSES)))]
        device_counters[node_class.value] = device_counters.get(node_class.value, 0) + 1
        anchor = str(rng.choice([lane.id for lane in lanes]))
        lane_ids = [anchor]
        if node_class is NodeClass.TRAFFIC_LIGHT and rng.random() < 0.5:
            road_of = next(l for l in lanes if l.id == anchor).road_id
            siblings = [l.id for l in lanes if l.road_id == road_of and l.id != anchor]
            if siblings:
                lane_ids.append(str(rng.choice(siblings)))
        x0, x1, y, forward = lane_geometry[anchor]
        devices.append(
            DeviceState(
                id=f"{node_class.value}_{device_counters[node_class.value]}",
                node_class=node_class,
                x=float(x1 if forward else x0),
                y=float(y - LANE_WIDTH_M),
                lane_ids=tuple(lane_ids),
            )
        )

    return SceneSnapshot(
        frame_id=f"frame_{index:06d}",
        command=str(rng.choice(_COMMANDS)),
        ego=ego,
        actors=tuple(actors),
        objects=tuple(devices),
        lanes=tuple(lanes),
        roads=tuple(roads),
        junctions=tuple(junctions),
    )


def synth_corpus(config: SynthConfig, n: int) -> list[SceneSnapshot]:
    """Scenes for indices 0..n-1 under one seed."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return [synth_scene(config, i) for i in range(n)]

import random

import pytest

from sgp import (
    Abstraction,
    CardinalityError,
    DuplicateEdgeError,
    Edge,
    GraphError,
    Node,
    NodeClass,
    NodeGroup,
    RelationGroup,
    RelationLabel,
    SceneGraph,
    TypingError,
    add_edge,
    graph_equal,
    remove_edge,
    typing_allows,
    validate_typing,
)
from graphgen import random_full_graph


def two_actor_graph():
    return SceneGraph(
        frame_id="t",
        nodes=(Node("ego", NodeClass.EGO), Node("car_1", NodeClass.CAR)),
        edges=(),
    )


def test_vocabulary_is_closed():
    assert len(NodeClass) == 17
    assert len(RelationLabel) == 17
    by_group = {}
    for label in RelationLabel:
        by_group.setdefault(label.group, []).append(label)
    assert len(by_group[RelationGroup.PROXIMITY]) == 6
    assert len(by_group[RelationGroup.DIRECTIONAL]) == 4
    assert len(by_group[RelationGroup.LATERAL]) == 2
    assert len(by_group[RelationGroup.HIERARCHICAL]) == 1
    assert len(by_group[RelationGroup.TOPOLOGICAL]) == 3
    assert len(by_group[RelationGroup.REGULATORY]) == 1


def test_display_round_trip_is_identity():
    for label in RelationLabel:
        assert RelationLabel.from_display(label.display) is label


def test_class_groups_are_disjoint_and_complete():
    groups = {g: [c for c in NodeClass if c.group is g] for g in NodeGroup}
    assert len(groups[NodeGroup.STRUCTURAL]) == 3
    assert len(groups[NodeGroup.ACTOR]) == 11
    assert len(groups[NodeGroup.OBJECT]) == 3


def test_node_id_format_enforced():
    Node("car_1", NodeClass.CAR)
    Node("traffic_light_12", NodeClass.TRAFFIC_LIGHT)
    with pytest.raises(GraphError):
        Node("car_0", NodeClass.CAR)
    with pytest.raises(GraphError):
        Node("car1", NodeClass.CAR)
    with pytest.raises(GraphError):
        Node("lane_1", NodeClass.CAR)
    with pytest.raises(GraphError):
        Node("ego_1", NodeClass.EGO)
    Node("ego", NodeClass.EGO)


def test_duplicate_node_ids_rejected():
    with pytest.raises(GraphError):
        SceneGraph(
            frame_id="t",
            nodes=(Node("car_1", NodeClass.CAR), Node("car_1", NodeClass.CAR)),
            edges=(),
        )


def test_add_edge_different_groups_coexist():
    g = two_actor_graph()
    g = add_edge(g, "car_1", "ego", RelationLabel.NEAR)
    g = add_edge(g, "car_1", "ego", RelationLabel.DIRECT_FRONT)
    assert len(g.edges) == 2


def test_add_edge_duplicate_rejected():
    g = add_edge(two_actor_graph(), "car_1", "ego", RelationLabel.NEAR)
    with pytest.raises(DuplicateEdgeError):
        add_edge(g, "car_1", "ego", RelationLabel.NEAR)


def test_add_edge_second_proximity_label_rejected():
    g = add_edge(two_actor_graph(), "car_1", "ego", RelationLabel.NEAR)
    with pytest.raises(CardinalityError):
        add_edge(g, "car_1", "ego", RelationLabel.VERY_NEAR)


def test_add_edge_typing_violation_rejected():
    g = two_actor_graph()
    with pytest.raises(TypingError):
        add_edge(g, "car_1", "ego", RelationLabel.IS_IN)


def test_add_edge_leaves_input_untouched():
    g = two_actor_graph()
    add_edge(g, "car_1", "ego", RelationLabel.NEAR)
    assert g.edges == ()


def test_add_then_remove_restores_graph():
    g = two_actor_graph()
    g2 = remove_edge(add_edge(g, "car_1", "ego", RelationLabel.NEAR), "car_1", "ego", RelationLabel.NEAR)
    assert graph_equal(g, g2)


def test_graph_equal_cases():
    g = add_edge(two_actor_graph(), "car_1", "ego", RelationLabel.NEAR)
    assert graph_equal(g, g)
    changed = remove_edge(g, "car_1", "ego", RelationLabel.NEAR)
    changed = add_edge(changed, "car_1", "ego", RelationLabel.VERY_NEAR)
    assert not graph_equal(g, changed)


def test_graph_equal_ignores_edge_order_and_attrs():
    nodes = (Node("ego", NodeClass.EGO), Node("car_1", NodeClass.CAR))
    e1 = Edge("car_1", "ego", RelationLabel.NEAR)
    e2 = Edge("car_1", "ego", RelationLabel.DIRECT_FRONT)
    a = SceneGraph(frame_id="a", nodes=nodes, edges=(e1, e2))
    b = SceneGraph(
        frame_id="b",
        nodes=(Node("car_1", NodeClass.CAR, attrs={"state": "red"}), Node("ego", NodeClass.EGO)),
        edges=(e2, e1),
    )
    assert graph_equal(a, b)


def test_typing_matrix_full_examples():
    # membership row is allowed, regulatory edges only from traffic lights
    assert typing_allows(NodeClass.CAR, RelationLabel.IS_IN, NodeClass.LANE, Abstraction.FULL)
    assert not typing_allows(
        NodeClass.SPEED_LIMIT, RelationLabel.CONTROLS_TRAFFIC_OF, NodeClass.LANE, Abstraction.FULL
    )
    assert not typing_allows(
        NodeClass.STOP_SIGN, RelationLabel.CONTROLS_TRAFFIC_OF, NodeClass.LANE, Abstraction.FULL
    )


def test_typing_matrix_road_level_examples():
    assert not typing_allows(
        NodeClass.LANE, RelationLabel.LANE_CHANGE, NodeClass.LANE, Abstraction.ROAD_LEVEL
    )
    assert typing_allows(
        NodeClass.ROAD, RelationLabel.TRAVELS_TO, NodeClass.ROAD, Abstraction.ROAD_LEVEL
    )
    assert typing_allows(
        NodeClass.TRAFFIC_LIGHT, RelationLabel.CONTROLS_TRAFFIC_OF, NodeClass.ROAD, Abstraction.ROAD_LEVEL
    )


def test_validate_typing_flags_only_bad_edges():
    g = SceneGraph(
        frame_id="t",
        nodes=(
            Node("ego", NodeClass.EGO),
            Node("lane_1", NodeClass.LANE),
            Node("road_1", NodeClass.ROAD),
            Node("speed_limit_1", NodeClass.SPEED_LIMIT),
        ),
        edges=(
            Edge("ego", "lane_1", RelationLabel.IS_IN),
            Edge("lane_1", "road_1", RelationLabel.IS_IN),
            Edge("speed_limit_1", "lane_1", RelationLabel.CONTROLS_TRAFFIC_OF),
        ),
    )
    violations = validate_typing(g)
    assert len(violations) == 1
    assert violations[0].edge.source == "speed_limit_1"


def test_random_graphs_are_typing_clean():
    rng = random.Random(7)
    for _ in range(50):
        assert validate_typing(random_full_graph(rng)) == []

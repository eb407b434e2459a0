"""Traffic scene graph toolkit: construction, abstraction, serialization,
prompt injection, and token budgeting."""

from .abstraction import (
    AbstractionError,
    abstract,
    lift_oracle,
    to_actor_only,
    to_road_level,
)
from .extraction import (
    DEFAULT_CONFIG,
    ExtractionConfig,
    ExtractionError,
    assign_membership,
    build_graph,
    directional_sector,
    lateral_relation,
    proximity_band,
)
from .graph import (
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
    Violation,
    add_edge,
    graph_equal,
    remove_edge,
    typing_allows,
    validate_typing,
)
from .prompting import (
    PromptBundle,
    PromptError,
    Template,
    render,
    render_v1,
    render_v2,
    render_v3,
    render_without_graph,
)
from .serialization import (
    Format,
    SerializationError,
    SerializedGraph,
    Statement,
    canonical_order,
    parse_json,
    parse_yaml,
    serialize,
    serialize_json,
    serialize_text,
    serialize_yaml,
    text_statements,
)
from .snapshot import (
    ActorState,
    DeviceState,
    LaneNeighbor,
    LaneSpec,
    RoadSpec,
    SceneSnapshot,
    SnapshotError,
    read_jsonl,
    snapshot_from_dict,
    snapshot_to_dict,
    validate_snapshot,
    write_jsonl,
)
from .synth import SynthConfig, synth_corpus, synth_scene
from .tokenstats import (
    CellStats,
    CorpusStats,
    TokenStatsError,
    body_digest,
    corpus_stats,
    count_tokens,
    external_token_counts,
    register_tokenizer,
    serialize_corpus,
    stats_to_csv,
    stats_to_json,
)

__version__ = "0.1.0"

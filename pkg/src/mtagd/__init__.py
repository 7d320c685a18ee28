"""mtagd: design multi-task model architectures from a task knowledge graph.

Pipeline: aggregate per-paper transfer records into a weighted knowledge
graph, pick the auxiliary tasks that connect the user's tasks, then derive
the architecture graph (information passes and parameter sharing) from the
selected subgraph. Everything is deterministic and serializable.
"""

__version__ = "0.1.0"

from .connect import (
    ConnectionPlan,
    brute_force_connect,
    connect_exact,
    connect_greedy,
)
from .design import (
    Classification,
    DesignReport,
    ModuleKind,
    ModuleRef,
    Mtag,
    SharePolicy,
    SharingGroups,
    classify,
    dec,
    design,
    enc,
    evaluate_sharing,
    sharing_groups,
    validate_mtag,
)
from .dot import mtag_to_dot, mtkg_to_dot
from .errors import (
    DecoderCycleError,
    DocumentError,
    MtagdError,
    OracleSizeError,
    RecordParseError,
    UnknownTaskError,
)
from .ingest import (
    PaperRecord,
    TransferAssertion,
    aggregate,
    build_seed_dataset,
    load_records,
    parse_records,
    seed_corpus_path,
)
from .model import (
    EdgeWeights,
    Mtkg,
    MtkgStats,
    TaskInfo,
    graph_from_edges,
    is_bidirectional,
    stats,
    undirected_view,
    validate_mtkg,
)
from .serialize import load_mtag, load_mtkg, save_mtag, save_mtkg

__all__ = [
    "Classification",
    "ConnectionPlan",
    "DecoderCycleError",
    "DesignReport",
    "DocumentError",
    "EdgeWeights",
    "ModuleKind",
    "ModuleRef",
    "Mtag",
    "MtagdError",
    "Mtkg",
    "MtkgStats",
    "OracleSizeError",
    "PaperRecord",
    "RecordParseError",
    "SharePolicy",
    "SharingGroups",
    "TaskInfo",
    "TransferAssertion",
    "UnknownTaskError",
    "aggregate",
    "brute_force_connect",
    "build_seed_dataset",
    "classify",
    "connect_exact",
    "connect_greedy",
    "dec",
    "design",
    "enc",
    "evaluate_sharing",
    "graph_from_edges",
    "is_bidirectional",
    "load_mtag",
    "load_mtkg",
    "load_records",
    "mtag_to_dot",
    "mtkg_to_dot",
    "parse_records",
    "save_mtag",
    "save_mtkg",
    "seed_corpus_path",
    "sharing_groups",
    "stats",
    "undirected_view",
    "validate_mtkg",
    "validate_mtag",
]

"""spcsim: offloading decision engine and proximity-cloud simulator.

Applications are call graphs; the decision engine expands them over the
currently visible devices and picks an assignment with an ant colony (or,
in cache modes, by string-matching previously observed decisions).  The
simulator replays whole scenarios - device fleets, churn, cache sharing -
deterministically from a single seed.
"""

from .aco import AcoParams, aco_partition, brute_force_partition, decide_next
from .cache import CachePolicies, DecisionCache, ExecutionTrail
from .context import (
    BucketingConfig,
    ContextSignature,
    DeviceProfile,
    Link,
    SpcTopology,
    make_signature,
    signature_distance,
    transfer_time,
)
from .expand import EdgeCost, ExpandedGraph, edge_cost, expand, path_cost
from .graph import CallGraph, MethodNode, benchmark, build_graph, topo_order
from .scenario import ScenarioConfig, load_scenario, parse_config
from .simulator import MetricsRecord, run_scenario, write_artifacts

__version__ = "0.1.0"

__all__ = [
    "AcoParams", "aco_partition", "brute_force_partition", "decide_next",
    "CachePolicies", "DecisionCache", "ExecutionTrail",
    "BucketingConfig", "ContextSignature", "DeviceProfile", "Link", "SpcTopology",
    "make_signature", "signature_distance", "transfer_time",
    "EdgeCost", "ExpandedGraph", "edge_cost", "expand", "path_cost",
    "CallGraph", "MethodNode", "benchmark", "build_graph", "topo_order",
    "ScenarioConfig", "load_scenario", "parse_config",
    "MetricsRecord", "run_scenario", "write_artifacts",
    "__version__",
]

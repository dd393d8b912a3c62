"""Application call graphs and the built-in benchmark presets.

A call graph is a DAG of method nodes; edges are invocation dependencies and
carry the number of bytes the predecessor hands to that successor.  Work is
expressed in abstract units so graphs stay device-independent; a device's
speed (units/ms) converts it to time.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

from .rng import mix64, next_u64, stream_state


class GraphError(ValueError):
    pass


class CycleDetected(GraphError):
    pass


class DanglingEdge(GraphError):
    pass


class NoEntryOrExit(GraphError):
    pass


class UnknownBenchmark(GraphError):
    pass


@dataclass
class MethodNode:
    """One application method: its compute work and the bytes it emits.

    `out_data` maps successor method id -> bytes produced for that successor.
    Pinned methods must run on the device that started the application.
    """

    id: str
    compute_work: float = 0.0
    pinned: bool = False
    out_data: dict[str, int] = field(default_factory=dict)

    def validate(self):
        if self.compute_work < 0:
            raise GraphError(f"method {self.id}: compute_work must be >= 0")
        for succ, nbytes in self.out_data.items():
            if nbytes < 0:
                raise GraphError(f"method {self.id}: out_data[{succ}] must be >= 0")


@dataclass
class CallGraph:
    nodes: list[MethodNode]
    edges: set[tuple[str, str]]
    entry: str
    exit: str

    def node(self, mid: str) -> MethodNode:
        return self._by_id[mid]

    def __post_init__(self):
        self._by_id = {n.id: n for n in self.nodes}

    @property
    def method_ids(self) -> list[str]:
        return [n.id for n in self.nodes]


def build_graph(nodes, edges) -> CallGraph:
    """Validate and assemble a CallGraph.

    Requires unique ids, edge endpoints that exist, acyclicity, and exactly
    one source / one sink (which become entry and exit and are force-pinned).
    In a finite DAG with a unique source and sink every node lies on some
    entry-to-exit path, so no separate reachability check is needed.
    """
    nodes = list(nodes)
    edges = set(tuple(e) for e in edges)
    ids = [n.id for n in nodes]
    if len(set(ids)) != len(ids):
        raise GraphError("duplicate method ids")
    if not nodes:
        raise NoEntryOrExit("graph has no nodes")
    known = set(ids)
    for u, v in edges:
        if u not in known or v not in known:
            raise DanglingEdge(f"edge ({u}, {v}) references unknown method")
        if u == v:
            raise CycleDetected(f"self-loop on {u}")
    for n in nodes:
        n.validate()
        for succ in n.out_data:
            if (n.id, succ) not in edges:
                raise DanglingEdge(f"method {n.id} declares out_data for non-successor {succ}")

    if len(_kahn(ids, edges)) != len(nodes):
        raise CycleDetected("graph contains a cycle")

    indeg = {i: 0 for i in ids}
    outdeg = {i: 0 for i in ids}
    for u, v in edges:
        indeg[v] += 1
        outdeg[u] += 1
    sources = [i for i in ids if indeg[i] == 0]
    sinks = [i for i in ids if outdeg[i] == 0]
    if len(sources) != 1 or len(sinks) != 1:
        raise NoEntryOrExit(f"need exactly one entry and one exit, got {sources} / {sinks}")

    g = CallGraph(nodes=nodes, edges=edges, entry=sources[0], exit=sinks[0])
    g.node(g.entry).pinned = True
    g.node(g.exit).pinned = True
    return g


def _kahn(ids, edges) -> list[str]:
    """Kahn's algorithm with a heap: lexicographic tie-breaking."""
    indeg = {i: 0 for i in ids}
    succs: dict[str, list[str]] = {i: [] for i in ids}
    for u, v in edges:
        indeg[v] += 1
        succs[u].append(v)
    ready = [i for i, d in indeg.items() if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        cur = heapq.heappop(ready)
        order.append(cur)
        for v in succs[cur]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(ready, v)
    return order


def topo_order(g: CallGraph) -> list[str]:
    """Topological order of a call graph; entry first, exit last."""
    order = _kahn(g.method_ids, g.edges)
    if len(order) != len(g.method_ids):
        raise CycleDetected("graph contains a cycle")
    return order


# --------------------------------------------------------------------------
# Benchmark presets.
#
# Method costs are calibrated constants: work units and bytes were chosen so
# that, under the five-device calibration scenario, the cheap high-traffic
# methods are never worth offloading while the heavy low-traffic ones are.
# Spines are chains; the extra `skips` edges only add DAG shape and carry no
# data.  Heavy work gets a +/-3% integer jitter from the seed; topology and
# light methods are seed-invariant.
#
#   integral     A -> B -> D -> C      B heavy;          D cheap, big output
#   determinant  A -> B -> C -> D -> E D heavy;          B, C cheap, big data
#   montecarlo   m00 .. m17 chain      m07..m10 heavy;   the rest cheap
#   facerec      f00 .. f19 chain      f03/f07/f11/f15/f17 heavy
# --------------------------------------------------------------------------

_JITTER_PCT = 0.03

_PRESETS: dict[str, dict] = {
    "integral": {
        "chain": ["A", "B", "D", "C"],
        "work": {"A": 6, "B": 2500, "D": 1, "C": 6},
        "data": {("A", "B"): 3000, ("B", "D"): 4000, ("D", "C"): 700_000},
        "heavy": {"B"},
        "skips": [],
    },
    "determinant": {
        "chain": ["A", "B", "C", "D", "E"],
        "work": {"A": 6, "B": 1, "C": 1, "D": 4000, "E": 6},
        "data": {("A", "B"): 900_000, ("B", "C"): 800_000, ("C", "D"): 3000, ("D", "E"): 2000},
        "heavy": {"D"},
        "skips": [],
    },
    "montecarlo": {
        "chain": [f"m{i:02d}" for i in range(18)],
        "work": dict(
            {f"m{i:02d}": 1 for i in range(18)},
            m00=6, m07=290, m08=290, m09=290, m10=290, m17=6,
        ),
        "data": {(f"m{i:02d}", f"m{i + 1:02d}"): 2000 for i in range(17)},
        "heavy": {"m07", "m08", "m09", "m10"},
        "skips": [("m01", "m05"), ("m06", "m11")],
    },
    "facerec": {
        "chain": [f"f{i:02d}" for i in range(20)],
        "work": dict(
            {f"f{i:02d}": 1 for i in range(20)},
            f00=6, f03=250, f07=250, f11=250, f15=250, f17=250, f19=6,
        ),
        "data": {(f"f{i:02d}", f"f{i + 1:02d}"): 2000 for i in range(19)},
        "heavy": {"f03", "f07", "f11", "f15", "f17"},
        "skips": [("f02", "f06"), ("f08", "f14"), ("f12", "f18")],
    },
}

BENCHMARK_NAMES = tuple(sorted(_PRESETS))


def benchmark(name: str, seed: int) -> CallGraph:
    """Deterministic benchmark graph for (name, seed)."""
    try:
        preset = _PRESETS[name]
    except KeyError:
        raise UnknownBenchmark(f"unknown benchmark {name!r}; known: {BENCHMARK_NAMES}") from None

    chain = preset["chain"]
    state = stream_state(seed, mix64(sum(ord(c) for c in name)))
    nodes = []
    for i, mid in enumerate(chain):
        work = preset["work"][mid]
        if mid in preset["heavy"]:
            span = max(1, round(work * _JITTER_PCT))
            off, state = next_u64(state)
            work = work + int(off % (2 * span + 1)) - span
        nodes.append(MethodNode(id=mid, compute_work=float(work)))
    edges = set()
    for i in range(len(chain) - 1):
        u, v = chain[i], chain[i + 1]
        edges.add((u, v))
    for (u, v), nbytes in preset["data"].items():
        next(n for n in nodes if n.id == u).out_data[v] = nbytes
    for u, v in preset["skips"]:
        edges.add((u, v))
    return build_graph(nodes, edges)


# --------------------------------------------------------------------------
# Graph file format: JSON with top-level keys nodes / edges / entry / exit.
# Bytes and work units are integers in the file.
# --------------------------------------------------------------------------


def graph_to_json(g: CallGraph) -> str:
    def as_int(x, what):
        if x != int(x):
            raise GraphError(f"{what} must be an integer in the graph file format, got {x}")
        return int(x)

    doc = {
        "nodes": [
            {
                "id": n.id,
                "work": as_int(n.compute_work, f"work of {n.id}"),
                "pinned": n.pinned,
                "out_data": {k: as_int(v, f"out_data of {n.id}") for k, v in sorted(n.out_data.items())},
            }
            for n in g.nodes
        ],
        "edges": sorted([u, v] for u, v in g.edges),
        "entry": g.entry,
        "exit": g.exit,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def graph_from_json(text: str) -> CallGraph:
    doc = json.loads(text)
    nodes = [
        MethodNode(
            id=nd["id"],
            compute_work=float(nd["work"]),
            pinned=bool(nd.get("pinned", False)),
            out_data={k: int(v) for k, v in nd.get("out_data", {}).items()},
        )
        for nd in doc["nodes"]
    ]
    g = build_graph(nodes, {(u, v) for u, v in doc["edges"]})
    if g.entry != doc["entry"] or g.exit != doc["exit"]:
        raise GraphError("entry/exit in file do not match graph structure")
    return g

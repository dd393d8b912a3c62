"""Expansion of a call graph into the layered decision graph.

Each offloadable method is duplicated once per device in the topology; pinned
methods keep a single copy on the source.  Methods are laid out in topological
order and execution is treated as sequential, so picking one node per layer is
exactly an assignment and the cheapest start-to-end path is the optimal
partition.

Edge weights are bi-objective: execution time (compute on the executor plus
transfer of the bytes handed over on the hop) and CPU work charged to the
source device (the full method work when it runs locally, a small marshalling
charge per byte when it runs remotely).  The scalar weight is the weighted sum
of both objectives after normalizing each by its maximum over the expansion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .context import SpcTopology, transfer_time
from .graph import CallGraph, MethodNode, topo_order

# Work units charged to the source per byte marshalled to a remote executor.
MARSHAL_CPU_PER_BYTE = 1e-4


class ExpandError(ValueError):
    pass


class NoCandidates(ExpandError):
    pass


class ZeroEffectiveSpeed(ExpandError):
    pass


class InconsistentAssignment(ExpandError):
    pass


@dataclass
class EdgeCost:
    time: float  # ms
    cpu: float  # work units charged to the source
    scalar: float


def edge_cost(
    method: MethodNode,
    prev_device: str,
    exec_device: str,
    topology: SpcTopology,
    lam: float,
    bytes_in: int = 0,
    t_norm: float = 1.0,
    c_norm: float = 1.0,
    source_id: str | None = None,
) -> EdgeCost:
    """Cost of executing `method` on `exec_device` right after `prev_device`.

    `bytes_in` is what the predecessor method hands to this one; expansion
    passes it from the call graph.  `t_norm`/`c_norm` are the per-expansion
    normalization constants (max time / max cpu over all edges).
    """
    dev = topology.device(exec_device)
    eff = dev.effective_speed()
    if eff <= 0.0:
        raise ZeroEffectiveSpeed(f"device {exec_device} has no spare capacity (load=1)")
    time = method.compute_work / eff + transfer_time(bytes_in, topology.link(prev_device, exec_device))
    src = source_id or topology.source.id
    if exec_device == src:
        cpu = method.compute_work
    else:
        cpu = MARSHAL_CPU_PER_BYTE * bytes_in
    scalar = lam * (time / t_norm if t_norm > 0 else 0.0) + (1.0 - lam) * (cpu / c_norm if c_norm > 0 else 0.0)
    return EdgeCost(time=time, cpu=cpu, scalar=scalar)


class ExpandedGraph:
    """Layered decision graph: one layer per method, one node per device copy.

    `layers[i]` lists the device ids available for method `methods[i]`;
    `time/cpu/scalar[i]` hold the (prev_size x size) edge matrices feeding
    layer i (the virtual start node is a predecessor layer of width one; no
    explicit end node is needed because the exit layer has width one).
    """

    def __init__(self, methods, layers, time, cpu, scalar, lam, t_norm, c_norm, source):
        self.methods: list[str] = methods
        self.layers: list[list[str]] = layers
        self.time: list[np.ndarray] = time
        self.cpu: list[np.ndarray] = cpu
        self.scalar: list[np.ndarray] = scalar
        self.lam = lam
        self.t_norm = t_norm
        self.c_norm = c_norm
        self.source = source

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    def sizes(self) -> np.ndarray:
        return np.array([len(l) for l in self.layers], dtype=np.int64)

    def path_count(self) -> int:
        n = 1
        for l in self.layers:
            n *= len(l)
        return n

    def flat_scalar(self) -> np.ndarray:
        return np.concatenate([m.ravel() for m in self.scalar])

    def assignment_of(self, idx) -> dict[str, str]:
        return {m: self.layers[i][int(idx[i])] for i, m in enumerate(self.methods)}

    def indices_of(self, assignment: dict[str, str]) -> list[int]:
        idx = []
        for i, m in enumerate(self.methods):
            if m not in assignment:
                raise InconsistentAssignment(f"assignment misses method {m}")
            try:
                idx.append(self.layers[i].index(assignment[m]))
            except ValueError:
                raise InconsistentAssignment(
                    f"method {m} assigned to {assignment[m]}, not a layer node"
                ) from None
        return idx


def _layer_devices(node: MethodNode, all_devices: list[str], source: str) -> list[str]:
    if node.pinned:
        return [source]
    return all_devices


def expand(
    g: CallGraph,
    topology: SpcTopology,
    lam: float = 0.5,
    source_id: str | None = None,
) -> ExpandedGraph:
    """Expand a call graph over the topology's devices (source included)."""
    order = topo_order(g)
    seq = [g.node(m) for m in order]
    return expand_sequence(seq, topology, lam, source_id=source_id)


def expand_sequence(
    seq: list[MethodNode],
    topology: SpcTopology,
    lam: float,
    source_id: str | None = None,
    anchor_device: str | None = None,
    first_bytes_in: int = 0,
) -> ExpandedGraph:
    """Expansion core, also used for residual re-decisions.

    `anchor_device` is where the previous (already executed) method ran, and
    `first_bytes_in` what it hands to the first method of `seq`.
    """
    if not topology.devices:
        raise NoCandidates("topology has no devices")
    if not 0.0 <= lam <= 1.0:
        raise ExpandError("lambda must lie in [0,1]")
    source = source_id or topology.source.id
    if source not in topology.devices:
        raise NoCandidates(f"source device {source} not in topology")
    all_devices = [source] + topology.candidates(source)
    anchor = anchor_device or source

    layers = [_layer_devices(n, all_devices, source) for n in seq]

    time_mats, cpu_mats = [], []
    prev_devs = [anchor]
    prev_node: MethodNode | None = None
    for li, node in enumerate(seq):
        devs = layers[li]
        bytes_in = first_bytes_in if li == 0 else prev_node.out_data.get(node.id, 0)
        tm = np.zeros((len(prev_devs), len(devs)))
        cm = np.zeros((len(prev_devs), len(devs)))
        for pi, pd in enumerate(prev_devs):
            for di, d in enumerate(devs):
                c = edge_cost(node, pd, d, topology, lam, bytes_in=bytes_in, source_id=source)
                tm[pi, di] = c.time
                cm[pi, di] = c.cpu
        time_mats.append(tm)
        cpu_mats.append(cm)
        prev_devs = devs
        prev_node = node

    t_norm = max((float(m.max()) for m in time_mats), default=0.0)
    c_norm = max((float(m.max()) for m in cpu_mats), default=0.0)
    scalar_mats = []
    for tm, cm in zip(time_mats, cpu_mats):
        t_part = lam * (tm / t_norm) if t_norm > 0 else np.zeros_like(tm)
        c_part = (1.0 - lam) * (cm / c_norm) if c_norm > 0 else np.zeros_like(cm)
        scalar_mats.append(t_part + c_part)

    return ExpandedGraph(
        methods=[n.id for n in seq],
        layers=layers,
        time=time_mats,
        cpu=cpu_mats,
        scalar=scalar_mats,
        lam=lam,
        t_norm=t_norm,
        c_norm=c_norm,
        source=source,
    )


def path_cost(eg: ExpandedGraph, assignment: dict[str, str]) -> tuple[float, float, float]:
    """(time, cpu, scalar) summed along the path the assignment induces."""
    idx = eg.indices_of(assignment)
    t = c = s = 0.0
    prev = 0
    for i in range(eg.n_layers):
        k = idx[i]
        t += float(eg.time[i][prev, k])
        c += float(eg.cpu[i][prev, k])
        s += float(eg.scalar[i][prev, k])
        prev = k
    return t, c, s

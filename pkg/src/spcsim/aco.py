"""Offloading decisions: ant colony search, exact oracle, per-call re-decision.

`aco_partition` runs a classic Ant System over the expanded graph (iteration-
best pheromone deposit, roulette-wheel choice weighted by tau^alpha *
eta^beta).  `brute_force_partition` enumerates every assignment and is the
verification oracle.  `decide_next` re-expands the not-yet-executed suffix of
a run against the current topology and returns the device for the next method
only, which is what makes decisions dynamic under churn.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import kernels
from .context import SpcTopology
from .expand import ExpandedGraph, expand_sequence
from .graph import CallGraph, topo_order

TAU0 = 1.0
TAU_MIN = 1e-3
ETA0 = 1e-6

BRUTE_FORCE_CAP = 1_000_000


class AcoError(ValueError):
    pass


class EmptyGraph(AcoError):
    pass


class TooLarge(AcoError):
    pass


@dataclass
class AcoParams:
    n_ants: int = 16
    n_iterations: int = 50
    alpha: float = 1.0
    beta: float = 2.0
    rho: float = 0.1
    q: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_ants < 1 or self.n_iterations < 1:
            raise AcoError("n_ants and n_iterations must be >= 1")
        if self.alpha < 0 or self.beta < 0:
            raise AcoError("alpha and beta must be >= 0")
        if not 0.0 < self.rho <= 1.0:
            raise AcoError("rho must lie in (0,1]")
        if self.q <= 0:
            raise AcoError("q must be > 0")


def eval_units(eg_sizes, params: AcoParams) -> int:
    """Roulette evaluations one aco_partition call performs (overhead model)."""
    return params.n_ants * params.n_iterations * int(sum(int(s) for s in eg_sizes))


def aco_partition(eg: ExpandedGraph, params: AcoParams, return_pheromone: bool = False):
    """Best assignment found by the colony and its scalar cost.

    Deterministic for fixed (expansion, params): each (iteration, ant) pair
    draws from its own derived random stream, so results do not depend on
    evaluation order.
    """
    if eg.n_layers == 0:
        raise EmptyGraph("expansion has no layers")
    best_idx, best_cost, tau = kernels.run_colony(
        eg.sizes(),
        eg.flat_scalar(),
        params.n_ants,
        params.n_iterations,
        params.alpha,
        params.beta,
        params.rho,
        params.q,
        TAU0,
        TAU_MIN,
        ETA0,
        params.seed,
    )
    assignment = eg.assignment_of(best_idx)
    if return_pheromone:
        return assignment, float(best_cost), tau
    return assignment, float(best_cost)


def _tie_key(eg: ExpandedGraph, idx, scalar: float):
    """Ordering among equal-cost paths: more local placements first, then
    lexicographic device ids (documented tie-break; makes argmin unique)."""
    devices = tuple(eg.layers[i][k] for i, k in enumerate(idx))
    n_local = sum(1 for d in devices if d == eg.source)
    return (scalar, -n_local, devices)


def brute_force_partition(eg: ExpandedGraph, cap: int = BRUTE_FORCE_CAP):
    """Exact optimum by exhaustive enumeration (verification oracle)."""
    if eg.n_layers == 0:
        raise EmptyGraph("expansion has no layers")
    n_paths = eg.path_count()
    if n_paths > cap:
        raise TooLarge(f"{n_paths} paths exceed the enumeration cap {cap}")

    best_key = None
    best_idx = None
    for idx in itertools.product(*(range(len(l)) for l in eg.layers)):
        s = 0.0
        prev = 0
        for i, k in enumerate(idx):
            s += float(eg.scalar[i][prev, k])
            prev = k
        key = _tie_key(eg, idx, s)
        if best_key is None or key < best_key:
            best_key = key
            best_idx = idx
    return eg.assignment_of(best_idx), best_key[0]


def decide_next(
    g: CallGraph,
    executed: list[tuple[str, str]],
    topology: SpcTopology,
    params: AcoParams,
    lam: float = 0.5,
    source_id: str | None = None,
) -> str:
    """Device for the next method, re-deciding the whole residual suffix.

    `executed` is the (method id, realized device) prefix of the topological
    order.  The residual expansion is anchored at the device of the last
    executed method and fed the bytes it hands over; pheromones are not
    reused across calls because they would encode stale context.
    """
    order = topo_order(g)
    k = len(executed)
    if k >= len(order):
        raise AcoError("all methods already executed")
    for (mid, _), want in zip(executed, order):
        if mid != want:
            raise AcoError(f"executed prefix diverges from topological order at {mid}")

    src = source_id or topology.source.id
    if k == 0:
        anchor, prev_node = src, None
    else:
        anchor = executed[-1][1]
        prev_node = g.node(executed[-1][0])
    nxt = g.node(order[k])
    first_bytes = prev_node.out_data.get(nxt.id, 0) if prev_node is not None else 0

    seq = [g.node(m) for m in order[k:]]
    eg = expand_sequence(
        seq, topology, lam, source_id=src, anchor_device=anchor, first_bytes_in=first_bytes
    )
    assignment, _ = aco_partition(eg, params)
    return assignment[order[k]]

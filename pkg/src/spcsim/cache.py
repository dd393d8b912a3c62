"""Execution-trail cache: storage, string-matching lookup, sharing policies.

A trail records one finished run: the context signature the decisions were
taken under, the realized assignment, the observed cost, and a weight that
counts how often that decision has been (re)used.  Lookup accepts the closest
trail within a distance threshold, so a device can reuse a neighbour's
decision taken under merely similar conditions.

Assignments travel between devices with the sender's own id replaced by
`SOURCE_PLACEHOLDER`; the receiver resolves the placeholder to itself, which
is how "run locally" keeps meaning *the receiver's* local.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .context import BucketingConfig, ContextSignature, signature_distance

SOURCE_PLACEHOLDER = "@source"

MERGE_POLICIES = ("append", "unique", "weighted")
DISSEMINATION_POLICIES = ("on_demand", "periodic", "on_change")
INVALIDATION_POLICIES = ("periodic", "on_change")


class CacheError(ValueError):
    pass


@dataclass
class ExecutionTrail:
    app: str
    signature: ContextSignature
    assignment: dict[str, str]
    observed_cost: tuple[float, float]  # (time ms, cpu work units)
    weight: int = 1
    created_at: float = 0.0

    def __post_init__(self):
        if self.weight < 1:
            raise CacheError("trail weight must be >= 1")

    def key(self):
        """Row identity for unique/weighted merging: the decision itself.
        Observed costs do not distinguish rows."""
        return (self.app, self.signature.tokens, tuple(sorted(self.assignment.items())))

    def rebased(self, old_source: str, new_source: str) -> "ExecutionTrail":
        asg = {m: (new_source if d == old_source else d) for m, d in self.assignment.items()}
        return replace(self, assignment=asg)


@dataclass
class CachePolicies:
    merge: str = "weighted"
    dissemination: str = "on_change"
    dissemination_interval_ms: float = 500.0
    invalidation: str = "periodic"
    invalidation_ttl_ms: float = 1e9
    invalidation_delta: float = 0.3

    def __post_init__(self):
        if self.merge not in MERGE_POLICIES:
            raise CacheError(f"unknown merge policy {self.merge!r}")
        if self.dissemination not in DISSEMINATION_POLICIES:
            raise CacheError(f"unknown dissemination policy {self.dissemination!r}")
        if self.invalidation not in INVALIDATION_POLICIES:
            raise CacheError(f"unknown invalidation policy {self.invalidation!r}")
        if self.dissemination_interval_ms <= 0 or self.invalidation_ttl_ms <= 0:
            raise CacheError("interval and ttl must be > 0")
        if not 0.0 <= self.invalidation_delta <= 1.0:
            raise CacheError("invalidation delta must lie in [0,1]")


@dataclass
class LookupResult:
    trail: ExecutionTrail
    distance: float
    ops: int  # edit-distance cells evaluated while scanning (overhead model)


@dataclass
class DecisionCache:
    capacity: int = 10
    trails: list[ExecutionTrail] = field(default_factory=list)
    checkpoint_signature: ContextSignature | None = None  # for on-change invalidation

    def __post_init__(self):
        if self.capacity < 1:
            raise CacheError("capacity must be >= 1")

    def __len__(self):
        return len(self.trails)

    # -- mutation ----------------------------------------------------------

    def record_trail(self, trail: ExecutionTrail, merge: str = "weighted") -> bool:
        """Insert per the merge policy; returns True when a row was added or
        removed (the cache-content changes that trigger on-change sharing).
        Capacity overflow evicts the oldest row (FIFO)."""
        if merge not in MERGE_POLICIES:
            raise CacheError(f"unknown merge policy {merge!r}")
        if merge != "append":
            for row in self.trails:
                if row.key() == trail.key():
                    if merge == "weighted":
                        row.weight += trail.weight
                        row.observed_cost = trail.observed_cost
                    return False
        self.trails.append(trail)
        while len(self.trails) > self.capacity:
            self.trails.pop(0)
        return True

    def merge_caches(self, incoming, merge: str = "weighted") -> bool:
        """Fold record_trail over incoming trails, in order."""
        changed = False
        for trail in incoming:
            changed |= self.record_trail(trail, merge)
        return changed

    def invalidate(self, policies: CachePolicies, now: float,
                   current_signature: ContextSignature | None = None) -> bool:
        """Apply the invalidation policy; returns True when trails were dropped."""
        if policies.invalidation == "periodic":
            keep = [t for t in self.trails if now - t.created_at <= policies.invalidation_ttl_ms]
            dropped = len(keep) != len(self.trails)
            self.trails = keep
            return dropped
        # on_change: reset everything when the context drifted past delta
        if current_signature is None:
            return False
        if self.checkpoint_signature is None:
            self.checkpoint_signature = current_signature
            return False
        if signature_distance(current_signature, self.checkpoint_signature) > policies.invalidation_delta:
            dropped = bool(self.trails)
            self.trails = []
            self.checkpoint_signature = current_signature
            return dropped
        return False

    # -- lookup ------------------------------------------------------------

    def lookup(self, app: str, signature: ContextSignature, theta: float,
               increment_on_hit: bool = True) -> LookupResult | None:
        """Closest same-app trail within distance theta.

        Ranking: (distance, -weight, observed time, insertion index).  A hit
        increments the trail's weight - reuse counts as a decision taken.
        """
        best = None
        best_rank = None
        ops = 0
        for i, trail in enumerate(self.trails):
            if trail.app != app:
                continue
            ops += max(1, len(signature.tokens) * len(trail.signature.tokens))
            d = signature_distance(signature, trail.signature)
            if d > theta:
                continue
            rank = (d, -trail.weight, trail.observed_cost[0], i)
            if best_rank is None or rank < best_rank:
                best_rank = rank
                best = trail
        if best is None:
            return None
        if increment_on_hit:
            best.weight += 1
        return LookupResult(trail=best, distance=best_rank[0], ops=ops)

    def scan_ops(self, app: str, signature: ContextSignature) -> int:
        """Edit-distance cells a lookup for (app, signature) would evaluate."""
        return sum(
            max(1, len(signature.tokens) * len(t.signature.tokens))
            for t in self.trails
            if t.app == app
        )

    def shareable_trails(self, own_id: str) -> list[ExecutionTrail]:
        """Copies of all trails with the owner's id masked for the receiver."""
        return [t.rebased(own_id, SOURCE_PLACEHOLDER) for t in self.trails]


def resolve_placeholder(trails, receiver_id: str) -> list[ExecutionTrail]:
    return [t.rebased(SOURCE_PLACEHOLDER, receiver_id) for t in trails]


# --------------------------------------------------------------------------
# Dissemination: when does a device send its trails to the neighbourhood?
# The simulator drives a Disseminator with cache events; the pure replay
# helper below turns a recorded event list into send events for tests.
# --------------------------------------------------------------------------


@dataclass
class SendEvent:
    at: float
    kind: str  # cache_share | cache_request


class Disseminator:
    def __init__(self, policies: CachePolicies):
        self.policies = policies

    def on_lookup_miss(self, now: float) -> list[SendEvent]:
        if self.policies.dissemination == "on_demand":
            return [SendEvent(at=now, kind="cache_request")]
        return []

    def on_cache_change(self, now: float) -> list[SendEvent]:
        """Cache content changed by the owner (trail added or trails dropped)."""
        if self.policies.dissemination == "on_change":
            return [SendEvent(at=now, kind="cache_share")]
        return []

    def periodic_ticks(self, horizon_ms: float) -> list[float]:
        if self.policies.dissemination != "periodic":
            return []
        period = self.policies.dissemination_interval_ms
        ticks = []
        t = period
        while t <= horizon_ms:
            ticks.append(t)
            t += period
        return ticks


def dissemination_events(policies: CachePolicies, cache_events, horizon_ms: float) -> list[SendEvent]:
    """Replay recorded cache events into the send events the policy emits.

    `cache_events` is a sequence of (at_ms, kind) with kind in
    {"lookup_miss", "cache_change"}.
    """
    d = Disseminator(policies)
    out = [SendEvent(at=t, kind="cache_share") for t in d.periodic_ticks(horizon_ms)]
    for at, kind in cache_events:
        if kind == "lookup_miss":
            out.extend(d.on_lookup_miss(at))
        elif kind == "cache_change":
            out.extend(d.on_cache_change(at))
        else:
            raise CacheError(f"unknown cache event {kind!r}")
    out.sort(key=lambda e: e.at)
    return out


# --------------------------------------------------------------------------
# Dump / load (JSON, one record per trail, explicit token arrays).
# --------------------------------------------------------------------------


def cache_to_json(cache: DecisionCache) -> str:
    doc = {
        "capacity": cache.capacity,
        "trails": [
            {
                "app": t.app,
                "tokens": list(t.signature.tokens),
                "config_key": t.signature.config_key,
                "assignment": dict(sorted(t.assignment.items())),
                "observed_time_ms": t.observed_cost[0],
                "observed_cpu": t.observed_cost[1],
                "weight": t.weight,
                "created_at": t.created_at,
            }
            for t in cache.trails
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def cache_from_json(text: str) -> DecisionCache:
    doc = json.loads(text)
    cache = DecisionCache(capacity=int(doc["capacity"]))
    for rec in doc["trails"]:
        cache.trails.append(
            ExecutionTrail(
                app=rec["app"],
                signature=ContextSignature(tokens=tuple(rec["tokens"]), config_key=rec["config_key"]),
                assignment=dict(rec["assignment"]),
                observed_cost=(float(rec["observed_time_ms"]), float(rec["observed_cpu"])),
                weight=int(rec["weight"]),
                created_at=float(rec["created_at"]),
            )
        )
    return cache

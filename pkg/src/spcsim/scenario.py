"""Scenario files: the declarative input of a simulation run.

A scenario is a versioned JSON document naming the device fleet and links,
the applications to run (benchmark presets or graph files), the decision
mode, cache policies, decision-overhead model, beaconing, and churn.  Every
random quantity derives from the single `seed`, so a scenario plus a seed
pins the whole run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .aco import AcoParams
from .cache import CachePolicies
from .context import (
    DEVICE_KINDS,
    BucketingConfig,
    DeviceProfile,
    Link,
    SpcTopology,
)
from .graph import BENCHMARK_NAMES, CallGraph, benchmark, graph_from_json

SCHEMA_VERSION = 1
DECISION_MODES = ("aco", "cache_local", "cache_collab")
OVERHEAD_MODES = ("modeled", "measured", "none")


class InvalidConfig(ValueError):
    """Raised with a dotted field path so the CLI can point at the problem."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


_SENTINEL = object()


def _get(d: dict, key: str, path: str, default=_SENTINEL):
    if key in d:
        return d[key]
    if default is _SENTINEL:
        raise InvalidConfig(f"{path}.{key}", "missing required field")
    return default


@dataclass
class DeviceSpec:
    id: str
    kind: str
    speed: float
    load: float = 0.0
    load_jitter: float = 0.0
    battery: float = 1.0
    memory: int = 1 << 30

    def profile(self, load_override: float | None = None) -> DeviceProfile:
        return DeviceProfile(
            id=self.id,
            speed=self.speed,
            load=self.load if load_override is None else load_override,
            battery=self.battery,
            memory=self.memory,
            kind=self.kind,
        )


@dataclass
class LinkSpec:
    a: str
    b: str
    bandwidth: float
    latency: float
    symmetric: bool = True


@dataclass
class AppSpec:
    app_id: str
    runner: str
    repetitions: int
    start_ms: float
    gap_ms: float
    inputs_seed: int
    benchmark: str | None = None
    graph_file: str | None = None

    def build_graph(self, base_dir: Path) -> CallGraph:
        if self.benchmark:
            return benchmark(self.benchmark, self.inputs_seed)
        return graph_from_json((base_dir / self.graph_file).read_text())


@dataclass
class OverheadSpec:
    """Simulated cost of taking a decision.

    `modeled` charges a deterministic cost proportional to the work the
    decision engine does (roulette evaluations for the colony, edit-distance
    cells for cache matching); `measured` charges the wall clock 1:1, which
    is realistic but not reproducible; `none` charges nothing.
    """

    mode: str = "modeled"
    aco_base_ms: float = 0.155
    aco_ms_per_1k_evals: float = 0.0078
    match_base_ms: float = 0.035
    match_ms_per_1k_ops: float = 0.001

    def aco_ms(self, evals: int) -> float:
        return self.aco_base_ms + self.aco_ms_per_1k_evals * evals / 1000.0

    def match_ms(self, ops: int) -> float:
        return self.match_base_ms + self.match_ms_per_1k_ops * ops / 1000.0


@dataclass
class ChurnSpec:
    joins: list[tuple[DeviceSpec, float]] = field(default_factory=list)
    leaves: list[tuple[str, float]] = field(default_factory=list)
    leave_rate_per_ms: float = 0.0  # seeded exponential departures when > 0
    downtime_ms: float = 0.0


@dataclass
class ScenarioConfig:
    seed: int
    devices: list[DeviceSpec]
    links: list[LinkSpec]
    default_link: LinkSpec | None
    enabled_devices: list[str] | None
    apps: list[AppSpec]
    mode: str = "aco"
    lam: float = 0.5
    aco: AcoParams = field(default_factory=AcoParams)
    cache_capacity: int = 10
    theta: float = 0.2
    policies: CachePolicies = field(default_factory=CachePolicies)
    overhead: OverheadSpec = field(default_factory=OverheadSpec)
    bucketing: BucketingConfig = field(default_factory=BucketingConfig)
    beacon_period_ms: float = 500.0
    beacon_ttl_ms: float = 1200.0
    churn: ChurnSpec = field(default_factory=ChurnSpec)
    horizon_ms: float = 600_000.0
    out_dir: str = "out"
    base_dir: Path = field(default_factory=Path)

    # -- derived views -----------------------------------------------------

    def active_devices(self) -> list[DeviceSpec]:
        if self.enabled_devices is None:
            return list(self.devices)
        byid = {d.id: d for d in self.devices}
        return [byid[i] for i in self.enabled_devices]

    def source_device(self) -> DeviceSpec:
        return next(d for d in self.active_devices() if d.kind == "source")

    def build_topology(self, device_ids=None, loads: dict[str, float] | None = None) -> SpcTopology:
        """Topology over the given device ids (default: all active) with
        per-device load overrides (the per-run jitter)."""
        specs = [d for d in self.active_devices() if device_ids is None or d.id in device_ids]
        loads = loads or {}
        devices = {d.id: d.profile(loads.get(d.id)) for d in specs}
        links: dict[tuple[str, str], Link] = {}
        for ls in self.links:
            if ls.a in devices and ls.b in devices:
                links[(ls.a, ls.b)] = Link(ls.a, ls.b, ls.bandwidth, ls.latency)
                if ls.symmetric:
                    links[(ls.b, ls.a)] = Link(ls.b, ls.a, ls.bandwidth, ls.latency)
        if self.default_link is not None:
            for a in devices:
                for b in devices:
                    if a != b and (a, b) not in links:
                        links[(a, b)] = Link(a, b, self.default_link.bandwidth, self.default_link.latency)
        return SpcTopology(devices=devices, links=links)

    def to_dict(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "seed": self.seed,
            "horizon_ms": self.horizon_ms,
            "topology": {
                "devices": [
                    {
                        "id": d.id, "kind": d.kind, "speed": d.speed, "load": d.load,
                        "load_jitter": d.load_jitter, "battery": d.battery, "memory": d.memory,
                    }
                    for d in self.devices
                ],
                "links": [
                    {"a": l.a, "b": l.b, "bandwidth": l.bandwidth, "latency": l.latency,
                     "symmetric": l.symmetric}
                    for l in self.links
                ],
                "default_link": (
                    None if self.default_link is None
                    else {"bandwidth": self.default_link.bandwidth, "latency": self.default_link.latency}
                ),
                "enabled_devices": self.enabled_devices,
            },
            "bucketing": {
                "speed_edges": list(self.bucketing.speed_edges),
                "bandwidth_edges": list(self.bucketing.bandwidth_edges),
                "latency_edges": list(self.bucketing.latency_edges),
                "battery_edges": list(self.bucketing.battery_edges),
                "load_edges": list(self.bucketing.load_edges),
            },
            "apps": [
                {
                    "app_id": a.app_id, "benchmark": a.benchmark, "graph_file": a.graph_file,
                    "runner": a.runner, "repetitions": a.repetitions, "start_ms": a.start_ms,
                    "gap_ms": a.gap_ms, "inputs_seed": a.inputs_seed,
                }
                for a in self.apps
            ],
            "decision": {
                "mode": self.mode,
                "lambda": self.lam,
                "aco": {
                    "n_ants": self.aco.n_ants, "n_iterations": self.aco.n_iterations,
                    "alpha": self.aco.alpha, "beta": self.aco.beta,
                    "rho": self.aco.rho, "q": self.aco.q,
                },
            },
            "cache": {
                "capacity": self.cache_capacity,
                "theta": self.theta,
                "merge": self.policies.merge,
                "dissemination": {
                    "policy": self.policies.dissemination,
                    "interval_ms": self.policies.dissemination_interval_ms,
                },
                "invalidation": {
                    "policy": self.policies.invalidation,
                    "ttl_ms": self.policies.invalidation_ttl_ms,
                    "delta": self.policies.invalidation_delta,
                },
            },
            "overhead": {
                "mode": self.overhead.mode,
                "aco_base_ms": self.overhead.aco_base_ms,
                "aco_ms_per_1k_evals": self.overhead.aco_ms_per_1k_evals,
                "match_base_ms": self.overhead.match_base_ms,
                "match_ms_per_1k_ops": self.overhead.match_ms_per_1k_ops,
            },
            "beacon": {"period_ms": self.beacon_period_ms, "ttl_ms": self.beacon_ttl_ms},
            "churn": {
                "joins": [
                    {"at_ms": at, "device": {
                        "id": d.id, "kind": d.kind, "speed": d.speed, "load": d.load,
                        "load_jitter": d.load_jitter, "battery": d.battery, "memory": d.memory,
                    }}
                    for d, at in self.churn.joins
                ],
                "leaves": [{"device": did, "at_ms": at} for did, at in self.churn.leaves],
                "leave_rate_per_ms": self.churn.leave_rate_per_ms,
                "downtime_ms": self.churn.downtime_ms,
            },
            "output": {"dir": self.out_dir},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# --------------------------------------------------------------------------
# Parsing and validation.
# --------------------------------------------------------------------------


def _parse_device(d: dict, path: str) -> DeviceSpec:
    kind = _get(d, "kind", path)
    if kind not in DEVICE_KINDS:
        raise InvalidConfig(f"{path}.kind", f"must be one of {DEVICE_KINDS}")
    spec = DeviceSpec(
        id=str(_get(d, "id", path)),
        kind=kind,
        speed=float(_get(d, "speed", path)),
        load=float(d.get("load", 0.0)),
        load_jitter=float(d.get("load_jitter", 0.0)),
        battery=float(d.get("battery", 1.0)),
        memory=int(d.get("memory", 1 << 30)),
    )
    if spec.speed <= 0:
        raise InvalidConfig(f"{path}.speed", "must be > 0")
    if not 0.0 <= spec.load <= 1.0:
        raise InvalidConfig(f"{path}.load", "must lie in [0,1]")
    if spec.load_jitter < 0:
        raise InvalidConfig(f"{path}.load_jitter", "must be >= 0")
    return spec


def parse_config(doc: dict, base_dir: Path | str = ".") -> ScenarioConfig:
    base_dir = Path(base_dir)
    if not isinstance(doc, dict):
        raise InvalidConfig("$", "scenario must be a JSON object")
    version = doc.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise InvalidConfig("version", f"unsupported schema version {version}")
    if "seed" not in doc:
        raise InvalidConfig("seed", "missing required field (runs must not draw wall-clock entropy)")
    seed = int(doc["seed"])

    topo = _get(doc, "topology", "$")
    raw_devices = _get(topo, "devices", "topology")
    if not raw_devices:
        raise InvalidConfig("topology.devices", "at least one device required")
    devices = [_parse_device(d, f"topology.devices[{i}]") for i, d in enumerate(raw_devices)]
    ids = [d.id for d in devices]
    if len(set(ids)) != len(ids):
        raise InvalidConfig("topology.devices", "duplicate device ids")

    links = []
    for i, l in enumerate(topo.get("links", []) or []):
        p = f"topology.links[{i}]"
        links.append(
            LinkSpec(
                a=str(_get(l, "a", p)), b=str(_get(l, "b", p)),
                bandwidth=float(_get(l, "bandwidth", p)), latency=float(_get(l, "latency", p)),
                symmetric=bool(l.get("symmetric", True)),
            )
        )
        if links[-1].a not in ids or links[-1].b not in ids:
            raise InvalidConfig(p, "link endpoint is not a declared device")
    default_link = None
    if topo.get("default_link") is not None:
        dl = topo["default_link"]
        default_link = LinkSpec(
            a="*", b="*",
            bandwidth=float(_get(dl, "bandwidth", "topology.default_link")),
            latency=float(_get(dl, "latency", "topology.default_link")),
        )

    enabled = topo.get("enabled_devices")
    if enabled is not None:
        enabled = [str(e) for e in enabled]
        unknown = [e for e in enabled if e not in ids]
        if unknown:
            raise InvalidConfig("topology.enabled_devices", f"unknown devices {unknown}")
    active = enabled if enabled is not None else ids
    n_sources = sum(1 for d in devices if d.id in active and d.kind == "source")
    if n_sources != 1:
        raise InvalidConfig("topology", f"exactly one enabled source device required, got {n_sources}")
    source_id = next(d.id for d in devices if d.id in active and d.kind == "source")

    bucketing = BucketingConfig()
    if doc.get("bucketing"):
        b = doc["bucketing"]
        kw = {}
        for name in ("speed_edges", "bandwidth_edges", "latency_edges", "battery_edges", "load_edges"):
            if name in b:
                edges = tuple(float(x) for x in b[name])
                if list(edges) != sorted(edges):
                    raise InvalidConfig(f"bucketing.{name}", "edges must be sorted ascending")
                kw[name] = edges
        bucketing = BucketingConfig(**kw)

    apps = []
    for i, a in enumerate(doc.get("apps", []) or []):
        p = f"apps[{i}]"
        bench = a.get("benchmark")
        gfile = a.get("graph_file")
        if (bench is None) == (gfile is None):
            raise InvalidConfig(p, "exactly one of benchmark / graph_file required")
        if bench is not None and bench not in BENCHMARK_NAMES:
            raise InvalidConfig(f"{p}.benchmark", f"must be one of {BENCHMARK_NAMES}")
        if gfile is not None and not (base_dir / gfile).exists():
            raise InvalidConfig(f"{p}.graph_file", f"file not found: {gfile}")
        runner = str(a.get("runner", source_id))
        if runner not in active:
            raise InvalidConfig(f"{p}.runner", f"{runner} is not an enabled device")
        reps = int(a.get("repetitions", 1))
        if reps < 1:
            raise InvalidConfig(f"{p}.repetitions", "must be >= 1")
        apps.append(
            AppSpec(
                app_id=str(a.get("app_id", bench or Path(gfile).stem)),
                runner=runner,
                repetitions=reps,
                start_ms=float(a.get("start_ms", 0.0)),
                gap_ms=float(a.get("gap_ms", 50.0)),
                inputs_seed=int(a.get("inputs_seed", 0)),
                benchmark=bench,
                graph_file=gfile,
            )
        )

    dec = doc.get("decision", {}) or {}
    mode = dec.get("mode", "aco")
    if mode not in DECISION_MODES:
        raise InvalidConfig("decision.mode", f"must be one of {DECISION_MODES}")
    lam = float(dec.get("lambda", 0.5))
    if not 0.0 <= lam <= 1.0:
        raise InvalidConfig("decision.lambda", "must lie in [0,1]")
    raw_aco = dec.get("aco", {}) or {}
    try:
        aco = AcoParams(
            n_ants=int(raw_aco.get("n_ants", 16)),
            n_iterations=int(raw_aco.get("n_iterations", 50)),
            alpha=float(raw_aco.get("alpha", 1.0)),
            beta=float(raw_aco.get("beta", 2.0)),
            rho=float(raw_aco.get("rho", 0.1)),
            q=float(raw_aco.get("q", 1.0)),
        )
    except ValueError as exc:
        raise InvalidConfig("decision.aco", str(exc)) from None

    c = doc.get("cache", {}) or {}
    diss = c.get("dissemination", {}) or {}
    inval = c.get("invalidation", {}) or {}
    try:
        policies = CachePolicies(
            merge=c.get("merge", "weighted"),
            dissemination=diss.get("policy", "on_change"),
            dissemination_interval_ms=float(diss.get("interval_ms", 500.0)),
            invalidation=inval.get("policy", "periodic"),
            invalidation_ttl_ms=float(inval.get("ttl_ms", 1e9)),
            invalidation_delta=float(inval.get("delta", 0.3)),
        )
    except ValueError as exc:
        raise InvalidConfig("cache", str(exc)) from None
    capacity = int(c.get("capacity", 10))
    if capacity < 1:
        raise InvalidConfig("cache.capacity", "must be >= 1")
    theta = float(c.get("theta", 0.2))
    if not 0.0 <= theta <= 1.0:
        raise InvalidConfig("cache.theta", "must lie in [0,1]")

    o = doc.get("overhead", {}) or {}
    omode = o.get("mode", "modeled")
    if omode not in OVERHEAD_MODES:
        raise InvalidConfig("overhead.mode", f"must be one of {OVERHEAD_MODES}")
    overhead = OverheadSpec(
        mode=omode,
        aco_base_ms=float(o.get("aco_base_ms", 0.155)),
        aco_ms_per_1k_evals=float(o.get("aco_ms_per_1k_evals", 0.0078)),
        match_base_ms=float(o.get("match_base_ms", 0.035)),
        match_ms_per_1k_ops=float(o.get("match_ms_per_1k_ops", 0.001)),
    )

    b = doc.get("beacon", {}) or {}
    beacon_period = float(b.get("period_ms", 500.0))
    beacon_ttl = float(b.get("ttl_ms", 1200.0))
    if beacon_period <= 0 or beacon_ttl <= 0:
        raise InvalidConfig("beacon", "period_ms and ttl_ms must be > 0")

    ch = doc.get("churn", {}) or {}
    churn = ChurnSpec(
        joins=[
            (_parse_device(_get(j, "device", f"churn.joins[{i}]"), f"churn.joins[{i}].device"),
             float(_get(j, "at_ms", f"churn.joins[{i}]")))
            for i, j in enumerate(ch.get("joins", []) or [])
        ],
        leaves=[
            (str(_get(l, "device", f"churn.leaves[{i}]")), float(_get(l, "at_ms", f"churn.leaves[{i}]")))
            for i, l in enumerate(ch.get("leaves", []) or [])
        ],
        leave_rate_per_ms=float(ch.get("leave_rate_per_ms", 0.0)),
        downtime_ms=float(ch.get("downtime_ms", 0.0)),
    )
    for did, _ in churn.leaves:
        if did not in ids:
            raise InvalidConfig("churn.leaves", f"unknown device {did}")

    out_dir = str((doc.get("output", {}) or {}).get("dir", "out"))
    horizon = float(doc.get("horizon_ms", 600_000.0))
    if horizon <= 0:
        raise InvalidConfig("horizon_ms", "must be > 0")

    return ScenarioConfig(
        seed=seed,
        devices=devices,
        links=links,
        default_link=default_link,
        enabled_devices=enabled,
        apps=apps,
        mode=mode,
        lam=lam,
        aco=aco,
        cache_capacity=capacity,
        theta=theta,
        policies=policies,
        overhead=overhead,
        bucketing=bucketing,
        beacon_period_ms=beacon_period,
        beacon_ttl_ms=beacon_ttl,
        churn=churn,
        horizon_ms=horizon,
        out_dir=out_dir,
        base_dir=base_dir,
    )


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise InvalidConfig("$", f"scenario file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidConfig("$", f"not valid JSON: {exc}") from None
    return parse_config(doc, base_dir=path.parent)


def apply_override(doc: dict, dotted: str, value):
    """Set `a.b.c` in a raw config dict (creating intermediate objects)."""
    parts = dotted.split(".")
    cur = doc
    for p in parts[:-1]:
        cur = cur.setdefault(p, {})
        if not isinstance(cur, dict):
            raise InvalidConfig(dotted, f"cannot descend into non-object {p!r}")
    cur[parts[-1]] = value

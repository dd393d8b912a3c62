"""Devices, links, and the discretized context signatures that key the cache.

A signature is the bucketized fingerprint of the decision context: one token
for the application plus five per candidate device (speed, bandwidth,
latency, battery, load), candidates sorted by id.  Two signatures are
compared by normalized token edit distance, which tolerates candidate sets
of different sizes.
"""

from __future__ import annotations

import zlib
from bisect import bisect_right
from dataclasses import dataclass, field

from . import kernels

KIND_SOURCE = "source"
KIND_MEMBER = "spc_member"
KIND_CLOUD = "remote_cloud"
DEVICE_KINDS = (KIND_SOURCE, KIND_MEMBER, KIND_CLOUD)


class ContextError(ValueError):
    pass


class IncompatibleBucketing(ContextError):
    pass


class MissingLink(ContextError):
    pass


@dataclass
class DeviceProfile:
    id: str
    speed: float  # work units per ms
    load: float = 0.0  # fraction of CPU already busy
    battery: float = 1.0
    memory: int = 1 << 30  # carried context; not used by any decision formula
    kind: str = KIND_MEMBER

    def __post_init__(self):
        if self.speed <= 0:
            raise ContextError(f"device {self.id}: speed must be > 0")
        if not 0.0 <= self.load <= 1.0:
            raise ContextError(f"device {self.id}: load must be in [0,1]")
        if not 0.0 <= self.battery <= 1.0:
            raise ContextError(f"device {self.id}: battery must be in [0,1]")
        if self.kind not in DEVICE_KINDS:
            raise ContextError(f"device {self.id}: unknown kind {self.kind!r}")

    def effective_speed(self) -> float:
        return self.speed * (1.0 - self.load)


@dataclass
class Link:
    src: str
    dst: str
    bandwidth: float  # bytes per ms
    latency: float  # ms

    def __post_init__(self):
        if self.src != self.dst:
            if self.bandwidth <= 0:
                raise ContextError(f"link {self.src}->{self.dst}: bandwidth must be > 0")
            if self.latency < 0:
                raise ContextError(f"link {self.src}->{self.dst}: latency must be >= 0")


def self_link(device_id: str) -> Link:
    return Link(device_id, device_id, bandwidth=float("inf"), latency=0.0)


@dataclass
class SpcTopology:
    """The source device, its current candidates, and pairwise link quality."""

    devices: dict[str, DeviceProfile]
    links: dict[tuple[str, str], Link] = field(default_factory=dict)

    def __post_init__(self):
        sources = [d for d in self.devices.values() if d.kind == KIND_SOURCE]
        if len(sources) != 1:
            raise ContextError(f"topology needs exactly one source device, got {len(sources)}")
        self._source = sources[0]

    @property
    def source(self) -> DeviceProfile:
        return self._source

    def device(self, did: str) -> DeviceProfile:
        return self.devices[did]

    def device_ids(self) -> list[str]:
        return sorted(self.devices)

    def candidates(self, source_id: str | None = None) -> list[str]:
        """Non-source devices, sorted by id."""
        src = source_id or self._source.id
        return sorted(d for d in self.devices if d != src)

    def link(self, a: str, b: str) -> Link:
        if a == b:
            return self_link(a)
        try:
            return self.links[(a, b)]
        except KeyError:
            raise MissingLink(f"no link {a} -> {b}") from None

    def subset(self, ids) -> "SpcTopology":
        ids = set(ids) | {self._source.id}
        return SpcTopology(
            devices={d: p for d, p in self.devices.items() if d in ids},
            links={k: l for k, l in self.links.items() if k[0] in ids and k[1] in ids},
        )


def transfer_time(nbytes: int, link: Link) -> float:
    """Time in ms to move `nbytes` over `link`; self-links are free."""
    if link.src == link.dst:
        return 0.0
    return link.latency + nbytes / link.bandwidth


# --------------------------------------------------------------------------
# Context signatures.
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BucketingConfig:
    """Bucket edges for each monitored quantity.

    A raw value maps to the count of edges <= value, so tokens are monotone
    in the underlying quantity.  Defaults: logarithmic spacing for speed and
    bandwidth (4 buckets), 4 latency buckets, 3 linear buckets for battery
    and load.
    """

    speed_edges: tuple[float, ...] = (2.0, 8.0, 32.0)
    bandwidth_edges: tuple[float, ...] = (500.0, 2000.0, 8000.0)
    latency_edges: tuple[float, ...] = (2.0, 8.0, 32.0)
    battery_edges: tuple[float, ...] = (1 / 3, 2 / 3)
    load_edges: tuple[float, ...] = (1 / 3, 2 / 3)

    def key(self) -> str:
        return repr(
            (self.speed_edges, self.bandwidth_edges, self.latency_edges,
             self.battery_edges, self.load_edges)
        )


DEFAULT_BUCKETING = BucketingConfig()


@dataclass(frozen=True)
class ContextSignature:
    tokens: tuple[int, ...]
    config_key: str = DEFAULT_BUCKETING.key()


def bucketize(value: float, edges: tuple[float, ...]) -> int:
    return bisect_right(edges, value)


def app_token(app: str, n_buckets: int = 64) -> int:
    # crc32 keeps the token stable across processes (builtin hash is salted)
    return zlib.crc32(app.encode("utf-8")) % n_buckets


def make_signature(
    topology: SpcTopology,
    app: str,
    buckets: BucketingConfig = DEFAULT_BUCKETING,
    source_id: str | None = None,
) -> ContextSignature:
    """Tokenize the current context: app token, then 5 tokens per candidate."""
    src = source_id or topology.source.id
    tokens = [app_token(app)]
    for did in topology.candidates(src):
        dev = topology.device(did)
        link = topology.link(src, did)
        tokens.append(bucketize(dev.speed, buckets.speed_edges))
        tokens.append(bucketize(link.bandwidth, buckets.bandwidth_edges))
        tokens.append(bucketize(link.latency, buckets.latency_edges))
        tokens.append(bucketize(dev.battery, buckets.battery_edges))
        tokens.append(bucketize(dev.load, buckets.load_edges))
    return ContextSignature(tokens=tuple(tokens), config_key=buckets.key())


def signature_distance(a: ContextSignature, b: ContextSignature) -> float:
    """Normalized token edit distance: levenshtein / max(len); 0 iff equal."""
    if a.config_key != b.config_key:
        raise IncompatibleBucketing("signatures come from different bucketing configs")
    if not a.tokens and not b.tokens:
        return 0.0
    dist = kernels.token_edit_distance(a.tokens, b.tokens)
    return dist / max(len(a.tokens), len(b.tokens))

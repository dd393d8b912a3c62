import pytest

from spcsim.context import DeviceProfile, Link, SpcTopology


def make_topology(candidates, src_speed=1.0, src_load=0.0, bandwidth=100.0, latency=1.0):
    """Source plus candidate devices on a full mesh of identical links.

    `candidates` maps device id -> (speed, load).
    """
    devices = {"src": DeviceProfile("src", speed=src_speed, load=src_load, kind="source")}
    for did, (speed, load) in candidates.items():
        devices[did] = DeviceProfile(did, speed=speed, load=load, kind="spc_member")
    links = {}
    ids = list(devices)
    for a in ids:
        for b in ids:
            if a != b:
                links[(a, b)] = Link(a, b, bandwidth=bandwidth, latency=latency)
    return SpcTopology(devices=devices, links=links)


@pytest.fixture
def mesh3():
    return make_topology({"devB": (2.0, 0.0), "devC": (4.0, 0.5)})

from functools import lru_cache

import pytest

from spcsim.context import (
    BucketingConfig,
    ContextSignature,
    DeviceProfile,
    IncompatibleBucketing,
    Link,
    MissingLink,
    SpcTopology,
    bucketize,
    make_signature,
    self_link,
    signature_distance,
    transfer_time,
)
from spcsim.rng import next_double, stream_state
from tests.conftest import make_topology


def brute_edit_distance(a, b):
    """Independent oracle: plain recursion over all alignments."""

    @lru_cache(maxsize=None)
    def rec(i, j):
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        best = rec(i + 1, j + 1) + (a[i] != b[j])
        best = min(best, rec(i + 1, j) + 1, rec(i, j + 1) + 1)
        return best

    return rec(0, 0)


def rand_tokens(state, max_len=8, alphabet=5):
    u, state = next_double(state)
    n = int(u * (max_len + 1))
    toks = []
    for _ in range(n):
        u, state = next_double(state)
        toks.append(int(u * alphabet))
    return tuple(toks), state


class TestTransferTime:
    def test_zero_bytes_is_latency(self):
        assert transfer_time(0, Link("a", "b", bandwidth=50.0, latency=5.0)) == 5.0

    def test_hand_computed_example(self):
        # latency + bytes/bandwidth = 5 + 1000/100
        assert transfer_time(1000, Link("a", "b", bandwidth=100.0, latency=5.0)) == 15.0

    def test_self_link_is_free(self):
        assert transfer_time(10**9, self_link("a")) == 0.0

    def test_monotonicity(self):
        state = stream_state(3)
        for _ in range(200):
            u1, state = next_double(state)
            u2, state = next_double(state)
            u3, state = next_double(state)
            link = Link("a", "b", bandwidth=1 + u1 * 1000, latency=u2 * 50)
            nbytes = int(u3 * 10000)
            base = transfer_time(nbytes, link)
            assert transfer_time(nbytes + 100, link) >= base
            slower = Link("a", "b", bandwidth=link.bandwidth / 2, latency=link.latency)
            assert transfer_time(nbytes, slower) >= base
            farther = Link("a", "b", bandwidth=link.bandwidth, latency=link.latency + 1)
            assert transfer_time(nbytes, farther) >= base


class TestProfilesAndTopology:
    def test_validation(self):
        with pytest.raises(ValueError):
            DeviceProfile("x", speed=0.0)
        with pytest.raises(ValueError):
            DeviceProfile("x", speed=1.0, load=1.5)
        with pytest.raises(ValueError):
            DeviceProfile("x", speed=1.0, kind="laptop")

    def test_exactly_one_source(self):
        with pytest.raises(ValueError):
            SpcTopology(devices={"a": DeviceProfile("a", 1.0, kind="spc_member")})

    def test_missing_link(self, mesh3):
        with pytest.raises(MissingLink):
            mesh3.link("devB", "ghost")

    def test_self_link_lookup(self, mesh3):
        link = mesh3.link("devB", "devB")
        assert link.latency == 0.0 and link.bandwidth == float("inf")


class TestSignatures:
    def test_deterministic(self, mesh3):
        assert make_signature(mesh3, "app") == make_signature(mesh3, "app")

    def test_token_count(self, mesh3):
        sig = make_signature(mesh3, "app")
        assert len(sig.tokens) == 1 + 5 * 2

    def test_bucket_edge_changes_exactly_one_token(self):
        buckets = BucketingConfig(bandwidth_edges=(100.0, 1000.0))
        lo = make_topology({"devB": (2.0, 0.0)}, bandwidth=99.0)
        hi = make_topology({"devB": (2.0, 0.0)}, bandwidth=101.0)
        s_lo = make_signature(lo, "app", buckets)
        s_hi = make_signature(hi, "app", buckets)
        diff = [i for i, (x, y) in enumerate(zip(s_lo.tokens, s_hi.tokens)) if x != y]
        assert len(diff) == 1

    def test_same_profile_same_tokens(self):
        topo = make_topology({"devB": (2.0, 0.1), "devC": (2.0, 0.1)})
        sig = make_signature(topo, "app")
        per = sig.tokens[1:]
        assert per[:5] == per[5:]

    def test_bucketize_monotone(self):
        edges = (1.0, 10.0, 100.0)
        values = [0.0, 0.5, 1.0, 5.0, 10.0, 50.0, 100.0, 1e6]
        toks = [bucketize(v, edges) for v in values]
        assert toks == sorted(toks)


class TestSignatureDistance:
    def test_identity(self, mesh3):
        s = make_signature(mesh3, "app")
        assert signature_distance(s, s) == 0.0

    def test_derived_example(self):
        a = ContextSignature(tokens=(1, 2, 3))
        b = ContextSignature(tokens=(1, 2, 4))
        assert brute_edit_distance((1, 2, 3), (1, 2, 4)) == 1
        assert signature_distance(a, b) == pytest.approx(1 / 3)

    def test_disjoint_equal_length(self):
        a = ContextSignature(tokens=(1, 1, 1, 1))
        b = ContextSignature(tokens=(2, 2, 2, 2))
        assert signature_distance(a, b) == 1.0

    def test_incompatible_bucketing(self):
        a = ContextSignature(tokens=(1,), config_key="x")
        b = ContextSignature(tokens=(1,), config_key="y")
        with pytest.raises(IncompatibleBucketing):
            signature_distance(a, b)

    def test_matches_brute_force_oracle(self):
        state = stream_state(11)
        for _ in range(150):
            ta, state = rand_tokens(state)
            tb, state = rand_tokens(state)
            got = signature_distance(ContextSignature(ta), ContextSignature(tb))
            want = brute_edit_distance(ta, tb) / max(len(ta), len(tb)) if (ta or tb) else 0.0
            assert got == pytest.approx(want)

    def test_symmetry(self):
        state = stream_state(12)
        for _ in range(200):
            ta, state = rand_tokens(state)
            tb, state = rand_tokens(state)
            a, b = ContextSignature(ta), ContextSignature(tb)
            assert signature_distance(a, b) == signature_distance(b, a)

    def test_triangle_inequality_equal_lengths(self):
        # For equal-length signatures (same candidate-set size, the practical
        # case) max-normalization preserves the levenshtein triangle
        # inequality.  Mixed lengths can violate it; see the repo notes.
        state = stream_state(13)
        for _ in range(300):
            toks = []
            for _ in range(3):
                t, state = rand_tokens(state, max_len=6)
                toks.append(t)
            n = max(len(t) for t in toks)
            sigs = [ContextSignature(tuple(list(t) + [0] * (n - len(t)))) for t in toks]
            d_ab = signature_distance(sigs[0], sigs[1])
            d_bc = signature_distance(sigs[1], sigs[2])
            d_ac = signature_distance(sigs[0], sigs[2])
            assert d_ac <= d_ab + d_bc + 1e-12

    def test_zero_iff_equal(self):
        state = stream_state(14)
        for _ in range(200):
            ta, state = rand_tokens(state)
            tb, state = rand_tokens(state)
            d = signature_distance(ContextSignature(ta), ContextSignature(tb))
            assert (d == 0.0) == (ta == tb)

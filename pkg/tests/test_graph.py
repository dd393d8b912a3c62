import pytest

from spcsim.graph import (
    BENCHMARK_NAMES,
    CycleDetected,
    DanglingEdge,
    MethodNode,
    NoEntryOrExit,
    UnknownBenchmark,
    benchmark,
    build_graph,
    graph_from_json,
    graph_to_json,
    topo_order,
)
from spcsim.rng import next_u64, randint, stream_state


def chain(ids, works=None):
    works = works or {}
    nodes = [MethodNode(i, compute_work=works.get(i, 1.0)) for i in ids]
    edges = {(ids[i], ids[i + 1]) for i in range(len(ids) - 1)}
    return nodes, edges


def random_dag(seed):
    """Chain plus random forward skip edges: always a valid single-entry DAG."""
    st = stream_state(seed)
    n, st = randint(st, 8)
    n += 2
    ids = [f"n{i:02d}" for i in range(n)]
    nodes, edges = chain(ids)
    k, st = randint(st, 4)
    for _ in range(k):
        a, st = randint(st, n - 1)
        room = n - a - 2
        if room <= 0:
            continue
        b, st = randint(st, room)
        edges.add((ids[a], ids[a + b + 2]))
    return build_graph(nodes, edges)


class TestBuildGraph:
    def test_three_node_chain(self):
        nodes, edges = chain(["1", "2", "3"])
        g = build_graph(nodes, edges)
        assert g.entry == "1" and g.exit == "3"
        assert g.node("1").pinned and g.node("3").pinned
        assert not g.node("2").pinned

    def test_single_node_is_trivially_valid(self):
        g = build_graph([MethodNode("only", 1.0)], set())
        assert g.entry == g.exit == "only"
        assert g.node("only").pinned

    def test_cycle_rejected(self):
        nodes = [MethodNode("a"), MethodNode("b"), MethodNode("c")]
        with pytest.raises(CycleDetected):
            build_graph(nodes, {("a", "b"), ("b", "c"), ("c", "b")})

    def test_self_loop_rejected(self):
        with pytest.raises(CycleDetected):
            build_graph([MethodNode("a"), MethodNode("b")], {("a", "b"), ("b", "b")})

    def test_dangling_edge_rejected(self):
        with pytest.raises(DanglingEdge):
            build_graph([MethodNode("a"), MethodNode("b")], {("a", "b"), ("a", "ghost")})

    def test_out_data_must_follow_an_edge(self):
        a = MethodNode("a", out_data={"c": 10})
        with pytest.raises(DanglingEdge):
            build_graph([a, MethodNode("b"), MethodNode("c")], {("a", "b"), ("b", "c")})

    def test_two_sinks_rejected(self):
        nodes = [MethodNode(i) for i in "abc"]
        with pytest.raises(NoEntryOrExit):
            build_graph(nodes, {("a", "b"), ("a", "c")})

    def test_two_sources_rejected(self):
        nodes = [MethodNode(i) for i in "abc"]
        with pytest.raises(NoEntryOrExit):
            build_graph(nodes, {("a", "c"), ("b", "c")})

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError):
            build_graph([MethodNode("a"), MethodNode("a")], set())

    def test_negative_work_rejected(self):
        with pytest.raises(ValueError):
            build_graph([MethodNode("a", compute_work=-1.0)], set())


class TestTopoOrder:
    def test_chain_order(self):
        g = build_graph(*chain(["1", "2", "3"]))
        assert topo_order(g) == ["1", "2", "3"]

    def test_diamond_lexicographic_tie_break(self):
        nodes = [MethodNode(i) for i in "abcd"]
        g = build_graph(nodes, {("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")})
        assert topo_order(g) == ["a", "b", "c", "d"]

    def test_determinant_preset_order(self):
        # hand-derived from the preset's edge list (a plain chain)
        g = benchmark("determinant", 7)
        assert topo_order(g) == ["A", "B", "C", "D", "E"]

    def test_permutation_consistent_with_edges(self):
        for seed in range(40):
            g = random_dag(seed)
            order = topo_order(g)
            assert sorted(order) == sorted(g.method_ids)
            pos = {m: i for i, m in enumerate(order)}
            for u, v in g.edges:
                assert pos[u] < pos[v]
            assert order[0] == g.entry and order[-1] == g.exit


class TestBenchmarks:
    def test_unknown_name(self):
        with pytest.raises(UnknownBenchmark):
            benchmark("chess", 0)

    def test_integral_shape(self):
        g = benchmark("integral", 7)
        assert len(g.nodes) == 4
        assert sorted(g.method_ids) == ["A", "B", "C", "D"]
        assert g.node("D").compute_work <= 1.0
        assert not g.node("D").pinned  # unprofitable, not structurally pinned
        assert max(g.node("D").out_data.values()) >= 100_000

    def test_determinant_shape(self):
        g = benchmark("determinant", 7)
        assert len(g.nodes) == 5
        assert sorted(g.method_ids) == ["A", "B", "C", "D", "E"]
        for cheap in ("B", "C"):
            assert g.node(cheap).compute_work <= 1.0
            assert not g.node(cheap).pinned

    @pytest.mark.parametrize("name", ["montecarlo", "facerec"])
    def test_macro_benchmarks_shape(self, name):
        g = benchmark(name, 3)
        assert 12 <= len(g.nodes) <= 24
        works = sorted((n.compute_work for n in g.nodes), reverse=True)
        # heavy work concentrated in a few nodes
        assert sum(works[:5]) / sum(works) > 0.9

    def test_deterministic_per_seed(self):
        for name in BENCHMARK_NAMES:
            assert graph_to_json(benchmark(name, 1)) == graph_to_json(benchmark(name, 1))

    def test_seeds_change_heavy_work(self):
        a = benchmark("montecarlo", 1)
        b = benchmark("montecarlo", 2)
        assert any(a.node(m).compute_work != b.node(m).compute_work for m in a.method_ids)

    def test_all_seeds_validate(self):
        for name in BENCHMARK_NAMES:
            for seed in range(0, 100, 7):
                g = benchmark(name, seed)
                build_graph(g.nodes, g.edges)  # re-validates


class TestSerialization:
    def test_round_trip_identity(self):
        for name in BENCHMARK_NAMES:
            g = benchmark(name, 5)
            text = graph_to_json(g)
            assert graph_to_json(graph_from_json(text)) == text

    def test_fractional_work_rejected_by_format(self):
        g = build_graph([MethodNode("a", compute_work=1.5)], set())
        with pytest.raises(ValueError):
            graph_to_json(g)

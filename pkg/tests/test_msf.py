import numpy as np
import pytest

from msfseg.engine.grid import GridGraph, Image, SeedSet
from msfseg.engine.msf import AltitudeProvider, FixedAltitude, grow, path_to_seed, segmentation_of
from msfseg.engine.oracles import msf_oracle, topographic_distance_oracle
from msfseg.utils.errors import ContractViolation

from conftest import random_instance


def _grow(graph, altitudes, seeds, forbidden=None):
    return grow(graph, None, seeds, FixedAltitude(altitudes), forbidden)


def test_single_seed_floods_everything(line3):
    record = _grow(line3, [1.0, 1.0], SeedSet.from_nodes([0]))
    assert record.assignment.tolist() == [1, 1, 1]
    assert record.path_max[2] == 1.0
    assert record.path_max[0] == -np.inf
    assert segmentation_of(record).labels.tolist() == [1, 1, 1]
    assert path_to_seed(record, 2) == [0, 1]
    assert path_to_seed(record, 0) == []


def test_two_seeds_lowest_edge_first(line3, line3_seeds):
    record = _grow(line3, [0.2, 0.9], line3_seeds)
    assert segmentation_of(record).labels.tolist() == [1, 1, 2]
    assert record.parent_edge[1] == 0
    assert 1 not in record.tree_edges()
    assert record.order.tolist() == [0, 2, 1]


def test_forbidden_edges_leave_nodes_unassigned():
    graph = GridGraph(2, 2)
    seeds = SeedSet(((0, 1), (3, 2)))
    record = _grow(graph, [0.5, 0.5, 0.5, 0.5], seeds,
                   forbidden={graph.edge_id(0, 1), graph.edge_id(1, 3)})
    assert record.assignment.tolist() == [1, 0, 1, 2]
    assert record.assignment[1] == 0
    assert record.path_max[1] == np.inf
    assert record.unassigned_nodes.tolist() == [1]
    assert segmentation_of(record).labels[1] == 0
    with pytest.raises(ContractViolation):
        path_to_seed(record, 1)


def test_bottleneck_prefers_edge_farthest_from_seed(line3):
    record = _grow(line3, [1.0, 1.0], SeedSet.from_nodes([0]))
    assert record.bottleneck_edge[1] == 0
    assert record.bottleneck_edge[2] == 1


def test_equal_altitudes_earlier_insertion_wins():
    graph = GridGraph(1, 4)
    record = _grow(graph, [0.5, 0.5, 0.5], SeedSet.from_nodes([0, 3]))
    # seed 1 pushes e01 before seed 2 pushes e23, so node 1 is taken first
    assert record.order[1] == 2
    assert record.order[2] == 3
    assert segmentation_of(record).labels.tolist() == [1, 1, 2, 2]


def test_growth_record_invariants(rng):
    for _ in range(50):
        graph, altitudes, seeds = random_instance(rng, max_side=6)
        forbidden = set(int(e) for e in rng.choice(graph.n_edges, size=graph.n_edges // 5, replace=False))
        record = _grow(graph, altitudes, seeds, forbidden)
        for node, label in seeds.seeds:
            assert record.assignment[node] == label
            assert record.parent_edge[node] == -1
        for v in np.flatnonzero(record.assignment):
            if record.parent_edge[v] < 0:
                continue
            u, e = record.parent_node[v], record.parent_edge[v]
            assert e not in forbidden
            assert record.assignment[v] == record.assignment[u]
            assert record.order[v] > record.order[u]
            assert record.path_max[v] == max(record.path_max[u], altitudes[e])
            path = path_to_seed(record, int(v))
            assert max(altitudes[path]) == record.path_max[v]
            assert altitudes[record.bottleneck_edge[v]] == record.path_max[v]


def test_growth_is_deterministic(rng):
    graph, altitudes, seeds = random_instance(rng, max_side=7, n_seeds=3)
    first, second = _grow(graph, altitudes, seeds), _grow(graph, altitudes, seeds)
    for name in ("assignment", "parent_edge", "parent_node", "path_max", "bottleneck_edge", "order"):
        np.testing.assert_array_equal(getattr(first, name), getattr(second, name))
    assert first.evaluated_altitude == second.evaluated_altitude


def test_topographic_distance_oracle_examples():
    assert topographic_distance_oracle(GridGraph(1, 3), [0.2, 0.7], 0, 2) == 0.7
    graph = GridGraph(2, 2)
    altitudes = {graph.edge_id(0, 1): 0.9, graph.edge_id(0, 2): 0.1,
                 graph.edge_id(2, 3): 0.1, graph.edge_id(1, 3): 0.1}
    assert topographic_distance_oracle(graph, altitudes, 0, 1) == 0.1
    assert topographic_distance_oracle(graph, altitudes, 2, 2) == -np.inf


def test_msf_oracle_examples(line3, line3_seeds):
    assert msf_oracle(line3, [0.2, 0.9], line3_seeds).labels.tolist() == [1, 1, 2]
    assert msf_oracle(line3, [0.2, 0.9], SeedSet.from_nodes([1])).labels.tolist() == [1, 1, 1]


def _check_msf_equivalence(rng, count, max_side):
    for _ in range(count):
        graph, altitudes, seeds = random_instance(rng, max_side=max_side)
        grown = segmentation_of(_grow(graph, altitudes, seeds))
        np.testing.assert_array_equal(grown.labels, msf_oracle(graph, altitudes, seeds).labels)


def test_grow_matches_kruskal_oracle(rng):
    _check_msf_equivalence(rng, 150, 8)


@pytest.mark.slow
def test_grow_matches_kruskal_oracle_acceptance(rng):
    _check_msf_equivalence(rng, 1000, 8)


SMALL_SHAPES = [(1, 4), (2, 2), (2, 3), (3, 3), (3, 4), (2, 5), (2, 6)]


def _check_closest_seed(rng, count):
    for index in range(count):
        graph = GridGraph(*SMALL_SHAPES[index % len(SMALL_SHAPES)])
        altitudes = rng.permutation(graph.n_edges).astype(float)
        n_seeds = int(rng.integers(1, 4))
        nodes = rng.choice(graph.n_nodes, size=n_seeds, replace=False)
        seeds = SeedSet.from_nodes(int(n) for n in nodes)
        record = _grow(graph, altitudes, seeds)
        for w in range(graph.n_nodes):
            distances = {label: topographic_distance_oracle(graph, altitudes, m, w) for m, label in seeds.seeds}
            assert record.path_max[w] == min(distances.values())
            assert distances[record.assignment[w]] == record.path_max[w]


def test_assigned_seed_is_topographically_closest(rng):
    _check_closest_seed(rng, 60)


@pytest.mark.slow
def test_assigned_seed_is_topographically_closest_acceptance(rng):
    _check_closest_seed(rng, 200)


class _Infinite(AltitudeProvider):
    def evaluate(self, edge, u, v, assignment, hidden):
        return np.inf, np.zeros(0)


def test_non_finite_altitude_is_a_contract_violation(line3):
    with pytest.raises(ContractViolation):
        grow(line3, None, SeedSet.from_nodes([0]), _Infinite())


def test_image_grid_must_match(line3):
    image = Image.from_array(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        grow(line3, image, SeedSet.from_nodes([0]), FixedAltitude([0.0, 0.0]))

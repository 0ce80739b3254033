import numpy as np
import pytest

from msfseg.engine.grid import (DOWN, LEFT, RIGHT, UP, GridGraph, Image, SeedSet, Segmentation,
                                boundary_mask, cut_set, relabel_sequential)
from msfseg.utils.errors import ContractViolation


def test_counts():
    graph = GridGraph(3, 4)
    assert graph.n_nodes == 12
    assert graph.n_edges == 3 * 3 + 2 * 4


def test_edge_endpoints_indexing():
    graph = GridGraph(3, 3)
    assert graph.edge_endpoints(0) == (0, 1)
    assert graph.edge_endpoints(6) == (0, 3)
    small = GridGraph(2, 2)
    assert [small.edge_endpoints(e) for e in range(4)] == [(0, 1), (2, 3), (0, 2), (1, 3)]


def test_edge_endpoints_out_of_range():
    with pytest.raises(IndexError):
        GridGraph(2, 2).edge_endpoints(4)


@pytest.mark.parametrize("shape", [(1, 2), (1, 5), (3, 3), (4, 2), (5, 7)])
def test_edge_id_is_inverse_of_endpoints(shape):
    graph = GridGraph(*shape)
    for edge in range(graph.n_edges):
        u, v = graph.edge_endpoints(edge)
        assert u < v
        assert graph.edge_id(u, v) == edge
        assert graph.edge_id(v, u) == edge


def test_edge_id_rejects_non_adjacent():
    with pytest.raises(ValueError):
        GridGraph(3, 3).edge_id(2, 3)


def test_incident_edges_degrees():
    graph = GridGraph(3, 3)
    assert len(graph.incident_edges(4)) == 4
    assert len(graph.incident_edges(0)) == 2
    assert len(graph.incident_edges(1)) == 3
    assert GridGraph(1, 2).incident_edges(0) == [(0, 1)]


def test_incident_edges_order_left_right_up_down():
    graph = GridGraph(3, 3)
    neighbors = [w for _, w in graph.incident_edges(4)]
    assert neighbors == [3, 5, 1, 7]
    assert [graph.direction(4, w) for w in neighbors] == [LEFT, RIGHT, UP, DOWN]


def test_incident_edges_out_of_range():
    with pytest.raises(IndexError):
        GridGraph(2, 2).incident_edges(4)


def test_cut_set_examples():
    assert cut_set(Segmentation(GridGraph(2, 2), [1, 1, 1, 1])) == frozenset()
    assert cut_set(Segmentation(GridGraph(1, 2), [1, 2])) == {0}
    assert cut_set(Segmentation(GridGraph(2, 2), [1, 1, 2, 2])) == {2, 3}


def test_cut_set_label_permutation_invariant(rng):
    graph = GridGraph(4, 5)
    labels = rng.integers(1, 4, size=graph.n_nodes)
    renamed = np.array([0, 3, 1, 2])[labels]
    assert cut_set(Segmentation(graph, labels)) == cut_set(Segmentation(graph, renamed))


def test_cut_set_requires_complete_segmentation():
    with pytest.raises(ContractViolation):
        cut_set(Segmentation(GridGraph(1, 3), [1, 0, 2]))


def test_boundary_mask_examples():
    assert not boundary_mask(Segmentation(GridGraph(2, 2), [3, 3, 3, 3])).any()
    assert boundary_mask(Segmentation(GridGraph(1, 2), [1, 2])).tolist() == [True, True]
    labels = np.array([[1, 2, 2], [1, 2, 2], [1, 2, 2]])
    mask = boundary_mask(Segmentation.from_array(labels)).reshape(3, 3)
    assert mask[:, 0].all() and mask[:, 1].all()
    assert not mask[:, 2].any()


def test_image_from_array_layout():
    array = np.arange(12, dtype=float).reshape(2, 3, 2)
    image = Image.from_array(array)
    assert image.graph.shape == (2, 3)
    assert image.channels == 2
    assert image.data[4].tolist() == [8.0, 9.0]
    np.testing.assert_array_equal(image.as_array(), array)


def test_image_rejects_non_finite():
    with pytest.raises(ValueError):
        Image.from_array(np.array([[0.0, np.nan]]))


def test_containers_are_read_only():
    seg = Segmentation(GridGraph(1, 2), [1, 2])
    with pytest.raises(ValueError):
        seg.labels[0] = 5


@pytest.mark.parametrize("seeds", [
    ((0, 1), (1, 1)),
    ((0, 1), (0, 2)),
    ((0, 2),),
    (),
])
def test_seed_set_validation(seeds):
    with pytest.raises(ValueError):
        SeedSet(seeds)


def test_seed_set_from_nodes():
    seeds = SeedSet.from_nodes([7, 3])
    assert seeds.seeds == ((7, 1), (3, 2))
    assert seeds.nodes == [7, 3]
    assert len(seeds) == 2


def test_relabel_sequential():
    assert relabel_sequential([3, 3, 7]).tolist() == [1, 1, 2]
    assert relabel_sequential([0, 5, 5, 9]).tolist() == [0, 1, 1, 2]

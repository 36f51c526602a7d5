import numpy as np
import pytest

from gyronet.graphs import (
    Graph,
    barabasi_albert,
    bfs_all_pairs,
    connected_components,
    newman_watts_strogatz,
    random_tree,
    stochastic_block_model,
)
from gyronet.hyperbolicity import (
    delta_quadruple,
    far_apart_pairs,
    hyperbolicity_exact,
    hyperbolicity_pruned,
    hyperbolicity_report,
)
from oracles import brute_delta


def cycle_graph(n):
    return Graph(n, np.array([(i, (i + 1) % n) for i in range(n)]))


def complete_graph(n):
    return Graph(n, np.array([(i, j) for i in range(n) for j in range(i + 1, n)]))


def grid_graph(rows, cols):
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph(rows * cols, np.array(edges))


def exact_delta(g):
    return hyperbolicity_exact(bfs_all_pairs(g))


def pruned_delta(g):
    return hyperbolicity_pruned(bfs_all_pairs(g), g.indptr, g.indices)


def test_quadruple_on_four_cycle():
    d = bfs_all_pairs(cycle_graph(4))
    assert delta_quadruple(d, 0, 1, 2, 3) == 1.0


def test_four_cycle_delta_one():
    assert exact_delta(cycle_graph(4)) == 1.0
    assert pruned_delta(cycle_graph(4)) == 1.0


def test_grid_3x3_delta_two():
    g = grid_graph(3, 3)
    assert exact_delta(g) == 2.0
    assert pruned_delta(g) == 2.0


def test_complete_graph_delta_zero():
    assert exact_delta(complete_graph(5)) == 0.0
    assert pruned_delta(complete_graph(5)) == 0.0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_trees_delta_zero(seed):
    g = random_tree(60, seed=seed)
    assert exact_delta(g) == 0.0
    assert pruned_delta(g) == 0.0


def test_path_delta_zero():
    g = Graph(6, np.stack([np.arange(5), np.arange(1, 5 + 1)], axis=1))
    assert exact_delta(g) == 0.0
    assert pruned_delta(g) == 0.0


def test_small_component_is_zero():
    d = bfs_all_pairs(complete_graph(3))
    assert hyperbolicity_exact(d) == 0.0
    g = complete_graph(3)
    assert hyperbolicity_pruned(d, g.indptr, g.indices) == 0.0


def test_far_apart_pairs_on_path():
    g = Graph(5, np.stack([np.arange(4), np.arange(1, 5)], axis=1))
    u, v = far_apart_pairs(bfs_all_pairs(g), g.indptr, g.indices)
    assert list(zip(u.tolist(), v.tolist())) == [(0, 4)]


def test_far_apart_pairs_on_four_cycle():
    g = cycle_graph(4)
    u, v = far_apart_pairs(bfs_all_pairs(g), g.indptr, g.indices)
    assert list(zip(u.tolist(), v.tolist())) == [(0, 2), (1, 3)]


@pytest.mark.parametrize("seed", range(6))
def test_exact_matches_brute_oracle(seed):
    rng = np.random.default_rng(seed + 100)
    n = int(rng.integers(6, 17))
    edges = rng.integers(0, n, size=(2 * n, 2))
    edges = edges[edges[:, 0] != edges[:, 1]]
    g = Graph(n, edges)
    rep_e = hyperbolicity_report(g, mode="exact")
    rep_p = hyperbolicity_report(g, mode="pruned")
    # oracle per component on the same relabeled distance matrices
    want = 0.0
    labels = connected_components(g)
    dist = bfs_all_pairs(g)
    weighted = 0.0
    for c in range(labels.max() + 1):
        nodes = np.nonzero(labels == c)[0]
        sub = dist[np.ix_(nodes, nodes)].astype(float)
        dc = brute_delta(sub) if len(nodes) >= 4 else 0.0
        want = max(want, dc)
        weighted += len(nodes) / n * dc
    assert rep_e.max_delta == want
    assert rep_p.max_delta == want
    assert rep_e.weighted_delta == pytest.approx(weighted, abs=1e-12)
    assert rep_p.weighted_delta == pytest.approx(weighted, abs=1e-12)


@pytest.mark.parametrize(
    "maker",
    [
        lambda s: barabasi_albert(50, 2, seed=s),
        lambda s: newman_watts_strogatz(48, 4, 0.2, seed=s),
        lambda s: stochastic_block_model(56, seed=s),
        lambda s: random_tree(50, seed=s),
    ],
)
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_pruned_matches_exact(maker, seed):
    g = maker(seed)
    a = hyperbolicity_report(g, mode="exact")
    b = hyperbolicity_report(g, mode="pruned")
    assert a.max_delta == b.max_delta
    assert a.weighted_delta == pytest.approx(b.weighted_delta, abs=1e-12)


def test_report_weights_components_by_size():
    # C4 (delta 1) next to K5 (delta 0)
    edges = [(0, 1), (1, 2), (2, 3), (3, 0)]
    edges += [(4 + i, 4 + j) for i in range(5) for j in range(i + 1, 5)]
    g = Graph(9, np.array(edges))
    rep = hyperbolicity_report(g, mode="exact")
    assert [c.nodes for c in rep.components] == [5, 4]
    assert rep.max_delta == 1.0
    assert rep.weighted_delta == pytest.approx(4.0 / 9.0)
    assert rep.n == 9
    assert rep.mode == "exact"


def test_report_single_node():
    rep = hyperbolicity_report(Graph(1, np.zeros((0, 2), dtype=np.int64)))
    assert rep.max_delta == 0.0
    assert rep.weighted_delta == 0.0


def test_exact_cap_enforced():
    g = cycle_graph(30)
    with pytest.raises(ValueError, match="cap"):
        hyperbolicity_report(g, mode="exact", exact_cap=10)
    # pruned mode ignores the cap
    hyperbolicity_report(g, mode="pruned", exact_cap=10)


def test_unknown_mode_rejected():
    with pytest.raises(ValueError, match="mode"):
        hyperbolicity_report(cycle_graph(6), mode="fast")


def test_larger_cycles_match_oracle():
    for n in (5, 6, 7, 8, 9):
        g = cycle_graph(n)
        want = brute_delta(bfs_all_pairs(g).astype(float))
        assert exact_delta(g) == want
        assert pruned_delta(g) == want

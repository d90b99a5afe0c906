import numpy as np
import pytest

from edgecv.netgraph import build_adjacency


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_graph(n, edges, directed=False, weighted=False):
    """Small literal graphs for tests: edges as (i, j) or (i, j, w) tuples."""
    if edges and len(edges[0]) == 3:
        rows, cols, weights = zip(*edges)
    else:
        rows = [e[0] for e in edges]
        cols = [e[1] for e in edges]
        weights = [1.0] * len(edges)
    return build_adjacency(n, rows, cols, weights, directed, weighted)


def random_graph(n, density, rng, directed=False, weighted=False):
    iu, ju = np.triu_indices(n, k=1)
    if directed:
        il, jl = np.tril_indices(n, k=-1)
        iu, ju = np.concatenate([iu, il]), np.concatenate([ju, jl])
    keep = rng.random(iu.size) < density
    w = rng.uniform(0.5, 2.0, int(keep.sum())) if weighted else np.ones(int(keep.sum()))
    return build_adjacency(n, iu[keep], ju[keep], w, directed, weighted)

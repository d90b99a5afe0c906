"""Graph representation, degree/Laplacian computations, regularization and edge-list I/O."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


class EdgeListError(ValueError):
    """Raised when an edge-list file cannot be parsed."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


@dataclass(frozen=True)
class AdjacencyMatrix:
    """Sparse, optionally weighted, directed or undirected network.

    Entries are stored in a CSR matrix with no explicit zeros and no diagonal
    (self-loops are disallowed). Undirected graphs store both orientations of
    each edge with equal weight. Instances are immutable after construction.
    """

    n: int
    directed: bool
    weighted: bool
    csr: sp.csr_matrix

    @property
    def num_edges(self) -> int:
        """Number of stored entries (undirected edges count once)."""
        return self.csr.nnz if self.directed else self.csr.nnz // 2

    def total_weight(self) -> float:
        """Sum of edge weights (each undirected edge counted once)."""
        s = float(self.csr.sum())
        return s if self.directed else s / 2.0

    def entries(self):
        """Canonical entry arrays (rows, cols, weights); i < j for undirected."""
        coo = self.csr.tocoo()
        if self.directed:
            return coo.row.copy(), coo.col.copy(), coo.data.copy()
        keep = coo.row < coo.col
        return coo.row[keep], coo.col[keep], coo.data[keep]

    def values_at(self, rows, cols):
        """Edge weights at the given index arrays (0 where absent)."""
        return np.asarray(self.csr[rows, cols]).ravel()

    def to_dense(self) -> np.ndarray:
        return self.csr.toarray()


def build_adjacency(n, rows, cols, weights, directed, weighted) -> AdjacencyMatrix:
    """Assemble an AdjacencyMatrix from canonical entries, enforcing invariants.

    For undirected graphs pass each edge once (any orientation); the matrix is
    symmetrized. Duplicate (i, j) pairs are rejected here: callers deduplicate.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    if rows.size != cols.size or rows.size != weights.size:
        raise ValueError("rows, cols and weights must have equal length")
    if rows.size:
        if rows.min() < 0 or cols.min() < 0 or max(rows.max(), cols.max()) >= n:
            raise ValueError("node index out of range")
        if np.any(rows == cols):
            raise ValueError("self-loops are not allowed")
        if np.any(weights < 0):
            raise ValueError("negative edge weight")
        if not weighted and not np.all(weights == 1.0):
            raise ValueError("binary graph requires all weights equal to 1")
    if not directed:
        rows, cols = np.concatenate([rows, cols]), np.concatenate([cols, rows])
        weights = np.concatenate([weights, weights])
    m = sp.csr_matrix((weights, (rows, cols)), shape=(n, n))
    if m.nnz != rows.size:
        raise ValueError("duplicate entries")
    m.eliminate_zeros()
    m.sort_indices()
    return AdjacencyMatrix(n=int(n), directed=directed, weighted=weighted, csr=m)


def load_edge_list(path, directed=False, weighted=False) -> AdjacencyMatrix:
    """Parse an edge-list file: lines "i j" or "i j w", '#' comments, optional
    header "n <count>". Duplicate pairs are summed for weighted graphs and
    rejected for binary ones."""
    n_declared = None
    pairs = {}
    max_idx = -1
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "n":
                if len(parts) != 2:
                    raise EdgeListError("malformed header", line_no)
                try:
                    n_declared = int(parts[1])
                except ValueError:
                    raise EdgeListError("malformed header", line_no) from None
                continue
            if len(parts) not in (2, 3):
                raise EdgeListError("expected 'i j' or 'i j w'", line_no)
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListError("node indices must be integers", line_no) from None
            if i < 0 or j < 0:
                raise EdgeListError("negative node index", line_no)
            if i == j:
                raise EdgeListError("self-loop", line_no)
            if len(parts) == 3:
                if not weighted:
                    raise EdgeListError("weight given for binary graph", line_no)
                try:
                    w = float(parts[2])
                except ValueError:
                    raise EdgeListError("malformed weight", line_no) from None
                if not np.isfinite(w):
                    raise EdgeListError("non-finite weight", line_no)
                if w < 0:
                    raise EdgeListError("negative weight", line_no)
            else:
                w = 1.0
            key = (i, j) if directed or i < j else (j, i)
            if key in pairs:
                if not weighted:
                    raise EdgeListError("duplicate edge in binary graph", line_no)
                pairs[key] += w
            else:
                pairs[key] = w
            max_idx = max(max_idx, i, j)
    n = n_declared if n_declared is not None else max_idx + 1
    if n < 0:
        n = 0
    if max_idx >= n:
        raise EdgeListError(f"node index {max_idx} outside declared n={n}")
    if pairs:
        rows, cols = map(np.array, zip(*pairs.keys()))
        weights = np.array(list(pairs.values()))
    else:
        rows = cols = weights = np.empty(0)
    return build_adjacency(n, rows, cols, weights, directed, weighted)


def save_edge_list(A: AdjacencyMatrix, path):
    """Write the edge list with an "n <count>" header; inverse of load_edge_list."""
    rows, cols, weights = A.entries()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"n {A.n}\n")
        for i, j, w in zip(rows, cols, weights):
            if A.weighted:
                fh.write(f"{i} {j} {float(w)!r}\n")
            else:
                fh.write(f"{i} {j}\n")


def degrees(A: AdjacencyMatrix) -> np.ndarray:
    """Weighted node degrees (row sums; out-degrees for directed graphs)."""
    return np.asarray(A.csr.sum(axis=1)).ravel()


def _laplacian_dense(W: np.ndarray) -> np.ndarray:
    """D^{-1/2} W D^{-1/2} with zero rows/cols for zero-degree nodes."""
    d = W.sum(axis=1)
    inv = np.zeros_like(d)
    pos = d > 0
    inv[pos] = 1.0 / np.sqrt(d[pos])
    return W * np.outer(inv, inv)


def normalized_laplacian(A: AdjacencyMatrix) -> np.ndarray:
    """Degree-normalized adjacency D^{-1/2} A D^{-1/2} as a dense matrix.

    Isolated nodes get all-zero rows and columns rather than raising.
    """
    if A.directed:
        raise ValueError("normalized_laplacian requires an undirected graph")
    return _laplacian_dense(A.to_dense())


def _regularize_dense(W: np.ndarray, tau: float) -> np.ndarray:
    """Add tau * (mean degree / n) to every entry of a dense nonneg matrix."""
    n = W.shape[0]
    if n == 0:
        return W.copy()
    dbar = W.sum() / n
    return W + tau * dbar / n


def regularize(A: AdjacencyMatrix, tau: float) -> np.ndarray:
    """Dense regularized adjacency: every entry incremented by tau * dbar / n,
    where dbar is the average node degree."""
    if A.directed:
        raise ValueError("regularize requires an undirected graph")
    if tau < 0:
        raise ValueError("tau must be >= 0")
    return _regularize_dense(A.to_dense(), tau)


def extract_core(A: AdjacencyMatrix, threshold: float):
    """Iteratively drop nodes with total incident weight below threshold.

    Repeats until no node changes, then returns the induced subgraph together
    with an old->new index map for the surviving nodes. May return an empty
    graph.
    """
    if A.directed:
        raise ValueError("extract_core requires an undirected graph")
    keep = np.arange(A.n)
    m = A.csr
    while keep.size:
        deg = np.asarray(m.sum(axis=1)).ravel()
        ok = deg >= threshold
        if ok.all():
            break
        keep = keep[ok]
        m = m[ok][:, ok]
    index_map = {int(old): new for new, old in enumerate(keep)}
    coo = m.tocoo()
    sel = coo.row < coo.col
    core = build_adjacency(
        keep.size, coo.row[sel], coo.col[sel], coo.data[sel],
        directed=False, weighted=A.weighted,
    )
    return core, index_map

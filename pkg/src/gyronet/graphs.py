"""Undirected simple graphs: CSR structure, BFS metrics, generators, file IO.

Graphs are stored as a deduplicated edge array plus CSR neighbor lists with
sorted, 0-indexed node ids.  Generators are deterministic functions of
(parameters, seed).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Graph:
    n: int
    edges: np.ndarray  # (m, 2) int64, u < v, lexicographically sorted, unique
    indptr: np.ndarray = field(init=False)
    indices: np.ndarray = field(init=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if self.n < 1:
            raise ValueError("graph needs at least one node")
        if edges.size:
            if edges.min() < 0 or edges.max() >= self.n:
                raise ValueError("edge endpoint out of range")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise ValueError("self-loops are not allowed in the base graph")
            edges = np.sort(edges, axis=1)
            edges = np.unique(edges, axis=0)
        self.edges = edges
        both = np.concatenate([edges, edges[:, ::-1]]) if edges.size else edges.reshape(0, 2)
        order = np.lexsort((both[:, 1], both[:, 0])) if both.size else np.array([], dtype=np.intp)
        both = both[order]
        counts = np.bincount(both[:, 0], minlength=self.n) if both.size else np.zeros(self.n, dtype=np.int64)
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.indices = both[:, 1].astype(np.int64) if both.size else np.array([], dtype=np.int64)

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]


def bfs_from(graph: Graph, source: int) -> np.ndarray:
    """Hop distances from one source; unreachable nodes get -1."""
    dist = np.full(graph.n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    level = 0
    while frontier.size:
        level += 1
        starts = graph.indptr[frontier]
        counts = graph.indptr[frontier + 1] - starts
        total = int(counts.sum())
        if total == 0:
            break
        # flat gather of all frontier adjacency slices
        seg = np.repeat(np.cumsum(counts) - counts, counts)
        flat = np.arange(total) - seg + np.repeat(starts, counts)
        cand = np.unique(graph.indices[flat])
        cand = cand[dist[cand] < 0]
        dist[cand] = level
        frontier = cand
    return dist


def bfs_all_pairs(graph: Graph) -> np.ndarray:
    """All-pairs hop distances; -1 marks unreachable pairs.

    dtype is int32 up to 10k nodes, int16 beyond (distances still fit).
    """
    dtype = np.int32 if graph.n <= 10_000 else np.int16
    out = np.empty((graph.n, graph.n), dtype=dtype)
    for s in range(graph.n):
        out[s] = bfs_from(graph, s)
    return out


def connected_components(graph: Graph) -> np.ndarray:
    """Component label per node, labels ordered by first-seen node."""
    labels = np.full(graph.n, -1, dtype=np.int64)
    current = 0
    for s in range(graph.n):
        if labels[s] >= 0:
            continue
        reach = bfs_from(graph, s) >= 0
        labels[reach] = current
        current += 1
    return labels


def sym_norm_coeffs(graph: Graph):
    """Self-loop-augmented symmetric normalization coefficients.

    Returns directed arrays (src, dst, coeff) covering every ordered edge of
    A+I (both directions of each edge plus one self-loop per node), with
    coeff = (deg(src) * deg(dst)) ** -0.5 and degrees counted on A+I.
    """
    deg = graph.degrees() + 1
    e = graph.edges
    src = np.concatenate([e[:, 0], e[:, 1], np.arange(graph.n)])
    dst = np.concatenate([e[:, 1], e[:, 0], np.arange(graph.n)])
    coeff = 1.0 / np.sqrt(deg[src] * deg[dst])
    return src, dst, coeff


# ---------------------------------------------------------------------------
# generators


def random_tree(n: int, seed: int) -> Graph:
    """Uniform random labeled tree via Prufer-sequence decoding."""
    if n < 1:
        raise ValueError("tree needs at least one node")
    if n == 1:
        return Graph(1, np.zeros((0, 2), dtype=np.int64))
    if n == 2:
        return Graph(2, np.array([[0, 1]]))
    rng = np.random.default_rng(seed)
    prufer = rng.integers(0, n, size=n - 2)
    degree = np.ones(n, dtype=np.int64)
    for x in prufer:
        degree[x] += 1
    edges = []
    leaves = [int(v) for v in np.nonzero(degree == 1)[0]]
    heapq.heapify(leaves)
    for x in prufer:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, int(x)))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, int(x))
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((u, v))
    return Graph(n, np.array(edges))


def barabasi_albert(n: int, m: int, seed: int) -> Graph:
    """Preferential attachment starting from an m-clique.

    Every new node attaches to m distinct existing nodes chosen with
    probability proportional to degree, so the edge count is
    C(m, 2) + (n - m) * m.
    """
    if m < 1 or n < m:
        raise ValueError("need 1 <= m <= n")
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(m) for j in range(i + 1, m)]
    repeated: list[int] = []
    for i, j in edges:
        repeated += [i, j]
    if m == 1:
        repeated = [0]  # a lone seed node still needs to be attachable
    for v in range(m, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(repeated[rng.integers(0, len(repeated))])
        for t in targets:
            edges.append((t, v))
            repeated += [t, v]
    return Graph(n, np.array(edges))


def newman_watts_strogatz(n: int, k: int, p: float, seed: int) -> Graph:
    """Ring lattice with k neighbors plus random shortcut additions.

    k must be even and >= 2; each ring edge spawns a shortcut from its left
    endpoint to a uniform random node with probability p (no rewiring).
    """
    if k < 2 or k % 2 != 0:
        raise ValueError("neighbor count k must be even and >= 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError("shortcut probability must lie in [0, 1]")
    if n <= k:
        raise ValueError("ring lattice needs n > k")
    rng = np.random.default_rng(seed)
    seen = set()
    edges = []

    def put(u, v):
        if u == v:
            return
        key = (min(u, v), max(u, v))
        if key not in seen:
            seen.add(key)
            edges.append(key)

    for u in range(n):
        for j in range(1, k // 2 + 1):
            put(u, (u + j) % n)
    for u in range(n):
        for _ in range(k // 2):
            if rng.random() < p:
                put(u, int(rng.integers(0, n)))
    return Graph(n, np.array(edges))


def stochastic_block_model(
    n: int,
    p_in: float = 0.3,
    p_out: float | None = None,
    size_hi: int = 15,
    seed: int = 0,
) -> Graph:
    """Planted-community graph with community sizes in [ln n, size_hi].

    Sizes are drawn uniformly from [max(2, ceil(ln n)), size_hi] with the
    remainder handled so every community stays in range; p_out defaults to
    2/n.
    """
    if p_out is None:
        p_out = 2.0 / n
    lo = max(2, int(np.ceil(np.log(n))))
    if lo > size_hi:
        raise ValueError("ln(n) exceeds the maximum community size")
    rng = np.random.default_rng(seed)
    sizes = []
    remaining = n
    while remaining > size_hi:
        hi = min(size_hi, remaining - lo)
        sizes.append(int(rng.integers(lo, hi + 1)))
        remaining -= sizes[-1]
    if remaining:
        if remaining < lo and sizes:
            # merge the leftover into the last community if it fits, else rebalance
            if sizes[-1] + remaining <= size_hi:
                sizes[-1] += remaining
            else:
                take = lo - remaining
                sizes[-1] -= take
                sizes.append(remaining + take)
        else:
            sizes.append(remaining)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    same = labels[:, None] == labels[None, :]
    prob = np.where(same, p_in, p_out)
    draw = rng.random((n, n))
    adj = np.triu(draw < prob, 1)
    u, v = np.nonzero(adj)
    return Graph(n, np.stack([u, v], axis=1))


GENERATORS = {
    "tree": random_tree,
    "ba": barabasi_albert,
    "nws": newman_watts_strogatz,
    "sbm": stochastic_block_model,
}


def generate(kind: str, n: int, seed: int, **params) -> Graph:
    try:
        gen = GENERATORS[kind]
    except KeyError:
        raise ValueError(f"unknown graph kind {kind!r}; choose from {sorted(GENERATORS)}")
    return gen(n, seed=seed, **params)


# ---------------------------------------------------------------------------
# edge-list files


def write_edge_list(graph: Graph, path) -> None:
    """One "u<TAB>v" line per undirected edge, 0-indexed."""
    with open(path, "w") as fh:
        fh.write(f"# nodes: {graph.n}\n")
        for u, v in graph.edges:
            fh.write(f"{u}\t{v}\n")


def read_edge_list(path, n: int | None = None) -> Graph:
    """Parse an edge-list file; '#' comments and blank lines are skipped.

    The node count is max(id)+1 unless given (or found in a "# nodes:"
    comment written by :func:`write_edge_list`).
    """
    edges = []
    hinted = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line.startswith("#"):
                tail = line[1:].strip()
                if tail.startswith("nodes:"):
                    try:
                        hinted = int(tail.split(":", 1)[1])
                    except ValueError:
                        pass
                continue
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'u<TAB>v', got {raw!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-integer node id in {raw!r}") from exc
            if u < 0 or v < 0:
                raise ValueError(f"{path}:{lineno}: negative node id")
            edges.append((u, v))
    if n is None:
        n = hinted if hinted is not None else (max(max(e) for e in edges) + 1 if edges else 1)
    return Graph(n, np.array(edges, dtype=np.int64).reshape(-1, 2))

"""Synthetic tree-depth benchmark: generation, normalization, splits, bundles.

The dataset is a complete b-ary tree of a given depth whose node features
follow a Gaussian random walk down the tree (the root sits at the zero
vector, every child is drawn from N(parent, sigma0^2 I)).  The label of a
node is its depth.  Everything is reproducible from (max_d, b, dim, sigma0,
seed) alone, so the random stream is pinned down exactly rather than left to
whatever a library generator does:

- mix(x) is the splitmix64 finalizer:
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9  (mod 2^64)
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB  (mod 2^64)
    x =  x ^ (x >> 31)
- the 64-bit output stream for a seed is
    z_k = mix((seed + k * 0x9E3779B97F4A7C15) mod 2^64),  k = 1, 2, ...
- uniforms on (0, 1] are u_k = ((z_k >> 11) + 1) * 2^-53
- normals come from Box-Muller pairs over consecutive uniforms:
    r = sqrt(-2 ln u_{2j-1}), theta = 2 pi u_{2j} -> (r cos theta, r sin theta)
  truncated to the number of draws needed
- shuffles are Fisher-Yates descending with j = z_next mod (i + 1)

Feature normals are consumed in breadth-first node order (node 1, node 2,
...), coordinate by coordinate.  Split membership shuffles each depth's node
list in ascending depth order from a separate seed.
"""

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .graphs import Graph

_PHI = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

DEFAULT_NODE_CAP = 5_000_000

BUNDLE_FILES = ("meta.json", "edges.tsv", "features.tsv", "labels.tsv", "splits.tsv")


def splitmix64(seed: int, count: int) -> np.ndarray:
    """First ``count`` outputs of the splitmix64 stream for ``seed``."""
    if count < 0:
        raise ValueError("count must be non-negative")
    k = np.arange(1, count + 1, dtype=np.uint64)
    x = np.uint64(seed % (1 << 64)) + k * _PHI
    x = (x ^ (x >> np.uint64(30))) * _MIX1
    x = (x ^ (x >> np.uint64(27))) * _MIX2
    return x ^ (x >> np.uint64(31))


def uniform_stream(seed: int, count: int) -> np.ndarray:
    """Uniforms on (0, 1], 53-bit resolution."""
    z = splitmix64(seed, count)
    return ((z >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def normal_stream(seed: int, count: int) -> np.ndarray:
    """Standard normals via Box-Muller on the uniform stream."""
    pairs = (count + 1) // 2
    u = uniform_stream(seed, 2 * pairs).reshape(pairs, 2)
    r = np.sqrt(-2.0 * np.log(u[:, 0]))
    theta = 2.0 * np.pi * u[:, 1]
    out = np.empty(2 * pairs)
    out[0::2] = r * np.cos(theta)
    out[1::2] = r * np.sin(theta)
    return out[:count]


def _fisher_yates(values: np.ndarray, words) -> np.ndarray:
    """Shuffle a copy of ``values`` using ``words`` (an iterator of uint64)."""
    out = values.copy()
    for i in range(len(out) - 1, 0, -1):
        j = int(next(words)) % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out


@dataclass
class TreeDepthDataset:
    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    max_d: int
    b: int
    sigma0: float
    seed: int
    train_mask: np.ndarray = field(default=None)
    val_mask: np.ndarray = field(default=None)
    test_mask: np.ndarray = field(default=None)

    @property
    def num_nodes(self) -> int:
        return self.graph.n

    @property
    def num_classes(self) -> int:
        return self.max_d + 1

    def depth_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.max_d + 1)


def _level_sizes(max_d: int, b: int) -> np.ndarray:
    if b == 1:
        return np.ones(max_d + 1, dtype=np.int64)
    return b ** np.arange(max_d + 1, dtype=np.int64)


def generate(max_d: int = 16, b: int = 2, dim: int = 50, sigma0: float = 1.0,
             seed: int = 0, node_cap: int = DEFAULT_NODE_CAP) -> TreeDepthDataset:
    """Build the raw (un-normalized, un-split) dataset.

    Nodes are numbered breadth-first, so node j > 0 hangs off parent
    (j - 1) // b and the nodes of depth d occupy one contiguous block.
    """
    if max_d < 0 or b < 1 or dim < 1:
        raise ValueError("max_d >= 0, b >= 1 and dim >= 1 required")
    sizes = _level_sizes(max_d, b)
    n = int(sizes.sum())
    if n > node_cap:
        raise ValueError(
            "requested tree has %d nodes, above the cap of %d" % (n, node_cap)
        )
    offsets = np.concatenate([[0], np.cumsum(sizes)])

    children = np.arange(1, n, dtype=np.int64)
    parents = (children - 1) // b
    edges = np.stack([parents, children], axis=1)
    labels = np.repeat(np.arange(max_d + 1, dtype=np.int64), sizes)

    features = np.zeros((n, dim))
    if n > 1:
        noise = normal_stream(seed, (n - 1) * dim).reshape(n - 1, dim)
        for d in range(1, max_d + 1):
            lo, hi = offsets[d], offsets[d + 1]
            parent_block = features[offsets[d - 1]:offsets[d]]
            features[lo:hi] = np.repeat(parent_block, b, axis=0) + sigma0 * noise[lo - 1:hi - 1]

    graph = Graph(n, edges)
    return TreeDepthDataset(graph, features, labels, max_d, b, float(sigma0), seed)


def center_normalize(features: np.ndarray) -> np.ndarray:
    """Subtract the column means, then divide by the largest row norm.

    A batch of identical rows centers to all-zero and is returned as such
    (there is nothing to scale).
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 1:
        raise ValueError("features must be a non-empty 2-D matrix")
    centered = features - features.mean(axis=0)
    maxnorm = np.linalg.norm(centered, axis=1).max()
    if maxnorm > 0.0:
        centered = centered / maxnorm
    return centered


def split_counts(n_d: int) -> tuple:
    """Per-depth (train, val, test) counts for a depth with ``n_d`` nodes."""
    train = min(max(n_d // 3, 1), 100)
    val = min(n_d // 3, 50)
    val = min(val, n_d - train)
    return train, val, n_d - train - val


def split_masks(labels: np.ndarray, seed: int) -> tuple:
    """Boolean (train, val, test) masks, sampled per depth without replacement."""
    labels = np.asarray(labels)
    n = labels.shape[0]
    train = np.zeros(n, dtype=bool)
    val = np.zeros(n, dtype=bool)
    depths = np.unique(labels)
    swaps = int(sum(np.count_nonzero(labels == d) - 1 for d in depths))
    words = iter(splitmix64(seed, max(swaps, 0)))
    for d in depths:
        idx = np.flatnonzero(labels == d)
        shuffled = _fisher_yates(idx, words)
        n_train, n_val, _ = split_counts(len(idx))
        train[shuffled[:n_train]] = True
        val[shuffled[n_train:n_train + n_val]] = True
    test = ~(train | val)
    return train, val, test


def split(ds: TreeDepthDataset, seed: int) -> tuple:
    masks = split_masks(ds.labels, seed)
    ds.train_mask, ds.val_mask, ds.test_mask = masks
    return masks


def save_bundle(ds: TreeDepthDataset, bundle_dir: str) -> None:
    """Write the five-file text bundle; masks must partition the nodes."""
    if ds.train_mask is None or ds.val_mask is None or ds.test_mask is None:
        raise ValueError("dataset has no split masks; call split() first")
    counts = ds.train_mask.astype(int) + ds.val_mask.astype(int) + ds.test_mask.astype(int)
    if not np.all(counts == 1):
        raise ValueError("split masks must assign each node to exactly one split")
    os.makedirs(bundle_dir, exist_ok=True)
    meta = {
        "num_nodes": int(ds.graph.n),
        "num_edges": int(ds.graph.edges.shape[0]),
        "num_classes": int(ds.num_classes),
        "feature_dim": int(ds.features.shape[1]),
        "max_d": int(ds.max_d),
        "b": int(ds.b),
        "sigma0": float(ds.sigma0),
        "seed": int(ds.seed),
    }
    with open(os.path.join(bundle_dir, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(bundle_dir, "edges.tsv"), "w") as fh:
        for u, v in ds.graph.edges:
            fh.write("%d\t%d\n" % (min(u, v), max(u, v)))
    with open(os.path.join(bundle_dir, "features.tsv"), "w") as fh:
        np.savetxt(fh, ds.features, fmt="%.17g", delimiter="\t")
    with open(os.path.join(bundle_dir, "labels.tsv"), "w") as fh:
        fh.write("\n".join(str(int(x)) for x in ds.labels))
        fh.write("\n")
    names = np.where(ds.train_mask, "train", np.where(ds.val_mask, "val", "test"))
    with open(os.path.join(bundle_dir, "splits.tsv"), "w") as fh:
        fh.write("\n".join(names))
        fh.write("\n")


def _read_lines(bundle_dir: str, name: str):
    path = os.path.join(bundle_dir, name)
    if not os.path.isfile(path):
        raise ValueError("%s: file missing from bundle" % path)
    with open(path) as fh:
        return path, [line.rstrip("\n") for line in fh if line.strip()]


def load_bundle(bundle_dir: str) -> TreeDepthDataset:
    """Read a bundle back; errors name the offending file (and line)."""
    meta_path = os.path.join(bundle_dir, "meta.json")
    if not os.path.isfile(meta_path):
        raise ValueError("%s: file missing from bundle" % meta_path)
    with open(meta_path) as fh:
        try:
            meta = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError("%s:%d: %s" % (meta_path, exc.lineno, exc.msg)) from exc
    for key in ("num_nodes", "num_edges", "num_classes", "feature_dim",
                "max_d", "b", "sigma0", "seed"):
        if key not in meta:
            raise ValueError("%s: missing key %r" % (meta_path, key))
    n = int(meta["num_nodes"])

    path, lines = _read_lines(bundle_dir, "edges.tsv")
    edges = np.zeros((len(lines), 2), dtype=np.int64)
    for i, line in enumerate(lines):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError("%s:%d: expected two tab-separated fields" % (path, i + 1))
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError("%s:%d: non-integer node id" % (path, i + 1)) from None
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError("%s:%d: node id out of range" % (path, i + 1))
        edges[i] = u, v
    if len(lines) != int(meta["num_edges"]):
        raise ValueError("%s: expected %d edges, found %d" % (path, int(meta["num_edges"]), len(lines)))

    path, lines = _read_lines(bundle_dir, "features.tsv")
    if len(lines) != n:
        raise ValueError("%s: expected %d rows, found %d" % (path, n, len(lines)))
    dim = int(meta["feature_dim"])
    features = np.zeros((n, dim))
    for i, line in enumerate(lines):
        parts = line.split("\t")
        if len(parts) != dim:
            raise ValueError("%s:%d: expected %d fields, found %d" % (path, i + 1, dim, len(parts)))
        try:
            features[i] = [float(p) for p in parts]
        except ValueError:
            raise ValueError("%s:%d: non-numeric feature value" % (path, i + 1)) from None

    path, lines = _read_lines(bundle_dir, "labels.tsv")
    if len(lines) != n:
        raise ValueError("%s: expected %d rows, found %d" % (path, n, len(lines)))
    labels = np.zeros(n, dtype=np.int64)
    for i, line in enumerate(lines):
        try:
            labels[i] = int(line)
        except ValueError:
            raise ValueError("%s:%d: non-integer label" % (path, i + 1)) from None
        if not 0 <= labels[i] < int(meta["num_classes"]):
            raise ValueError("%s:%d: label out of range" % (path, i + 1))

    path, lines = _read_lines(bundle_dir, "splits.tsv")
    if len(lines) != n:
        raise ValueError("%s: expected %d rows, found %d" % (path, n, len(lines)))
    train = np.zeros(n, dtype=bool)
    val = np.zeros(n, dtype=bool)
    test = np.zeros(n, dtype=bool)
    masks = {"train": train, "val": val, "test": test}
    for i, line in enumerate(lines):
        if line not in masks:
            raise ValueError("%s:%d: split must be train, val or test" % (path, i + 1))
        masks[line][i] = True

    graph = Graph(n, edges)
    return TreeDepthDataset(
        graph, features, labels, int(meta["max_d"]), int(meta["b"]),
        float(meta["sigma0"]), int(meta["seed"]),
        train_mask=train, val_mask=val, test_mask=test,
    )

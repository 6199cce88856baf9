"""Synthetic two-class block graphs.

Each class has one seed graph (a random tree plus one extra edge, both seeds
sharing a degree multiset). Dataset graphs blow every seed vertex up into a
block of ``r`` vertices, connect vertices inside a block and across blocks of
adjacent seed vertices with probability ``p``, and add ``m`` random noise edges.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .graph import Dataset, Graph, disjoint_union
from .refinement import refine_to_fixpoint, wl_refine


@dataclass(frozen=True)
class BlockGenParams:
    seed_vertices: int = 16
    replication: int = 8
    edge_probability: float = 1.0
    noise_edges: int = 0
    graphs_per_class: int = 200
    rng_seed: int = 0

    def __post_init__(self):
        if self.seed_vertices < 4:
            raise ValueError("seed_vertices must be at least 4")
        if self.replication < 1:
            raise ValueError("replication must be at least 1")
        if not 0 < self.edge_probability <= 1:
            raise ValueError("edge_probability must be in (0, 1]")
        if self.noise_edges < 0:
            raise ValueError("noise_edges must be non-negative")
        if self.graphs_per_class < 1:
            raise ValueError("graphs_per_class must be positive")

    @property
    def name(self) -> str:
        return f"S_{self.edge_probability}_{self.noise_edges}"


PRESETS = {
    "L1": dict(edge_probability=1.0, noise_edges=200, graphs_per_class=5000, seed_vertices=25, replication=10),
    "L2": dict(edge_probability=1.0, noise_edges=100, graphs_per_class=10000, seed_vertices=25, replication=10),
    "L3": dict(edge_probability=1.0, noise_edges=200, graphs_per_class=10000, seed_vertices=10, replication=15),
    "L4": dict(edge_probability=1.0, noise_edges=400, graphs_per_class=10000, seed_vertices=25, replication=10),
}


def preset(name: str, rng_seed: int = 0, graphs_per_class: int | None = None) -> BlockGenParams:
    """``S_<p>_<m>`` (16-vertex seeds, blocks of 8, 200 graphs per class) or ``L1``..``L4``."""
    if name in PRESETS:
        kw = dict(PRESETS[name])
    elif name.startswith("S_"):
        try:
            _, p, m = name.split("_")
            kw = dict(edge_probability=float(p), noise_edges=int(m))
        except ValueError:
            raise ValueError(f"malformed preset {name!r}, expected S_<p>_<m>") from None
    else:
        raise ValueError(f"unknown preset {name!r}")
    if graphs_per_class is not None:
        kw["graphs_per_class"] = graphs_per_class
    return BlockGenParams(rng_seed=rng_seed, **kw)


def random_tree(n: int, rng: np.random.Generator) -> list:
    """Uniform labeled tree on ``n`` vertices via a random Pruefer sequence."""
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    seq = rng.integers(0, n, size=n - 2).tolist()
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u, v = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, v))
    return edges


def random_unicyclic(n: int, rng: np.random.Generator) -> Graph:
    tree = random_tree(n, rng)
    present = set(tree)
    non_edges = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in present]
    extra = non_edges[int(rng.integers(len(non_edges)))]
    return Graph.from_edge_list(n, tree + [extra])


def wl_distinguishes(g1: Graph, g2: Graph) -> bool:
    """True if the stable WL colorings of the two graphs have different color histograms."""
    union = disjoint_union([g1, g2])
    hier, _ = refine_to_fixpoint(union.graph, None, wl_refine)
    leaf = hier.leaf_coloring
    a = np.sort(leaf[union.owner == 0])
    b = np.sort(leaf[union.owner == 1])
    return not np.array_equal(a, b)


def generate_seed_pair(b: int, rng: np.random.Generator, max_attempts: int = 10_000):
    """Two WL-distinguishable (hence non-isomorphic) tree-plus-one-edge graphs with equal degree multisets."""
    if b < 4:
        raise ValueError("seed graphs need at least 4 vertices")
    first = random_unicyclic(b, rng)
    target = np.sort(first.degrees)
    for _ in range(max_attempts):
        second = random_unicyclic(b, rng)
        if np.array_equal(np.sort(second.degrees), target) and wl_distinguishes(first, second):
            return first, second
    raise RuntimeError(f"no suitable seed pair found in {max_attempts} attempts")


def expand_block_graph(seed: Graph, r: int, p: float, m: int, rng: np.random.Generator) -> Graph:
    b = seed.vertex_count
    n = b * r
    candidates = []
    for s in range(b):
        base = s * r
        candidates.extend((base + i, base + j) for i in range(r) for j in range(i + 1, r))
    for s, t in seed.edges.tolist():
        candidates.extend((s * r + i, t * r + j) for i in range(r) for j in range(r))
    candidates = np.asarray(candidates, dtype=np.int64).reshape(-1, 2)
    if p < 1.0:
        candidates = candidates[rng.random(len(candidates)) < p]
    edges = {(min(u, v), max(u, v)) for u, v in candidates.tolist()}

    available = n * (n - 1) // 2 - len(edges)
    if m > available:
        raise ValueError(f"cannot add {m} noise edges, only {available} non-edges left")
    if m:
        if m > available // 2:
            pool = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in edges]
            pick = rng.choice(len(pool), size=m, replace=False)
            edges.update(pool[i] for i in sorted(pick.tolist()))
        else:
            added = 0
            while added < m:
                u, v = rng.integers(0, n, size=2).tolist()
                if u == v:
                    continue
                e = (min(u, v), max(u, v))
                if e not in edges:
                    edges.add(e)
                    added += 1
    return Graph.from_edge_list(n, sorted(edges))


def generate_dataset(params: BlockGenParams) -> Dataset:
    rng = np.random.default_rng([params.rng_seed, 0])
    seeds = generate_seed_pair(params.seed_vertices, rng)
    graphs, labels = [], []
    for cls, seed in enumerate(seeds):
        for i in range(params.graphs_per_class):
            g_rng = np.random.default_rng([params.rng_seed, 1, cls, i])
            graphs.append(
                expand_block_graph(seed, params.replication, params.edge_probability, params.noise_edges, g_rng)
            )
            labels.append(cls)
    return Dataset(graphs, labels, name=params.name)

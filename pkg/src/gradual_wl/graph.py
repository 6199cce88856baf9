"""Undirected labeled graphs, datasets, and the disjoint union used for refinement."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph with integer vertex labels and optional edge labels.

    ``edges`` is an ``(m, 2)`` array with ``u < v`` in every row, sorted
    lexicographically. ``edge_labels`` (if given) is aligned with ``edges``.
    """

    vertex_count: int
    edges: np.ndarray
    vertex_labels: np.ndarray
    edge_labels: Optional[np.ndarray] = None

    def __post_init__(self):
        n = int(self.vertex_count)
        if n < 0:
            raise ValueError("vertex_count must be non-negative")
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        labels = np.asarray(self.vertex_labels, dtype=np.int64).reshape(-1)
        if labels.shape[0] != n:
            raise ValueError(f"expected {n} vertex labels, got {labels.shape[0]}")
        if labels.size and labels.min() < 0:
            raise ValueError("vertex labels must be non-negative")
        elabels = None
        if self.edge_labels is not None:
            elabels = np.asarray(self.edge_labels, dtype=np.int64).reshape(-1)
            if elabels.shape[0] != edges.shape[0]:
                raise ValueError("edge_labels must cover every edge exactly once")
            if elabels.size and elabels.min() < 0:
                raise ValueError("edge labels must be non-negative")
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise ValueError("self-loops are not allowed")
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        order = np.lexsort((hi, lo))
        lo, hi = lo[order], hi[order]
        if lo.size > 1:
            dup = (lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])
            if dup.any():
                i = int(np.argmax(dup))
                raise ValueError(f"duplicate edge ({lo[i]}, {hi[i]})")
        edges = np.stack([lo, hi], axis=1) if lo.size else np.zeros((0, 2), dtype=np.int64)
        if elabels is not None:
            elabels = elabels[order]
            elabels.setflags(write=False)
        edges.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "vertex_count", n)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "vertex_labels", labels)
        object.__setattr__(self, "edge_labels", elabels)

    @classmethod
    def from_edge_list(cls, n, edges, vertex_labels=None, edge_labels=None) -> "Graph":
        if vertex_labels is None:
            vertex_labels = np.zeros(n, dtype=np.int64)
        edges = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        return cls(n, edges, vertex_labels, edge_labels)

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    @property
    def has_edge_labels(self) -> bool:
        return self.edge_labels is not None

    @cached_property
    def directed_arcs(self):
        """Both orientations of every edge as ``(src, dst, label)`` arrays, sorted by ``src``."""
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        if self.edge_labels is None:
            lab = np.zeros(src.shape[0], dtype=np.int64)
        else:
            lab = np.concatenate([self.edge_labels, self.edge_labels])
        order = np.lexsort((dst, src))
        return src[order], dst[order], lab[order]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.reshape(-1), minlength=self.vertex_count)

    @cached_property
    def neighbors(self) -> list:
        src, dst, _ = self.directed_arcs
        bounds = np.searchsorted(src, np.arange(self.vertex_count + 1))
        return [dst[bounds[v]:bounds[v + 1]].tolist() for v in range(self.vertex_count)]

    @cached_property
    def edge_dict(self) -> dict:
        """``{(u, v): label}`` with ``u < v``; label is 0 for unlabeled graphs."""
        labels = self.edge_labels if self.edge_labels is not None else np.zeros(self.edge_count, dtype=np.int64)
        return {(int(u), int(v)): int(l) for (u, v), l in zip(self.edges, labels)}

    def same_as(self, other: "Graph") -> bool:
        """Index-equal comparison (vertex count, edge set, all labels)."""
        if self.vertex_count != other.vertex_count:
            return False
        if not np.array_equal(self.vertex_labels, other.vertex_labels):
            return False
        return self.edge_dict == other.edge_dict and self.has_edge_labels == other.has_edge_labels

    def __repr__(self):
        return f"Graph(n={self.vertex_count}, m={self.edge_count})"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Ordered graphs with one class label each.

    Labels inside the graphs are dense indices into ``vertex_label_values`` /
    ``edge_label_values``, which hold the original labels for export. A value
    of ``None`` for either means that the data carried no such labels.
    """

    graphs: tuple
    class_labels: tuple
    name: str = "dataset"
    vertex_label_values: Optional[tuple] = None
    edge_label_values: Optional[tuple] = None

    def __post_init__(self):
        graphs = tuple(self.graphs)
        classes = tuple(int(c) for c in self.class_labels)
        if len(graphs) != len(classes):
            raise ValueError("class_labels length must equal number of graphs")
        edge_flags = {g.has_edge_labels for g in graphs}
        if len(edge_flags) > 1:
            raise ValueError("either all graphs carry edge labels or none do")
        object.__setattr__(self, "graphs", graphs)
        object.__setattr__(self, "class_labels", classes)

    def __len__(self):
        return len(self.graphs)

    def __getitem__(self, i):
        return self.graphs[i]

    def __iter__(self):
        return iter(self.graphs)

    @property
    def has_edge_labels(self) -> bool:
        return bool(self.graphs) and self.graphs[0].has_edge_labels

    def vertex_alphabet_size(self) -> int:
        if not self.graphs:
            return 0
        return len(np.unique(np.concatenate([g.vertex_labels for g in self.graphs])))


@dataclass(frozen=True, eq=False)
class Union:
    """Disjoint union of a dataset together with the vertex bookkeeping.

    ``owner[v]`` and ``local[v]`` give the graph index and the local vertex id
    of global vertex ``v``; ``offsets[i]`` is the first global id of graph ``i``.
    """

    graph: Graph
    owner: np.ndarray
    local: np.ndarray
    offsets: np.ndarray

    def vertices_of(self, i: int) -> np.ndarray:
        return np.arange(self.offsets[i], self.offsets[i + 1])

    @property
    def graph_count(self) -> int:
        return len(self.offsets) - 1


def disjoint_union(graphs: Sequence[Graph] | Dataset) -> Union:
    graphs = list(graphs)
    if not graphs:
        raise ValueError("disjoint union of an empty collection")
    sizes = np.array([g.vertex_count for g in graphs], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    edges = np.concatenate([g.edges + off for g, off in zip(graphs, offsets[:-1])])
    labels = np.concatenate([g.vertex_labels for g in graphs])
    elabels = None
    if graphs[0].has_edge_labels:
        elabels = np.concatenate([g.edge_labels for g in graphs])
    owner = np.repeat(np.arange(len(graphs)), sizes)
    local = np.arange(offsets[-1]) - offsets[owner]
    union = Graph(int(offsets[-1]), edges, labels, elabels)
    for arr in (owner, local, offsets):
        arr.setflags(write=False)
    return Union(union, owner, local, offsets)


def induced_member(union: Union, i: int) -> Graph:
    """Recover member graph ``i`` from a union (inverse of :func:`disjoint_union`)."""
    lo, hi = union.offsets[i], union.offsets[i + 1]
    g = union.graph
    mask = (g.edges[:, 0] >= lo) & (g.edges[:, 0] < hi)
    el = g.edge_labels[mask] if g.edge_labels is not None else None
    return Graph(int(hi - lo), g.edges[mask] - lo, g.vertex_labels[lo:hi], el)

"""Classical, sequential and gradual Weisfeiler-Leman refinement.

Every update function maps ``(graph, hierarchy)`` to a hierarchy. It returns
the *same object* when the leaf coloring is already stable, and otherwise a
hierarchy with one more level whose leaf coloring strictly refines the old one.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .hierarchy import ColorHierarchy, SplitRecord
from .kmeans import weighted_kmeans

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClusteringParams:
    k: int = 2
    rng_seed: int = 0
    max_kmeans_iters: int = 100
    convergence_tol: float = 0.0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.max_kmeans_iters < 1:
            raise ValueError("max_kmeans_iters must be positive")
        if self.convergence_tol < 0:
            raise ValueError("convergence_tol must be non-negative")


def neighbor_signatures(graph: Graph, coloring: np.ndarray, stride: int):
    """Sparse neighbor color multisets of all vertices.

    Returns ``(ptr, keys, counts)`` in CSR layout: vertex ``v`` has keys
    ``keys[ptr[v]:ptr[v+1]]`` (ascending) with multiplicities ``counts[...]``.
    A key is the neighbor color, or ``edge_label * stride + color`` when the
    graph has edge labels.
    """
    src, dst, lab = graph.directed_arcs
    key = coloring[dst]
    if graph.has_edge_labels:
        key = lab * stride + key
    order = np.lexsort((key, src))
    s, k = src[order], key[order]
    if len(s):
        new = np.ones(len(s), dtype=bool)
        new[1:] = (s[1:] != s[:-1]) | (k[1:] != k[:-1])
        idx = np.flatnonzero(new)
        us, uk = s[idx], k[idx]
        cnt = np.diff(np.append(idx, len(s)))
    else:
        us = uk = cnt = np.zeros(0, dtype=np.int64)
    ptr = np.searchsorted(us, np.arange(graph.vertex_count + 1))
    return ptr, uk, cnt


def color_classes(coloring: np.ndarray):
    """``[(color, vertices)]`` in ascending color order."""
    order = np.argsort(coloring, kind="stable")
    sorted_colors = coloring[order]
    if len(order) == 0:
        return []
    cuts = np.flatnonzero(np.diff(sorted_colors)) + 1
    starts = np.concatenate([[0], cuts])
    ends = np.concatenate([cuts, [len(order)]])
    return [(int(sorted_colors[a]), order[a:b]) for a, b in zip(starts, ends)]


def _grow(graph: Graph, hier: ColorHierarchy, decide) -> ColorHierarchy:
    """Split every leaf color whose members have differing signatures.

    ``decide(points, weights, parent)`` receives the distinct signature
    vectors of one class (sorted lexicographically) and returns canonical
    cluster labels and centroids.
    """
    coloring = hier.leaf_coloring
    stride = hier.n_nodes
    ptr, keys, cnts = neighbor_signatures(graph, coloring, stride)
    ptr_l, keys_l, cnts_l = ptr.tolist(), keys.tolist(), cnts.tolist()

    next_id = hier.n_nodes
    new_parents = []
    new_level = np.empty(hier.n_vertices, dtype=np.int64)
    splits = {}
    grew = False
    for color, verts in color_classes(coloring):
        groups = {}
        if len(verts) > 1:
            for v in verts.tolist():
                a, b = ptr_l[v], ptr_l[v + 1]
                groups.setdefault((tuple(keys_l[a:b]), tuple(cnts_l[a:b])), []).append(v)
        if len(groups) <= 1:
            new_parents.append(color)
            new_level[verts] = next_id
            next_id += 1
            continue

        sigs = list(groups)
        dims = np.unique(np.fromiter((x for sk, _ in sigs for x in sk), dtype=np.int64))
        points = np.zeros((len(sigs), len(dims)))
        for row, (sk, sc) in enumerate(sigs):
            points[row, np.searchsorted(dims, sk)] = sc
        order = np.lexsort(points.T[::-1])
        points = points[order]
        sigs = [sigs[i] for i in order]
        weights = np.array([len(groups[s]) for s in sigs], dtype=np.float64)

        labels, centers = decide(points, weights, color)
        n_children = int(labels.max()) + 1
        if n_children < 2:
            raise RuntimeError(f"update did not split color {color} despite differing signatures")
        children = np.arange(next_id, next_id + n_children)
        known = {}
        for sig, lab in zip(sigs, labels.tolist()):
            new_level[groups[sig]] = children[lab]
            known[sig] = int(children[lab])
        new_parents.extend([color] * n_children)
        splits[color] = SplitRecord(stride, dims, children, centers, known)
        next_id += n_children
        grew = True

    if not grew:
        return hier
    return hier.extend(np.asarray(new_parents, dtype=np.int64), new_level, splits)


def wl_refine(graph: Graph, hierarchy: ColorHierarchy) -> ColorHierarchy:
    """One classical WL step: every distinct signature gets its own child color."""
    return _grow(graph, hierarchy, lambda pts, w, parent: (np.arange(len(pts)), pts.copy()))


def kmeans_renep(graph: Graph, hierarchy: ColorHierarchy, params: ClusteringParams) -> ColorHierarchy:
    """One gradual step: distinct signatures of each color are clustered into at most ``k`` children."""
    depth = hierarchy.top_depth

    def decide(points, weights, parent):
        if len(points) <= params.k:
            return np.arange(len(points)), points.copy()
        rng = np.random.default_rng([params.rng_seed, depth, parent])
        return weighted_kmeans(
            points, weights, params.k, rng, max_iter=params.max_kmeans_iters, tol=params.convergence_tol
        )

    return _grow(graph, hierarchy, decide)


def _neighbor_counts(graph: Graph, in_class: np.ndarray, n_edge_labels: int) -> np.ndarray:
    src, dst, lab = graph.directed_arcs
    hit = in_class[dst]
    counts = np.zeros((graph.vertex_count, n_edge_labels), dtype=np.int64)
    np.add.at(counts, (src[hit], lab[hit]), 1)
    return counts


def sequential_wl_refine(graph: Graph, hierarchy: ColorHierarchy, work_stack: list):
    """Refine by the next stacked color that actually splits something.

    Returns ``(hierarchy, stack)``. The input stack is not modified. If the
    stack drains without a split, the coloring is stable and the hierarchy is
    returned unchanged.
    """
    stack = list(work_stack)
    coloring = hierarchy.leaf_coloring
    n_edge_labels = int(graph.edge_labels.max()) + 1 if graph.has_edge_labels and graph.edge_count else 1
    while stack:
        splitter = stack.pop()
        in_class = hierarchy.levels[hierarchy.depth[splitter]] == splitter
        counts = _neighbor_counts(graph, in_class, n_edge_labels)
        rows = np.column_stack([coloring, counts])
        uniq, inverse = np.unique(rows, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        if len(uniq) == len(np.unique(coloring)):
            continue
        # uniq is sorted by (parent color, counts): children come out grouped per parent
        child_ids = hierarchy.n_nodes + np.arange(len(uniq))
        new_level = child_ids[inverse]
        new_parents = uniq[:, 0].astype(np.int64)
        sizes = np.bincount(inverse, minlength=len(uniq))
        for parent in np.unique(new_parents):
            idx = np.flatnonzero(new_parents == parent)
            if len(idx) < 2:
                continue
            largest = idx[int(np.argmax(sizes[idx]))]
            stack.extend(int(child_ids[i]) for i in idx if i != largest)
        return hierarchy.extend(new_parents, new_level, {}), stack
    return hierarchy, stack


class SequentialUpdate:
    """Stateful wrapper so sequential WL can drive :func:`refine_to_depth`."""

    def __init__(self):
        self.stack = None

    def __call__(self, graph: Graph, hierarchy: ColorHierarchy) -> ColorHierarchy:
        if self.stack is None:
            self.stack = hierarchy.colors_at(0).tolist()
        hierarchy, self.stack = sequential_wl_refine(graph, hierarchy, self.stack)
        return hierarchy


def make_update(kind: str = "wl", k: int = 2, seed: int = 0, max_kmeans_iters: int = 100, tol: float = 0.0):
    """Build an update callable: ``"wl"``, ``"kmeans"`` or ``"sequential"``."""
    if kind == "wl":
        return wl_refine
    if kind == "kmeans":
        params = ClusteringParams(k=k, rng_seed=seed, max_kmeans_iters=max_kmeans_iters, convergence_tol=tol)
        return lambda g, t: kmeans_renep(g, t, params)
    if kind == "sequential":
        return SequentialUpdate()
    raise ValueError(f"unknown update {kind!r}")


def refine_to_depth(graph: Graph, initial_labels=None, update=wl_refine, h: int = 3):
    """Run ``h`` refinement iterations from the label coloring.

    Returns ``(hierarchy, colorings)`` with ``len(colorings) == h + 1``. Once
    the coloring is stable, the remaining entries repeat the stable coloring.
    """
    if h < 0:
        raise ValueError("h must be non-negative")
    labels = graph.vertex_labels if initial_labels is None else initial_labels
    hier = ColorHierarchy.from_labels(labels)
    colorings = [hier.leaf_coloring]
    for _ in range(h):
        nxt = update(graph, hier)
        if nxt.n_nodes == hier.n_nodes:
            break
        hier = nxt
        colorings.append(hier.leaf_coloring)
    while len(colorings) < h + 1:
        colorings.append(hier.leaf_coloring)
    return hier, colorings


def refine_to_fixpoint(graph: Graph, initial_labels=None, update=wl_refine, max_iter=None):
    """Refine until stable. Returns ``(hierarchy, iterations)``."""
    labels = graph.vertex_labels if initial_labels is None else initial_labels
    hier = ColorHierarchy.from_labels(labels)
    limit = max(graph.vertex_count, 1) if max_iter is None else max_iter
    for it in range(limit + 1):
        nxt = update(graph, hier)
        if nxt.n_nodes == hier.n_nodes:
            return hier, it
        hier = nxt
    raise RuntimeError(f"no fixpoint after {limit} iterations")


def is_stable(graph: Graph, coloring) -> bool:
    coloring = np.asarray(coloring, dtype=np.int64)
    stride = int(coloring.max()) + 1 if coloring.size else 1
    ptr, keys, cnts = neighbor_signatures(graph, coloring, stride)
    ptr_l, keys_l, cnts_l = ptr.tolist(), keys.tolist(), cnts.tolist()
    for _, verts in color_classes(coloring):
        first = None
        for v in verts.tolist():
            a, b = ptr_l[v], ptr_l[v + 1]
            sig = (keys_l[a:b], cnts_l[a:b])
            if first is None:
                first = sig
            elif sig != first:
                return False
    return True


def partition_of(coloring) -> frozenset:
    """Color-name-free view of a coloring, for comparing partitions."""
    classes = {}
    for v, c in enumerate(np.asarray(coloring).tolist()):
        classes.setdefault(c, []).append(v)
    return frozenset(frozenset(vs) for vs in classes.values())


def refines(finer, coarser) -> bool:
    """True iff ``finer`` is a refinement of ``coarser``."""
    finer = np.asarray(finer)
    coarser = np.asarray(coarser)
    pairs = np.unique(np.column_stack([finer, coarser]), axis=0)
    return len(np.unique(pairs[:, 0])) == len(pairs)


def inductive_assign(new_graph: Graph, hierarchy: ColorHierarchy) -> list:
    """Color an unseen graph top-down using the choices recorded in ``hierarchy``.

    At each level a vertex follows the only child of its color, or, when the
    color was split, the child recorded for its exact signature; signatures
    never seen in training go to the child with the nearest centroid. Labels
    outside the training alphabet get the reserved color
    ``hierarchy.n_nodes + level`` at every level.
    """
    n = new_graph.vertex_count
    unseen_base = hierarchy.n_nodes
    children_of = {}
    for c in range(1, hierarchy.n_nodes):
        children_of.setdefault(int(hierarchy.parent[c]), []).append(c)

    current = np.array(
        [hierarchy.label_colors.get(int(l), unseen_base) for l in new_graph.vertex_labels.tolist()],
        dtype=np.int64,
    )
    colorings = [current]
    src, dst, lab = new_graph.directed_arcs
    nbrs = [[] for _ in range(n)]
    for u, v, l in zip(src.tolist(), dst.tolist(), lab.tolist()):
        nbrs[u].append((v, l))

    for level in range(1, hierarchy.top_depth + 1):
        prev = colorings[-1].tolist()
        nxt = np.empty(n, dtype=np.int64)
        for v in range(n):
            c = prev[v]
            kids = children_of.get(c)
            if c >= unseen_base or not kids:
                nxt[v] = unseen_base + level
                continue
            if len(kids) == 1:
                nxt[v] = kids[0]
                continue
            rec = hierarchy.splits[c]
            counter = {}
            for u, l in nbrs[v]:
                cu = prev[u]
                key = -1 - l if cu >= unseen_base else (l * rec.stride + cu if new_graph.has_edge_labels else cu)
                counter[key] = counter.get(key, 0) + 1
            keys = sorted(counter)
            sig = (tuple(keys), tuple(counter[x] for x in keys))
            child = rec.known.get(sig)
            if child is None:
                vec = np.zeros(len(rec.dims))
                for key, cnt in counter.items():
                    pos = np.searchsorted(rec.dims, key)
                    if pos < len(rec.dims) and rec.dims[pos] == key:
                        vec[pos] = cnt
                d = np.sum((rec.centroids - vec) ** 2, axis=1)
                child = int(rec.children[int(np.argmin(d))])
            nxt[v] = child
        colorings.append(nxt)
    return colorings

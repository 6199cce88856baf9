"""Graph edit distance upper bounds from tree-metric vertex assignments.

The color hierarchy is read as a tree metric on vertices (path length between
their leaf colors). An optimal assignment under a tree metric is found in
linear time by deconstructing the tree bottom-up, and the edit path induced
by that assignment gives an upper bound on the edit distance.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graph import Dataset, Graph, Union, disjoint_union
from .hierarchy import ROOT, ColorHierarchy
from .refinement import make_update, refine_to_depth


class SizeGuardError(ValueError):
    """Input too large for an exhaustive routine."""


@dataclass(frozen=True)
class EditCostModel:
    vertex_insert: float = 1.0
    vertex_delete: float = 1.0
    vertex_relabel: float = 1.0
    edge_insert: float = 1.0
    edge_delete: float = 1.0
    edge_relabel: float = 1.0

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if value < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def from_file(cls, path) -> "EditCostModel":
        """Flat ``key=value`` file; unknown keys are rejected."""
        values = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key=value")
                key, value = (s.strip() for s in line.split("=", 1))
                if key not in cls.__dataclass_fields__:
                    raise ValueError(f"{path}:{lineno}: unknown cost {key!r}")
                values[key] = float(value)
        return cls(**values)


@dataclass(frozen=True)
class Assignment:
    matched: tuple
    deleted: tuple
    inserted: tuple

    def relabel(self, g_map, h_map) -> "Assignment":
        """Translate vertex ids, e.g. from union ids to local ids."""
        return Assignment(
            tuple((int(g_map[u]), int(h_map[v])) for u, v in self.matched),
            tuple(int(g_map[u]) for u in self.deleted),
            tuple(int(h_map[v]) for v in self.inserted),
        )


def tree_metric_assignment(hierarchy: ColorHierarchy, verts_g, verts_h) -> Assignment:
    """Optimal assignment between two vertex sets under the hierarchy tree metric.

    Nodes are processed deepest first, ascending color id within a depth. At
    each node the elements of both sides are paired in ascending id order and
    the surplus moves to the parent. Whatever is left at the root is deleted
    (first set) or inserted (second set).
    """
    n = hierarchy.n_vertices
    verts_g = [int(v) for v in verts_g]
    verts_h = [int(v) for v in verts_h]
    for v in itertools.chain(verts_g, verts_h):
        if not 0 <= v < n:
            raise ValueError(f"vertex {v} has no leaf in the hierarchy")
    top = hierarchy.top_depth
    leaf = hierarchy.levels[top]
    parent = hierarchy.parent

    at = {}
    for v in verts_g:
        at.setdefault(int(leaf[v]), ([], []))[0].append(v)
    for v in verts_h:
        at.setdefault(int(leaf[v]), ([], []))[1].append(v)

    matched = []
    for _ in range(top + 2):
        nxt = {}
        for node in sorted(at):
            gs, hs = at[node]
            gs.sort()
            hs.sort()
            m = min(len(gs), len(hs))
            matched.extend(zip(gs[:m], hs[:m]))
            if node == ROOT:
                nxt[ROOT] = (gs[m:], hs[m:])
                continue
            if len(gs) > m or len(hs) > m:
                bucket = nxt.setdefault(int(parent[node]), ([], []))
                bucket[0].extend(gs[m:])
                bucket[1].extend(hs[m:])
        at = nxt
    rest_g, rest_h = at.get(ROOT, ([], []))
    return Assignment(tuple(matched), tuple(sorted(rest_g)), tuple(sorted(rest_h)))


def assignment_tree_cost(hierarchy: ColorHierarchy, a: Assignment) -> int:
    """Tree distance of matched pairs plus root distance of unmatched elements."""
    to_root = hierarchy.top_depth + 1
    cost = sum(hierarchy.tree_distance(u, v) for u, v in a.matched)
    return cost + to_root * (len(a.deleted) + len(a.inserted))


def _vertex_map(g: Graph, h: Graph, a: Assignment):
    fwd = {u: v for u, v in a.matched}
    if len(fwd) != len(a.matched) or len(set(fwd.values())) != len(a.matched):
        raise ValueError("assignment is not injective")
    if set(fwd) | set(a.deleted) != set(range(g.vertex_count)):
        raise ValueError("assignment does not cover the first graph")
    if set(fwd.values()) | set(a.inserted) != set(range(h.vertex_count)):
        raise ValueError("assignment does not cover the second graph")
    return fwd


def edit_cost_from_assignment(g: Graph, h: Graph, a: Assignment, costs: EditCostModel = EditCostModel()) -> float:
    """Cost of the edit path induced by ``a`` (local vertex ids)."""
    fwd = _vertex_map(g, h, a)
    gl, hl = g.vertex_labels, h.vertex_labels
    cost = sum(costs.vertex_relabel for u, v in fwd.items() if gl[u] != hl[v])
    cost += costs.vertex_delete * len(a.deleted) + costs.vertex_insert * len(a.inserted)
    ge, he = g.edge_dict, h.edge_dict
    covered = set()
    for (u1, u2), lab in ge.items():
        if u1 in fwd and u2 in fwd:
            v1, v2 = fwd[u1], fwd[u2]
            key = (min(v1, v2), max(v1, v2))
            covered.add(key)
            if key not in he:
                cost += costs.edge_delete
            elif he[key] != lab:
                cost += costs.edge_relabel
        else:
            cost += costs.edge_delete
    cost += costs.edge_insert * sum(1 for key in he if key not in covered)
    return float(cost)


def edit_path(g: Graph, h: Graph, a: Assignment, costs: EditCostModel = EditCostModel()) -> list:
    """Explicit edit operations induced by ``a`` as ``(op, args, cost)`` tuples.

    Vertices are named ``("g", u)`` for vertices of ``g`` and ``("h", v)`` for
    inserted ones. Edges incident to deleted vertices are removed first.
    """
    fwd = _vertex_map(g, h, a)
    back = {v: ("g", u) for u, v in fwd.items()}
    back.update({v: ("h", v) for v in a.inserted})
    ops = []
    ge, he = g.edge_dict, h.edge_dict
    covered = set()
    for (u1, u2), lab in ge.items():
        if u1 in fwd and u2 in fwd:
            key = tuple(sorted((fwd[u1], fwd[u2])))
            covered.add(key)
            if key not in he:
                ops.append(("delete_edge", (("g", u1), ("g", u2)), costs.edge_delete))
            elif he[key] != lab:
                ops.append(("relabel_edge", (("g", u1), ("g", u2), he[key]), costs.edge_relabel))
        else:
            ops.append(("delete_edge", (("g", u1), ("g", u2)), costs.edge_delete))
    for u in a.deleted:
        ops.append(("delete_vertex", (("g", u),), costs.vertex_delete))
    for u, v in sorted(fwd.items()):
        if g.vertex_labels[u] != h.vertex_labels[v]:
            ops.append(("relabel_vertex", (("g", u), int(h.vertex_labels[v])), costs.vertex_relabel))
    for v in a.inserted:
        ops.append(("insert_vertex", (("h", v), int(h.vertex_labels[v])), costs.vertex_insert))
    for key, lab in he.items():
        if key not in covered:
            ops.append(("insert_edge", (back[key[0]], back[key[1]], lab), costs.edge_insert))
    return ops


def apply_edit_path(g: Graph, ops: list):
    """Replay ``ops`` on ``g``. Returns ``(labels, edges)`` keyed by vertex names."""
    labels = {("g", u): int(l) for u, l in enumerate(g.vertex_labels.tolist())}
    edges = {frozenset((("g", u), ("g", v))): l for (u, v), l in g.edge_dict.items()}
    for op, args, _ in ops:
        if op == "delete_edge":
            key = frozenset(args)
            if key not in edges:
                raise ValueError(f"cannot delete missing edge {args}")
            del edges[key]
        elif op == "relabel_edge":
            key = frozenset(args[:2])
            if key not in edges:
                raise ValueError(f"cannot relabel missing edge {args}")
            edges[key] = args[2]
        elif op == "delete_vertex":
            (x,) = args
            if any(x in e for e in edges):
                raise ValueError(f"vertex {x} is not isolated")
            del labels[x]
        elif op == "relabel_vertex":
            labels[args[0]] = args[1]
        elif op == "insert_vertex":
            if args[0] in labels:
                raise ValueError(f"vertex {args[0]} exists")
            labels[args[0]] = args[1]
        elif op == "insert_edge":
            key = frozenset(args[:2])
            if key in edges or not all(x in labels for x in args[:2]):
                raise ValueError(f"cannot insert edge {args}")
            edges[key] = args[2]
        else:
            raise ValueError(f"unknown operation {op}")
    return labels, edges


def exact_ged(g: Graph, h: Graph, costs: EditCostModel = EditCostModel(), max_vertices: int = 14) -> float:
    """Exact edit distance by branch and bound over injective partial vertex maps.

    Only meant as an oracle for small graphs; refuses inputs with more than
    ``max_vertices`` vertices in total.
    """
    n, m = g.vertex_count, h.vertex_count
    if n + m > max_vertices:
        raise SizeGuardError(f"exact_ged limited to {max_vertices} vertices in total, got {n + m}")
    order = sorted(range(n), key=lambda u: (-int(g.degrees[u]), u))
    gl, hl = g.vertex_labels.tolist(), h.vertex_labels.tolist()
    gadj = {}
    for (u, v), l in g.edge_dict.items():
        gadj[(u, v)] = gadj[(v, u)] = l
    hadj = {}
    for (u, v), l in h.edge_dict.items():
        hadj[(u, v)] = hadj[(v, u)] = l
    # g edges charged once both endpoints are placed; count remaining per prefix length
    pos = {u: i for i, u in enumerate(order)}
    g_edges_done_at = [0] * (n + 1)
    for u, v in g.edge_dict:
        g_edges_done_at[max(pos[u], pos[v]) + 1] += 1
    g_done = list(itertools.accumulate(g_edges_done_at))
    total_g_edges = g.edge_count
    total_h_edges = h.edge_count

    ident = Assignment(tuple((i, i) for i in range(min(n, m))), tuple(range(m, n)), tuple(range(n, m)))
    best = [edit_cost_from_assignment(g, h, ident, costs)]

    image = [-1] * n  # by position in ``order``
    used = [False] * m

    def finish(cost, h_edges_covered):
        inserted = [v for v in range(m) if not used[v]]
        cost += costs.vertex_insert * len(inserted)
        cost += costs.edge_insert * (total_h_edges - h_edges_covered)
        return cost

    def lower_bound(i, h_used_count, h_edges_covered):
        rg = n - i
        rh = m - h_used_count
        lb = max(0, rg - rh) * costs.vertex_delete + max(0, rh - rg) * costs.vertex_insert
        eg = total_g_edges - g_done[i]
        eh = total_h_edges - h_edges_covered
        lb += max(0, eg - eh) * costs.edge_delete + max(0, eh - eg) * costs.edge_insert
        return lb

    def step(i, cost, h_used_count, h_edges_covered):
        if cost + lower_bound(i, h_used_count, h_edges_covered) >= best[0]:
            return
        if i == n:
            total = finish(cost, h_edges_covered)
            if total < best[0]:
                best[0] = total
            return
        u = order[i]
        options = []
        for t in list(range(m)) + [-1]:
            if t >= 0 and used[t]:
                continue
            delta = 0.0
            covered = 0
            if t < 0:
                delta += costs.vertex_delete
                for j in range(i):
                    if (u, order[j]) in gadj:
                        delta += costs.edge_delete
            else:
                if gl[u] != hl[t]:
                    delta += costs.vertex_relabel
                for j in range(i):
                    w = order[j]
                    ge_ = gadj.get((u, w))
                    tw = image[j]
                    he_ = hadj.get((t, tw)) if tw >= 0 else None
                    if he_ is not None:
                        covered += 1
                    if ge_ is not None and he_ is None:
                        delta += costs.edge_delete
                    elif ge_ is None and he_ is not None:
                        delta += costs.edge_insert
                    elif ge_ is not None and ge_ != he_:
                        delta += costs.edge_relabel
            options.append((delta, t, covered))
        options.sort(key=lambda o: (o[0], o[1] < 0, o[1]))
        for delta, t, covered in options:
            image[i] = t
            if t >= 0:
                used[t] = True
            step(i + 1, cost + delta, h_used_count + (t >= 0), h_edges_covered + covered)
            if t >= 0:
                used[t] = False
        image[i] = -1

    step(0, 0.0, 0, 0)
    return float(best[0])


def gwlt_assignment(union: Union, hierarchy: ColorHierarchy, i: int, j: int) -> Assignment:
    """Tree-metric assignment between member graphs ``i`` and ``j`` in local vertex ids."""
    a = tree_metric_assignment(hierarchy, union.vertices_of(i), union.vertices_of(j))
    return a.relabel(union.local, union.local)


def gwlt_distance(g: Graph, h: Graph, hierarchy: ColorHierarchy, g_vertices, h_vertices,
                  costs: EditCostModel = EditCostModel()) -> float:
    """Edit distance upper bound for ``g`` and ``h`` whose vertices sit at the given hierarchy ids.

    ``g_vertices[u]`` is the hierarchy vertex id of local vertex ``u`` of ``g``.
    """
    g_vertices = np.asarray(g_vertices)
    h_vertices = np.asarray(h_vertices)
    a = tree_metric_assignment(hierarchy, g_vertices, h_vertices)
    g_local = {int(x): u for u, x in enumerate(g_vertices.tolist())}
    h_local = {int(x): v for v, x in enumerate(h_vertices.tolist())}
    return edit_cost_from_assignment(g, h, a.relabel(g_local, h_local), costs)


@dataclass
class DistanceJob:
    dataset: Dataset
    h: int = 3
    k: int = 2
    update: str = "kmeans"
    seed: int = 0
    costs: EditCostModel = field(default_factory=EditCostModel)

    def hierarchy(self):
        union = disjoint_union(self.dataset)
        hier, _ = refine_to_depth(union.graph, None, make_update(self.update, k=self.k, seed=self.seed), self.h)
        return union, hier


def gwlt_distance_matrix(dataset: Dataset, h: int = 3, k: int = 2, update: str = "kmeans", seed: int = 0,
                         costs: EditCostModel = EditCostModel(), threads: int = 1, row_sink=None) -> np.ndarray:
    """All-pairs edit distance upper bounds over a dataset-wide hierarchy.

    ``row_sink(i, row)`` (optional) receives finished rows in index order, so
    large matrices can be streamed to disk.
    """
    union, hier = DistanceJob(dataset, h, k, update, seed, costs).hierarchy()
    n = len(dataset)

    def row(i):
        out = np.zeros(n)
        for j in range(n):
            if j != i:
                a = gwlt_assignment(union, hier, i, j)
                out[j] = edit_cost_from_assignment(dataset[i], dataset[j], a, costs)
        return out

    rows = []
    if threads <= 1:
        for i in range(n):
            r = row(i)
            rows.append(r)
            if row_sink:
                row_sink(i, r)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for i, r in enumerate(pool.map(row, range(n))):
                rows.append(r)
                if row_sink:
                    row_sink(i, r)
    return np.vstack(rows) if rows else np.zeros((0, 0))


def knn_predict(class_labels, distances, k: int = 1, test_indices=None, train_indices=None) -> np.ndarray:
    """Majority vote among the ``k`` nearest training graphs of each test graph.

    Without explicit indices this is leave-one-out over all graphs. Distance
    ties go to the smaller graph index, vote ties to the smaller class label.
    """
    labels = np.asarray(class_labels)
    d = np.asarray(distances, dtype=np.float64)
    n = len(labels)
    if d.shape != (n, n):
        raise ValueError(f"distance matrix shape {d.shape} does not match {n} labels")
    train = np.arange(n) if train_indices is None else np.asarray(train_indices)
    test = np.arange(n) if test_indices is None else np.asarray(test_indices)
    if k < 1:
        raise ValueError("k must be positive")
    if k >= n:
        raise ValueError(f"k={k} must be smaller than the dataset size {n}")
    preds = np.empty(len(test), dtype=labels.dtype)
    for out_i, i in enumerate(test):
        pool = train[train != i]
        if len(pool) < k:
            raise ValueError("not enough training graphs for k")
        order = np.lexsort((pool, d[i, pool]))
        votes = labels[pool[order[:k]]]
        classes, counts = np.unique(votes, return_counts=True)
        preds[out_i] = classes[int(np.argmax(counts))]
    return preds


def knn_classify(class_labels, distances, k: int = 1, test_indices=None, train_indices=None) -> float:
    labels = np.asarray(class_labels)
    test = np.arange(len(labels)) if test_indices is None else np.asarray(test_indices)
    preds = knn_predict(labels, distances, k, test, train_indices)
    return float(np.mean(preds == labels[test])) if len(test) else 0.0


def nested_knn_accuracy(class_labels, candidates, k: int = 1) -> float:
    """Leave-one-out accuracy with the distance matrix chosen per held-out graph.

    For each held-out graph the candidate with the best leave-one-out accuracy
    on the remaining graphs is selected (first candidate wins ties), then used
    to classify the held-out graph.
    """
    labels = np.asarray(class_labels)
    n = len(labels)
    correct = 0
    for i in range(n):
        rest = np.delete(np.arange(n), i)
        scores = [knn_classify(labels, d, k, test_indices=rest, train_indices=rest) for d in candidates]
        chosen = candidates[int(np.argmax(scores))]
        pred = knn_predict(labels, chosen, k, test_indices=[i], train_indices=rest)[0]
        correct += int(pred == labels[i])
    return correct / n


def knn_report(class_labels, distances, k: int = 1, source: str = "") -> str:
    labels = np.asarray(class_labels)
    preds = knn_predict(labels, distances, k)
    lines = [f"distance source: {source}", f"k: {k}"]
    for c in np.unique(labels):
        mask = labels == c
        lines.append(f"class {c}: accuracy {np.mean(preds[mask] == c):.4f} ({int(mask.sum())} graphs)")
    lines.append(f"overall accuracy: {np.mean(preds == labels):.4f}")
    return "\n".join(lines) + "\n"

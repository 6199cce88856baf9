"""Subtree and optimal-assignment kernels on top of any color refinement."""
from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .graph import Dataset, Union, disjoint_union
from .hierarchy import ColorHierarchy
from .refinement import make_update, refine_to_depth


@dataclass(frozen=True, eq=False)
class GramMatrix:
    values: np.ndarray
    graph_ids: tuple

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def shape(self):
        return self.values.shape


def feature_ids(hierarchy: ColorHierarchy, colorings) -> list:
    """Per-iteration feature ids.

    Iterations up to the hierarchy depth use the color ids themselves. Once the
    coloring is stable the colorings repeat, and iteration ``i`` past the top
    depth uses ``color + (i - top_depth) * n_nodes`` so that each iteration
    still contributes its own features.
    """
    top = hierarchy.top_depth
    out = []
    for i, col in enumerate(colorings):
        shift = max(0, i - top) * hierarchy.n_nodes
        out.append(np.asarray(col, dtype=np.int64) + shift)
    return out


def subtree_features(hierarchy: ColorHierarchy, colorings, union: Union) -> dict:
    """``{graph_index: {feature_id: count}}`` over iterations ``0..h``."""
    feats = {i: Counter() for i in range(union.graph_count)}
    for ids in feature_ids(hierarchy, colorings):
        pairs, counts = np.unique(np.column_stack([union.owner, ids]), axis=0, return_counts=True)
        for (g, f), c in zip(pairs.tolist(), counts.tolist()):
            feats[g][f] += c
    return {g: dict(sorted(c.items())) for g, c in feats.items()}


def subtree_kernel(f1: dict, f2: dict) -> float:
    if len(f2) < len(f1):
        f1, f2 = f2, f1
    return float(sum(c * f2.get(k, 0) for k, c in f1.items()))


def feature_matrix(hierarchy: ColorHierarchy, colorings, union: Union) -> sp.csr_matrix:
    """Sparse ``graphs x features`` count matrix realizing the subtree kernel."""
    rows = np.concatenate([union.owner] * len(colorings))
    cols = np.concatenate(feature_ids(hierarchy, colorings))
    _, cols = np.unique(cols, return_inverse=True)
    data = np.ones(len(rows), dtype=np.float64)
    m = sp.coo_matrix((data, (rows, cols.reshape(-1))), shape=(union.graph_count, int(cols.max()) + 1 if len(cols) else 0))
    return m.tocsr()


def assignment_feature_matrix(hierarchy: ColorHierarchy, colorings, union: Union) -> sp.csr_matrix:
    """Binary unary encoding whose inner products are summed histogram intersections.

    A color holding ``n`` vertices of a graph switches on the features
    ``(color, 1) .. (color, n)``, so ``<x, y> = sum min(n_x, n_y)``.
    """
    rows, keys = [], []
    for ids in feature_ids(hierarchy, colorings):
        pairs, counts = np.unique(np.column_stack([union.owner, ids]), axis=0, return_counts=True)
        rep_rows = np.repeat(pairs[:, 0], counts)
        rep_cols = np.repeat(pairs[:, 1], counts)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        level = np.arange(len(rep_rows)) - starts
        rows.append(rep_rows)
        keys.append(np.column_stack([rep_cols, level]))
    rows = np.concatenate(rows)
    keys = np.concatenate(keys)
    if len(rows) == 0:
        return sp.csr_matrix((union.graph_count, 0))
    _, cols = np.unique(keys, axis=0, return_inverse=True)
    cols = cols.reshape(-1)
    m = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(union.graph_count, int(cols.max()) + 1))
    return m.tocsr()


def oa_kernel(hierarchy: ColorHierarchy, colorings, union: Union, g1: int, g2: int) -> float:
    """Optimal assignment kernel between member graphs ``g1`` and ``g2``.

    Sum over iterations of the histogram intersection of the colorings; the
    artificial root is not counted.
    """
    total = 0
    m1 = union.owner == g1
    m2 = union.owner == g2
    for col in colorings:
        h1 = Counter(np.asarray(col)[m1].tolist())
        h2 = Counter(np.asarray(col)[m2].tolist())
        total += sum(min(c, h2.get(k, 0)) for k, c in h1.items())
    return float(total)


def normalize_gram(k: np.ndarray) -> np.ndarray:
    d = np.diag(k).astype(np.float64)
    # sqrt of the product (not the product of sqrts) keeps the diagonal exactly 1
    denom = np.sqrt(np.outer(d, d))
    out = np.zeros_like(k, dtype=np.float64)
    np.divide(k, denom, out=out, where=denom > 0)
    return out


def refine_dataset(dataset: Dataset, update: str = "wl", h: int = 3, k: int = 2, seed: int = 0):
    """Refine the disjoint union of ``dataset``. Returns ``(union, hierarchy, colorings)``."""
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    union = disjoint_union(dataset)
    hier, colorings = refine_to_depth(union.graph, None, make_update(update, k=k, seed=seed), h)
    return union, hier, colorings


def gram(dataset: Dataset, kernel: str = "subtree", update: str = "wl", h: int = 3, normalize: bool = False,
         k: int = 2, seed: int = 0) -> GramMatrix:
    union, hier, colorings = refine_dataset(dataset, update, h, k, seed)
    return gram_from_refinement(union, hier, colorings, kernel, normalize)


def gram_from_refinement(union, hierarchy, colorings, kernel="subtree", normalize=False) -> GramMatrix:
    if kernel == "subtree":
        x = feature_matrix(hierarchy, colorings, union)
    elif kernel == "oa":
        x = assignment_feature_matrix(hierarchy, colorings, union)
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    values = (x @ x.T).toarray().astype(np.float64)
    if normalize:
        values = normalize_gram(values)
    return GramMatrix(values, tuple(range(union.graph_count)))


def _write_header(fh, header):
    for line in header or ():
        fh.write(f"# {line}\n")


def write_matrix_csv(path, values: np.ndarray, graph_ids, header=None):
    """Square matrix as CSV with a header row of graph ids; ``#`` lines carry provenance."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write_header(fh, header)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([str(g) for g in graph_ids])
        for row in np.asarray(values):
            w.writerow([repr(float(x)) for x in row])


def read_matrix_csv(path):
    """Inverse of :func:`write_matrix_csv`; returns ``(values, graph_ids)``."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#") and ln.strip()]
    rows = list(csv.reader(lines))
    ids = [int(x) for x in rows[0]]
    values = np.array([[float(x) for x in r] for r in rows[1:]], dtype=np.float64).reshape(len(ids), -1)
    return values, ids


def write_labels(path, class_labels, header=None):
    with open(path, "w", encoding="utf-8") as fh:
        _write_header(fh, header)
        fh.writelines(f"{c}\n" for c in class_labels)


def read_labels(path):
    with open(path, encoding="utf-8") as fh:
        return [int(ln) for ln in fh if ln.strip() and not ln.startswith("#")]


def write_features(path, features: dict, class_labels, header=None):
    """Sparse SVM-style text: ``<class> <id>:<count> ...`` with ids ascending."""
    with open(path, "w", encoding="utf-8") as fh:
        _write_header(fh, header)
        for g in sorted(features):
            items = " ".join(f"{f}:{c}" for f, c in sorted(features[g].items()))
            fh.write(f"{class_labels[g]} {items}\n".rstrip() + "\n")


def write_gram(path: Path, gram_matrix: GramMatrix, class_labels, header=None) -> tuple:
    """Gram CSV plus a ``.labels`` sidecar next to it."""
    path = Path(path)
    write_matrix_csv(path, gram_matrix.values, gram_matrix.graph_ids, header)
    sidecar = path.with_suffix(".labels")
    write_labels(sidecar, class_labels, header)
    return path, sidecar

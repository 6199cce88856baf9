"""Reader and writer for the TUDataset plain-text benchmark format.

A dataset ``NAME`` lives in a directory holding

* ``NAME_A.txt``               -- ``u, v`` per line, 1-based global vertex ids,
                                  every undirected edge listed in both directions
* ``NAME_graph_indicator.txt`` -- 1-based graph id per vertex
* ``NAME_graph_labels.txt``    -- class label per graph
* ``NAME_node_labels.txt``     -- optional, label per vertex
* ``NAME_edge_labels.txt``     -- optional, label per line of ``NAME_A.txt``
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .graph import Dataset, Graph


class DatasetError(ValueError):
    """Base class for dataset loading problems."""


class ParseError(DatasetError):
    def __init__(self, path, lineno, message):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{self.path}:{lineno}: {message}")


class StructureError(DatasetError):
    pass


def _read_ints(path: Path, width: int) -> np.ndarray:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            parts = [p.strip() for p in text.split(",")]
            if len(parts) != width:
                raise ParseError(path, lineno, f"expected {width} comma-separated value(s), got {len(parts)}")
            try:
                rows.append([int(p) for p in parts])
            except ValueError:
                # some TU files store integral labels as floats ("1.0")
                try:
                    vals = [float(p) for p in parts]
                except ValueError:
                    raise ParseError(path, lineno, f"not an integer: {text!r}") from None
                if any(v != int(v) for v in vals):
                    raise ParseError(path, lineno, f"not an integer: {text!r}")
                rows.append([int(v) for v in vals])
    return np.asarray(rows, dtype=np.int64).reshape(-1, width)


def _densify(values: np.ndarray):
    alphabet, dense = np.unique(values, return_inverse=True)
    return tuple(int(a) for a in alphabet), dense.astype(np.int64)


def load_tudataset(directory, name: str) -> Dataset:
    directory = Path(directory)
    prefix = directory / name
    arcs_path = Path(f"{prefix}_A.txt")
    indicator_path = Path(f"{prefix}_graph_indicator.txt")
    glabel_path = Path(f"{prefix}_graph_labels.txt")
    nlabel_path = Path(f"{prefix}_node_labels.txt")
    elabel_path = Path(f"{prefix}_edge_labels.txt")
    for p in (arcs_path, indicator_path, glabel_path):
        if not p.exists():
            raise DatasetError(f"missing file {p}")

    arcs = _read_ints(arcs_path, 2) - 1
    indicator = _read_ints(indicator_path, 1)[:, 0]
    class_labels = _read_ints(glabel_path, 1)[:, 0]
    n_total = indicator.shape[0]
    n_graphs = class_labels.shape[0]

    if n_total and (indicator.min() < 1 or indicator.max() > n_graphs):
        raise StructureError(f"{indicator_path}: graph id outside 1..{n_graphs}")
    if np.any(np.diff(indicator) < 0):
        raise StructureError(f"{indicator_path}: vertices of a graph must be contiguous")
    graph_of = indicator - 1

    if arcs.size and (arcs.min() < 0 or arcs.max() >= n_total):
        bad = int(np.argmax((arcs.min(axis=1) < 0) | (arcs.max(axis=1) >= n_total)))
        raise StructureError(f"{arcs_path}:{bad + 1}: vertex id outside 1..{n_total}")

    if nlabel_path.exists():
        raw = _read_ints(nlabel_path, 1)[:, 0]
        if raw.shape[0] != n_total:
            raise StructureError(f"{nlabel_path}: {raw.shape[0]} labels for {n_total} vertices")
        vertex_alphabet, vlabels = _densify(raw)
    else:
        vertex_alphabet, vlabels = None, np.zeros(n_total, dtype=np.int64)

    arc_labels = None
    edge_alphabet = None
    if elabel_path.exists():
        raw = _read_ints(elabel_path, 1)[:, 0]
        if raw.shape[0] != arcs.shape[0]:
            raise StructureError(f"{elabel_path}: {raw.shape[0]} labels for {arcs.shape[0]} edge lines")
        edge_alphabet, arc_labels = _densify(raw)

    # directed lines -> undirected edges, checking symmetry
    seen = {}
    for i, (u, v) in enumerate(arcs.tolist()):
        line = i + 1
        if graph_of[u] != graph_of[v]:
            raise StructureError(f"{arcs_path}:{line}: edge ({u + 1}, {v + 1}) joins different graphs")
        if u == v:
            raise StructureError(f"{arcs_path}:{line}: self-loop at vertex {u + 1}")
        if (u, v) in seen:
            raise StructureError(f"{arcs_path}:{line}: duplicate edge line ({u + 1}, {v + 1})")
        seen[(u, v)] = i
    for (u, v), i in seen.items():
        j = seen.get((v, u))
        if j is None:
            raise StructureError(f"{arcs_path}:{i + 1}: edge ({u + 1}, {v + 1}) has no reverse line")
        if arc_labels is not None and arc_labels[i] != arc_labels[j]:
            raise StructureError(f"{elabel_path}:{i + 1}: edge ({u + 1}, {v + 1}) labeled differently in each direction")

    und = np.array([[u, v] for (u, v) in seen if u < v], dtype=np.int64).reshape(-1, 2)
    und_labels = None
    if arc_labels is not None:
        und_labels = np.array([arc_labels[seen[(u, v)]] for u, v in und.tolist()], dtype=np.int64)

    offsets = np.searchsorted(graph_of, np.arange(n_graphs + 1))
    edge_owner = graph_of[und[:, 0]] if und.size else np.zeros(0, dtype=np.int64)
    order = np.argsort(edge_owner, kind="stable")
    und = und[order]
    edge_owner = edge_owner[order]
    if und_labels is not None:
        und_labels = und_labels[order]
    ebounds = np.searchsorted(edge_owner, np.arange(n_graphs + 1))

    graphs = []
    for gi in range(n_graphs):
        lo, hi = offsets[gi], offsets[gi + 1]
        e = und[ebounds[gi]:ebounds[gi + 1]] - lo
        el = und_labels[ebounds[gi]:ebounds[gi + 1]] if und_labels is not None else None
        graphs.append(Graph(int(hi - lo), e, vlabels[lo:hi], el))

    return Dataset(
        graphs=graphs,
        class_labels=class_labels.tolist(),
        name=name,
        vertex_label_values=vertex_alphabet,
        edge_label_values=edge_alphabet,
    )


def write_tudataset(dataset: Dataset, directory, name: str | None = None) -> Path:
    """Write ``dataset`` in TUDataset format; returns the directory path."""
    name = name or dataset.name
    directory = Path(directory)
    os.makedirs(directory, exist_ok=True)
    prefix = directory / name

    arc_lines, elabel_lines, indicator, nlabels = [], [], [], []
    offset = 0
    for gi, g in enumerate(dataset.graphs):
        src, dst, lab = g.directed_arcs
        for u, v, l in zip(src.tolist(), dst.tolist(), lab.tolist()):
            arc_lines.append(f"{u + offset + 1}, {v + offset + 1}\n")
            if dataset.has_edge_labels:
                value = dataset.edge_label_values[l] if dataset.edge_label_values else l
                elabel_lines.append(f"{value}\n")
        indicator.extend([f"{gi + 1}\n"] * g.vertex_count)
        for l in g.vertex_labels.tolist():
            value = dataset.vertex_label_values[l] if dataset.vertex_label_values else l
            nlabels.append(f"{value}\n")
        offset += g.vertex_count

    Path(f"{prefix}_A.txt").write_text("".join(arc_lines), encoding="utf-8")
    Path(f"{prefix}_graph_indicator.txt").write_text("".join(indicator), encoding="utf-8")
    Path(f"{prefix}_graph_labels.txt").write_text(
        "".join(f"{c}\n" for c in dataset.class_labels), encoding="utf-8"
    )
    labeled = dataset.vertex_label_values is not None or any(g.vertex_labels.any() for g in dataset.graphs)
    if labeled:
        Path(f"{prefix}_node_labels.txt").write_text("".join(nlabels), encoding="utf-8")
    if dataset.has_edge_labels:
        Path(f"{prefix}_edge_labels.txt").write_text("".join(elabel_lines), encoding="utf-8")
    return directory

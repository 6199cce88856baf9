"""Color hierarchies: the rooted tree of colors produced across refinement iterations."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

ROOT = 0


@dataclass(frozen=True)
class SplitRecord:
    """How the members of one parent color were divided among its children.

    Signature keys are encoded integers (``edge_label * stride + color``).
    ``centroids[j]`` is the centroid of child ``children[j]`` in the space
    spanned by ``dims``; ``known`` maps every training signature to its child.
    """

    stride: int
    dims: np.ndarray
    children: np.ndarray
    centroids: np.ndarray
    known: dict


@dataclass(frozen=True, eq=False)
class ColorHierarchy:
    """Rooted tree over all colors of a refinement run.

    Color ``0`` is the artificial root standing for the uniform coloring.
    ``levels[i]`` is the vertex coloring at depth ``i``; the colors at depth
    ``i`` partition the vertex set and every color at depth ``i + 1`` has its
    parent at depth ``i``. Instances are never mutated; updates return new ones.
    """

    parent: np.ndarray
    depth: np.ndarray
    levels: tuple
    label_colors: dict
    splits: dict = field(default_factory=dict)

    @classmethod
    def from_labels(cls, labels) -> "ColorHierarchy":
        labels = np.asarray(labels, dtype=np.int64)
        alphabet, inverse = np.unique(labels, return_inverse=True)
        parent = np.zeros(1 + len(alphabet), dtype=np.int64)
        parent[0] = -1
        depth = np.zeros(1 + len(alphabet), dtype=np.int64)
        depth[0] = -1
        level0 = (inverse + 1).astype(np.int64)
        label_colors = {int(a): i + 1 for i, a in enumerate(alphabet)}
        return cls._frozen(parent, depth, (level0,), label_colors, {})

    @classmethod
    def _frozen(cls, parent, depth, levels, label_colors, splits):
        for arr in (parent, depth, *levels):
            arr.setflags(write=False)
        return cls(parent, depth, tuple(levels), label_colors, splits)

    @property
    def n_nodes(self) -> int:
        return int(self.parent.shape[0])

    @property
    def n_vertices(self) -> int:
        return int(self.levels[0].shape[0])

    @property
    def top_depth(self) -> int:
        return len(self.levels) - 1

    @property
    def leaf_coloring(self) -> np.ndarray:
        return self.levels[-1]

    def colors_at(self, depth: int) -> np.ndarray:
        return np.flatnonzero(self.depth == depth)

    def children(self, color: int) -> np.ndarray:
        return np.flatnonzero(self.parent == color)

    def members(self, color: int) -> np.ndarray:
        if color == ROOT:
            return np.arange(self.n_vertices)
        return np.flatnonzero(self.levels[self.depth[color]] == color)

    def member_counts(self) -> np.ndarray:
        counts = np.zeros(self.n_nodes, dtype=np.int64)
        counts[ROOT] = self.n_vertices
        for lvl in self.levels:
            counts += np.bincount(lvl, minlength=self.n_nodes)
        return counts

    def leaf_count(self) -> int:
        return int(len(np.unique(self.levels[-1])))

    def extend(self, new_parents: np.ndarray, new_level: np.ndarray, splits: dict) -> "ColorHierarchy":
        """Append one level whose colors are ``n_nodes, n_nodes+1, ...``."""
        d = self.top_depth + 1
        parent = np.concatenate([self.parent, new_parents])
        depth = np.concatenate([self.depth, np.full(len(new_parents), d, dtype=np.int64)])
        merged = dict(self.splits)
        merged.update(splits)
        return ColorHierarchy._frozen(parent, depth, self.levels + (new_level,), self.label_colors, merged)

    def is_subtree_of(self, other: "ColorHierarchy") -> bool:
        n = self.n_nodes
        if other.n_nodes < n or len(other.levels) < len(self.levels):
            return False
        if not (np.array_equal(other.parent[:n], self.parent) and np.array_equal(other.depth[:n], self.depth)):
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.levels, other.levels))

    def tree_distance(self, u: int, v: int) -> int:
        """Path length in the hierarchy between the leaf colors of vertices ``u`` and ``v``."""
        shared = -1
        for i, lvl in enumerate(self.levels):
            if lvl[u] != lvl[v]:
                break
            shared = i
        return 2 * (self.top_depth - shared)

    def to_dict(self, include_members: bool = False) -> dict:
        counts = self.member_counts()
        nodes = []
        for c in range(self.n_nodes):
            node = {
                "id": c,
                "parent": int(self.parent[c]),
                "depth": int(self.depth[c]),
                "size": int(counts[c]),
            }
            if include_members:
                node["members"] = self.members(c).tolist()
            nodes.append(node)
        return {"root": ROOT, "depth": self.top_depth, "vertices": self.n_vertices, "nodes": nodes}

    def to_json(self, include_members: bool = False) -> str:
        return json.dumps(self.to_dict(include_members), indent=None, separators=(",", ":"))


def check_hierarchy(hier: ColorHierarchy) -> Optional[str]:
    """Return a description of the first violated structural invariant, or ``None``."""
    if hier.parent[ROOT] != -1 or hier.depth[ROOT] != -1:
        return "root malformed"
    for c in range(1, hier.n_nodes):
        p = hier.parent[c]
        if not 0 <= p < c:
            return f"color {c}: parent {p} not an earlier color"
        if hier.depth[p] != hier.depth[c] - 1:
            return f"color {c}: depth {hier.depth[c]} but parent depth {hier.depth[p]}"
    for i, lvl in enumerate(hier.levels):
        if np.any(hier.depth[lvl] != i):
            return f"level {i} uses colors of another depth"
        present = set(np.unique(lvl).tolist())
        expected = set(hier.colors_at(i).tolist())
        if present != expected:
            return f"level {i}: colors without members"
        if i > 0 and np.any(hier.parent[lvl] != hier.levels[i - 1]):
            return f"level {i}: a member is not in its parent's member set"
    return None

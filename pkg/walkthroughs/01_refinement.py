"""
Color refinement, one step at a time
====================================

Classical WL gives every distinct neighbor signature its own color. The
gradual variant clusters the signatures of each color into at most k groups,
so colors split more slowly but end up at the same stable partition.
"""
# %%
import numpy as np

from gradual_wl import Graph, ColorHierarchy, make_update, partition_of, refine_to_depth, refine_to_fixpoint, wl_refine

# a path on 7 vertices: ends, their neighbors, and a symmetric middle
g = Graph.from_edge_list(7, [(i, i + 1) for i in range(6)])
hier, cols = refine_to_depth(g, None, wl_refine, h=4)
for i, c in enumerate(cols):
    print(i, c.tolist())

# %%
# the hierarchy: each color points at the color it was split from
print(hier.to_json())

# %%
# gradual refinement with k = 2 on a graph where one color has many signatures
rng = np.random.default_rng(0)
n = 30
iu, ju = np.triu_indices(n, 1)
keep = rng.random(len(iu)) < 0.15
g = Graph.from_edge_list(n, np.column_stack([iu[keep], ju[keep]]))

h_wl, it_wl = refine_to_fixpoint(g, None, wl_refine)
h_k2, it_k2 = refine_to_fixpoint(g, None, make_update("kmeans", k=2))
print("WL iterations:", it_wl, "colors per level:", [len(np.unique(c)) for c in h_wl.levels])
print("k=2 iterations:", it_k2, "colors per level:", [len(np.unique(c)) for c in h_k2.levels])
print("same stable partition:", partition_of(h_wl.leaf_coloring) == partition_of(h_k2.leaf_coloring))

# %%
# one sequential step splits by a single color from the work stack
seq = make_update("sequential")
h0 = ColorHierarchy.from_labels(g.vertex_labels)
h1 = seq(g, h0)
print("colors after one sequential step:", len(np.unique(h1.leaf_coloring)), "stack:", seq.stack)

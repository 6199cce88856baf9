"""Acceptance gate: one check per criterion, each reporting a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the summary) or
directly with ``python tests/test_acceptance.py``.
"""
import os
import sys
import tempfile
import time
from pathlib import Path

import networkx as nx
import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

sys.path.insert(0, str(Path(__file__).parent))

from gradual_wl import (
    ColorHierarchy,
    Dataset,
    disjoint_union,
    edit_path,
    exact_ged,
    generate_dataset,
    gram,
    is_stable,
    knn_classify,
    load_tudataset,
    make_update,
    nested_knn_accuracy,
    oa_kernel,
    partition_of,
    preset,
    refine_to_fixpoint,
    subtree_features,
    subtree_kernel,
    tree_metric_assignment,
    wl_refine,
)
from gradual_wl.cli import main as cli_main
from gradual_wl.ged import apply_edit_path, assignment_tree_cost, edit_cost_from_assignment, gwlt_assignment, gwlt_distance_matrix
from gradual_wl.kernels import refine_dataset
from gradual_wl.refinement import neighbor_signatures, refines

from conftest import random_graph

RESULTS = []
MSRC_ENV = "GWL_MSRC9_DIR"


def report(number, title, ok, detail):
    status = {True: "PASS", False: "FAIL", None: "SKIP"}[ok]
    line = f"criterion {number:>2} {status}  {title}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def er_corpus(count=200, seed=2024):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(5, 31))
        p = float(rng.choice([0.2, 0.5]))
        out.append(random_graph(rng, n, p, n_labels=int(rng.integers(1, 4))))
    return out


def run_trace(graph, update):
    hier = ColorHierarchy.from_labels(graph.vertex_labels)
    steps = [hier]
    for _ in range(graph.vertex_count + 1):
        nxt = update(graph, hier)
        if nxt is hier:
            return steps
        steps.append(nxt)
        hier = nxt
    raise RuntimeError("no fixpoint")


_TRACES = {}


def traces():
    """Every (graph, k, seed) refinement trace of the stable-coloring corpus, computed once."""
    if not _TRACES:
        t0 = time.perf_counter()
        corpus = er_corpus()
        for gi, g in enumerate(corpus):
            ref = refine_to_fixpoint(g, None, wl_refine)[0]
            _TRACES[("wl", gi)] = (g, [ref])
            for k in (2, 3):
                for seed in range(3):
                    _TRACES[(k, seed, gi)] = (g, run_trace(g, make_update("kmeans", k=k, seed=seed)))
        _TRACES["elapsed"] = time.perf_counter() - t0
    return _TRACES


def kmeans_traces():
    return [(key, *v) for key, v in traces().items() if isinstance(key, tuple) and key[0] != "wl"]


def criterion_1():
    tr = traces()
    failures = 0
    for (k, seed, gi), g, steps in kmeans_traces():
        ref = tr[("wl", gi)][1][0]
        if partition_of(steps[-1].leaf_coloring) != partition_of(ref.leaf_coloring):
            failures += 1
    runs = len(kmeans_traces())
    ok = failures == 0 and tr["elapsed"] < 30
    return report(1, "gradual fixpoint equals classical WL", ok,
                  f"{runs} runs, {failures} mismatches, {tr['elapsed']:.1f}s (limit 30s)")


def _c4_violations(g, old, new):
    a, b = old.leaf_coloring, new.leaf_coloring
    ptr, keys, cnts = neighbor_signatures(g, a, int(a.max()) + 1)
    seen = {}
    bad = 0
    for v in range(g.vertex_count):
        sig = (int(a[v]), tuple(keys[ptr[v]:ptr[v + 1]].tolist()), tuple(cnts[ptr[v]:ptr[v + 1]].tolist()))
        if seen.setdefault(sig, int(b[v])) != int(b[v]):
            bad += 1
    return bad


def criterion_2():
    counts = {"C1": 0, "C2": 0, "C3": 0, "C4": 0, "leaf bound": 0}
    steps_checked = 0
    for (k, seed, gi), g, steps in kmeans_traces():
        n_labels = len(np.unique(g.vertex_labels))
        for old, new in zip(steps, steps[1:]):
            steps_checked += 1
            counts["C1"] += not old.is_subtree_of(new)
            counts["C2"] += is_stable(g, old.leaf_coloring)
            a, b = old.leaf_coloring, new.leaf_coloring
            counts["C3"] += not (refines(b, a) and len(np.unique(b)) > len(np.unique(a)))
            counts["C4"] += _c4_violations(g, old, new)
            counts["leaf bound"] += new.leaf_count() > n_labels * k ** new.top_depth
        counts["C2"] += not is_stable(g, steps[-1].leaf_coloring)
    total = sum(counts.values())
    detail = ", ".join(f"{k} {v}" for k, v in counts.items())
    return report(2, "update conditions on every trace", total == 0, f"{steps_checked} steps; violations: {detail}")


def criterion_3():
    over = 0
    worst = 0.0
    for (k, seed, gi), g, steps in kmeans_traces():
        iters = len(steps) - 1
        over += iters > g.vertex_count - 1
        worst = max(worst, iters / max(g.vertex_count - 1, 1))
    tr = traces()
    seq_bad = 0
    for gi, g in enumerate(er_corpus()):
        seq, _ = refine_to_fixpoint(g, None, make_update("sequential"), max_iter=10 * g.vertex_count)
        seq_bad += partition_of(seq.leaf_coloring) != partition_of(tr[("wl", gi)][1][0].leaf_coloring)
    ok = over == 0 and seq_bad == 0
    return report(3, "iteration bound and sequential fixpoint", ok,
                  f"{over} traces over |V|-1 (max ratio {worst:.2f}), {seq_bad} sequential mismatches")


def _naive_subtree(cols, owner):
    total = 0
    for c in cols:
        total += int(np.sum(c[owner == 0][:, None] == c[owner == 1][None, :]))
    return total


def _hungarian_oa(cols, owner):
    a = np.stack([c[owner == 0] for c in cols], axis=1)
    b = np.stack([c[owner == 1] for c in cols], axis=1)
    w = np.sum(a[:, None, :] == b[None, :, :], axis=2)
    r, c = linear_sum_assignment(w, maximize=True)
    return int(w[r, c].sum())


def criterion_4():
    rng = np.random.default_rng(44)
    st_bad = oa_bad = 0
    for i in range(100):
        g1 = random_graph(rng, int(rng.integers(1, 11)), float(rng.uniform(0.1, 0.6)), int(rng.integers(1, 4)))
        g2 = random_graph(rng, int(rng.integers(1, 11)), float(rng.uniform(0.1, 0.6)), int(rng.integers(1, 4)))
        h = int(rng.integers(0, 6))
        u, hier, cols = refine_dataset(Dataset([g1, g2], [0, 1]), "kmeans", h, 2, i)
        f = subtree_features(hier, cols, u)
        st_bad += subtree_kernel(f[0], f[1]) != _naive_subtree(cols, u.owner)
        oa_bad += oa_kernel(hier, cols, u, 0, 1) != _hungarian_oa(cols, u.owner)
    gs = [random_graph(rng, int(rng.integers(3, 20)), 0.25, 3) for _ in range(50)]
    ds = Dataset(gs, [0] * 50)
    eig_ok = True
    eig_detail = []
    for kernel in ("subtree", "oa"):
        k = gram(ds, kernel, "kmeans", h=4).values
        lo = float(np.linalg.eigvalsh(k).min())
        eig_ok &= lo >= -1e-8 * float(np.trace(k))
        eig_detail.append(f"{kernel} min eig {lo:.3g}")
    ok = st_bad == 0 and oa_bad == 0 and eig_ok
    return report(4, "kernel correctness", ok,
                  f"subtree mismatches {st_bad}/100, OA mismatches {oa_bad}/100, " + ", ".join(eig_detail))


def _to_nx(labels, edges):
    g = nx.Graph()
    for v, l in labels.items():
        g.add_node(v, label=l)
    for e, l in edges.items():
        a, b = tuple(e)
        g.add_edge(a, b, label=l)
    return g


def _replays(g, h, ops):
    labels, edges = apply_edit_path(g, ops)
    target = _to_nx({v: int(l) for v, l in enumerate(h.vertex_labels.tolist())},
                    {frozenset(e): l for e, l in h.edge_dict.items()})
    same = lambda a, b: a["label"] == b["label"]
    return nx.is_isomorphic(_to_nx(labels, edges), target, node_match=same, edge_match=same)


def _hungarian_tree(hier, vg, vh):
    n, m = len(vg), len(vh)
    c = np.full((n + m, n + m), 1e9)
    c[n:, m:] = 0
    for i, u in enumerate(vg):
        for j, v in enumerate(vh):
            c[i, j] = hier.tree_distance(u, v)
    to_root = hier.top_depth + 1
    c[np.arange(n), m + np.arange(n)] = to_root
    c[n + np.arange(m), np.arange(m)] = to_root
    r, col = linear_sum_assignment(c)
    return float(c[r, col].sum())


def criterion_5():
    rng = np.random.default_rng(55)
    t0 = time.perf_counter()
    below = invalid = tree_bad = 0
    gaps = []
    for i in range(200):
        g = random_graph(rng, int(rng.integers(1, 7)), float(rng.uniform(0.2, 0.7)), int(rng.integers(1, 3)))
        h = random_graph(rng, int(rng.integers(1, 7)), float(rng.uniform(0.2, 0.7)), int(rng.integers(1, 3)))
        u = disjoint_union([g, h])
        hier = refine_to_fixpoint(u.graph, None, make_update("kmeans", k=2, seed=i))[0]
        a = gwlt_assignment(u, hier, 0, 1)
        upper = edit_cost_from_assignment(g, h, a)
        exact = exact_ged(g, h)
        below += upper < exact
        gaps.append(upper - exact)
        invalid += not _replays(g, h, edit_path(g, h, a))
        vg, vh = u.vertices_of(0).tolist(), u.vertices_of(1).tolist()
        ta = tree_metric_assignment(hier, vg, vh)
        tree_bad += abs(assignment_tree_cost(hier, ta) - _hungarian_tree(hier, vg, vh)) > 1e-9
    elapsed = time.perf_counter() - t0
    ok = below == 0 and invalid == 0 and tree_bad == 0 and elapsed < 120
    return report(5, "edit distance upper bound and path validity", ok,
                  f"200 pairs, {below} below exact, {invalid} invalid paths, {tree_bad} tree-cost mismatches, "
                  f"mean gap {np.mean(gaps):.2f}, {elapsed:.1f}s (limit 120s)")


H_RANGE = range(1, 6)


def knn_accuracy(ds, update):
    """1-nn leave-one-out with distance 1 - normalized subtree kernel, h picked by inner leave-one-out."""
    candidates = [1.0 - gram(ds, "subtree", update, h, True, k=2, seed=0).values for h in H_RANGE]
    per_h = [knn_classify(ds.class_labels, d, 1) for d in candidates]
    return nested_knn_accuracy(ds.class_labels, candidates, 1), per_h


def criterion_6():
    t0 = time.perf_counter()
    ds = generate_dataset(preset("S_1.0_0", rng_seed=0, graphs_per_class=50))
    acc, per_h = knn_accuracy(ds, "kmeans")
    elapsed = time.perf_counter() - t0
    ok = acc >= 0.95 and elapsed < 120
    return report(6, "synthetic separation S_1.0_0", ok,
                  f"GWL 1-nn accuracy {acc:.4f} (need >= 0.95); per h {[round(a, 3) for a in per_h]}; {elapsed:.1f}s")


def criterion_7():
    ds = generate_dataset(preset("S_1.0_20", rng_seed=0, graphs_per_class=50))
    gwl, gwl_h = knn_accuracy(ds, "kmeans")
    wlst, wlst_h = knn_accuracy(ds, "wl")
    ok = gwl - wlst >= 0.10
    return report(7, "noise robustness S_1.0_20", ok,
                  f"GWL {gwl:.4f} vs WLST {wlst:.4f}, margin {gwl - wlst:+.4f} (need >= +0.10); "
                  f"WLST per h {[round(a, 3) for a in wlst_h]}")


def criterion_8():
    directory = os.environ.get(MSRC_ENV)
    if not directory or not Path(directory).is_dir():
        return report(8, "edit distance 1-nn on MSRC_9", None, f"dataset not available (set {MSRC_ENV})")
    ds = load_tudataset(directory, "MSRC_9")
    d = gwlt_distance_matrix(ds, h=3, k=2, update="kmeans", seed=0, threads=os.cpu_count() or 1)
    acc = knn_classify(ds.class_labels, d, 1)
    ok = abs(acc * 100 - 85.97) <= 5
    return report(8, "edit distance 1-nn on MSRC_9", ok, f"accuracy {acc * 100:.2f} (target 85.97 +- 5)")


def criterion_9():
    return report(9, "benchmark SVM accuracies", None,
                  "not reproducible at desk scale by design; criteria 1-7 stand in")


def _files(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(Path(d).rglob("*")) if p.is_file()}


def criterion_10():
    """Same config and paths, threads 1, 8, 1: every artifact must be byte-identical."""
    import contextlib
    import io
    import shutil

    outputs = []
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp) / "run"
        data = root / "data"
        steps = [
            ["gen", "--preset", "S_0.8_5", "--seed", "3", "--graphs-per-class", "8", "--out", str(data)],
            ["refine", "--dataset", str(data), "--name", "S_0.8_5", "--h", "3", "--out", str(root / "h.json")],
            ["gram", "--dataset", str(data), "--name", "S_0.8_5", "--kernel", "oa", "--normalize", "--out", str(root / "k.csv")],
            ["features", "--dataset", str(data), "--name", "S_0.8_5", "--out", str(root / "f.txt")],
            ["ged", "--dataset", str(data), "--name", "S_0.8_5", "--out", str(root / "d.csv")],
            ["knn", "--distances", str(root / "d.csv"), "--labels", str(root / "d.labels"), "--out", str(root / "r.txt")],
        ]
        for threads in ("1", "8", "1"):
            shutil.rmtree(root, ignore_errors=True)
            with contextlib.redirect_stdout(io.StringIO()):
                codes = [cli_main(s + ["--threads", threads]) for s in steps]
            if any(codes):
                return report(10, "determinism", False, f"pipeline exit codes {codes}")
            outputs.append(_files(root))
    differing = sorted(k for k in outputs[0] if outputs[0][k] != outputs[1].get(k) or outputs[0][k] != outputs[2].get(k))
    ok = not differing and outputs[0].keys() == outputs[1].keys() == outputs[2].keys()
    return report(10, "determinism", ok, f"{len(outputs[0])} artifacts compared across threads 1/8/1, {len(differing)} differ")


@pytest.mark.parametrize("number", range(1, 11))
def test_criterion(number):
    ok = globals()[f"criterion_{number}"]()
    if ok is None:
        pytest.skip(RESULTS[-1])
    assert ok, RESULTS[-1]


if __name__ == "__main__":
    results = [globals()[f"criterion_{i}"]() for i in range(1, 11)]
    sys.exit(0 if all(r is not False for r in results) else 1)

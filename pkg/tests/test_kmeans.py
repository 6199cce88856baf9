import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gradual_wl.kmeans import farthest_point_seeds, weighted_kmeans


def distinct_sorted(points):
    pts = np.unique(points, axis=0)
    return pts[np.lexsort(pts.T[::-1])]


def test_few_points_each_own_cluster():
    pts = np.array([[0.0, 1.0], [2.0, 0.0]])
    labels, centers = weighted_kmeans(pts, [1, 1], 4, np.random.default_rng(0))
    assert labels.tolist() == [0, 1]
    assert np.array_equal(centers, pts)


def test_two_obvious_groups():
    pts = np.array([[0.0], [1.0], [10.0], [11.0]])
    labels, centers = weighted_kmeans(pts, [1, 1, 1, 1], 2, np.random.default_rng(0))
    assert labels.tolist() == [0, 0, 1, 1]
    assert np.allclose(centers.ravel(), [0.5, 10.5])


def test_weights_pull_centroid():
    pts = np.array([[0.0], [1.0], [10.0]])
    labels, centers = weighted_kmeans(pts, [1, 3, 1], 2, np.random.default_rng(0))
    assert labels.tolist() == [0, 0, 1]
    assert np.isclose(centers[0, 0], 0.75)


def test_seeding_starts_at_first_row_and_takes_farthest():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [5.0, 5.0], [0.0, 2.0]])
    seeds = farthest_point_seeds(pts, 3, np.random.default_rng(0))
    assert seeds.tolist()[:2] == [0, 2]


def test_seeding_tie_break_is_seeded():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    picks = {tuple(farthest_point_seeds(pts, 2, np.random.default_rng(s)).tolist()) for s in range(20)}
    assert all(p[0] == 0 for p in picks)
    assert len(picks) > 1
    again = farthest_point_seeds(pts, 2, np.random.default_rng(3))
    assert np.array_equal(again, farthest_point_seeds(pts, 2, np.random.default_rng(3)))


@settings(max_examples=150, deadline=None)
@given(
    arrays(np.int64, st.tuples(st.integers(2, 15), st.integers(1, 4)), elements=st.integers(0, 6)),
    st.integers(2, 5),
    st.integers(0, 3),
)
def test_kmeans_properties(raw, k, seed):
    pts = distinct_sorted(raw).astype(float)
    if len(pts) < 2:
        return
    w = np.arange(1, len(pts) + 1, dtype=float)
    labels, centers = weighted_kmeans(pts, w, k, np.random.default_rng(seed))
    used = np.unique(labels)
    # canonical, non-empty, at least two and at most k clusters
    assert 2 <= len(used) <= k
    assert used.tolist() == list(range(len(used)))
    _, first = np.unique(labels, return_index=True)
    assert np.all(np.diff(first) > 0)
    assert centers.shape == (len(used), pts.shape[1])
    l2, c2 = weighted_kmeans(pts, w, k, np.random.default_rng(seed))
    assert np.array_equal(labels, l2) and np.array_equal(centers, c2)

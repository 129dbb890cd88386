import numpy as np
import pytest

from lvtensor.clustering import (cluster_mode, elbow_curve, kmeans, matched_agreement,
                                 mode_principal_components)
from lvtensor.errors import ArgumentError
from lvtensor.estimators import RankRule, hosvd
from lvtensor.generators import planted_block_signal


def blobs(k, per, p, spread, seed):
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((k, p)) * 10
    x = np.vstack([c + spread * rng.standard_normal((per, p)) for c in centers])
    return x, np.repeat(np.arange(k), per)


def test_kmeans_recovers_separated_blobs():
    x, truth = blobs(3, 20, 4, 0.3, 0)
    out = kmeans(x, 3, seed=1)
    assert matched_agreement(out.labels, truth) == 1.0
    assert out.wcss == pytest.approx(((x - out.centroids[out.labels]) ** 2).sum())


def test_two_point_clouds():
    rng = np.random.default_rng(10)
    x = np.vstack([10 + 0.1 * rng.standard_normal((25, 3)), -10 + 0.1 * rng.standard_normal((25, 3))])
    out = kmeans(x, 2)
    assert matched_agreement(out.labels, np.repeat([0, 1], 25)) == 1.0
    assert out.wcss < ((x - x.mean(0)) ** 2).sum() / 100


def test_kmeans_k_equals_rows_and_one():
    x, _ = blobs(2, 5, 3, 1.0, 1)
    assert kmeans(x, 10).wcss == pytest.approx(0.0, abs=1e-12)
    one = kmeans(x, 1)
    np.testing.assert_allclose(one.centroids[0], x.mean(0))
    assert one.wcss == pytest.approx(((x - x.mean(0)) ** 2).sum())


def test_kmeans_argument_errors():
    with pytest.raises(ArgumentError):
        kmeans(np.zeros((4, 2)), 5)
    with pytest.raises(ArgumentError):
        kmeans(np.zeros(4), 1)


def test_wcss_history_non_increasing():
    x = np.random.default_rng(2).standard_normal((200, 3))
    hist = kmeans(x, 6, restarts=1, seed=3).metadata["wcss_history"]
    assert all(b <= a + 1e-9 for a, b in zip(hist, hist[1:]))


def test_labels_are_canonical():
    x, _ = blobs(3, 10, 2, 0.2, 4)
    labels = kmeans(x, 3, seed=0).labels
    sizes = np.bincount(labels)
    firsts = [np.flatnonzero(labels == j)[0] for j in range(3)]
    assert list(sizes) == sorted(sizes, reverse=True)
    assert firsts == sorted(firsts)


def test_row_permutation_equivariance():
    x, truth = blobs(3, 15, 3, 0.3, 5)
    perm = np.random.default_rng(6).permutation(len(x))
    a = kmeans(x, 3, seed=0)
    b = kmeans(x[perm], 3, seed=0)
    assert matched_agreement(a.labels[perm], b.labels) == 1.0
    assert a.wcss == pytest.approx(b.wcss, rel=1e-10)


def test_deterministic_given_seed():
    x = np.random.default_rng(7).standard_normal((50, 2))
    np.testing.assert_array_equal(kmeans(x, 4, seed=9).labels, kmeans(x, 4, seed=9).labels)


def test_elbow_finds_planted_k():
    hits = 0
    for seed in range(10):
        x, _ = blobs(3, 20, 5, 0.5, seed)
        curve = elbow_curve(x, range(1, 7), restarts=5, seed=seed)
        w = [v for _, v in curve]
        assert all(b <= a for a, b in zip(w, w[1:]))
        relative_drop = -np.diff(w) / np.array(w[:-1])
        hits += int(np.argmax(relative_drop)) + 2 == 3
    assert hits >= 8


def test_matched_agreement():
    assert matched_agreement([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0
    assert matched_agreement([0, 0, 0, 1], [0, 0, 1, 1]) == 0.75


def test_principal_components_match_matrix_pca():
    a = np.random.default_rng(8).standard_normal((12, 9))
    _, fact = hosvd(a, (3, 3))
    scores = mode_principal_components(fact, 0)
    u, s, vt = np.linalg.svd(a)
    expected = u[:, :3] * s[:3]
    # same scores up to a per-column sign and a rotation within the kept right space
    np.testing.assert_allclose(scores @ scores.T, expected @ expected.T, atol=1e-10)


def test_principal_components_preserve_row_distances():
    theta, _ = planted_block_signal((12, 6, 5), 3, seed=0)
    _, fact = hosvd(theta, (3, 1, 1))
    scores = mode_principal_components(fact, 0)
    rows = theta.reshape(12, -1)
    for i in range(12):
        for j in range(12):
            assert np.linalg.norm(scores[i] - scores[j]) == pytest.approx(
                np.linalg.norm(rows[i] - rows[j]), abs=1e-10)
    with pytest.raises(ArgumentError):
        mode_principal_components(fact, 3)


def test_cluster_mode_planted_blocks():
    theta, truth = planted_block_signal((30, 20, 20), 3, seed=1)
    y = theta + 0.1 * np.random.default_rng(1).standard_normal(theta.shape)
    out = cluster_mode(y, RankRule.explicit([3]), mode=0, k=3, seed=1)
    assert matched_agreement(out.labels, truth) == 1.0
    assert out.metadata["ranks"] == (3, 3, 3) and out.metadata["refined_with_hooi"]


def test_cluster_mode_single_cluster():
    rng = np.random.default_rng(2)
    theta = np.einsum("i,j,k->ijk", *(rng.standard_normal(d) for d in (8, 6, 5)))
    out = cluster_mode(theta, RankRule.explicit([1]), mode=0, k=1)
    assert not out.labels.any()


def test_wcss_invariant_under_relabeling():
    x, _ = blobs(3, 10, 2, 0.5, 11)
    out = kmeans(x, 3)
    perm = np.array([2, 0, 1])
    relabeled = perm[out.labels]
    cents = np.empty_like(out.centroids)
    cents[perm] = out.centroids
    assert ((x - cents[relabeled]) ** 2).sum() == pytest.approx(out.wcss, rel=1e-12)

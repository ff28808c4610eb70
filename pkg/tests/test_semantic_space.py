import math

import numpy as np
import pytest
import torch
from hypothesis import given, settings, strategies as st
from scipy import sparse
from sklearn.cluster import KMeans

from reldisco.encoder.representation import encode_tensors
from reldisco.errors import ClusteringError, ConfigError
from reldisco.semantic_space.clustering import (
    KMEANS_TOL,
    Centroids,
    estimate_relation_count,
    fit_centroids,
    hard_label,
    soft_assign,
)
from reldisco.semantic_space.losses import multi_view_contrastive, self_contrastive_loss
from reldisco.semantic_space.words import top_relational_words

from conftest import finite_difference_check, naive_contrastive, synthetic_tri_view_prompts


@pytest.mark.parametrize('exclude_self', [False, True])
def test_contrastive_matches_loops(exclude_self):
    rng = np.random.default_rng(0)
    for _ in range(100):
        n, vocab = int(rng.integers(2, 6)), int(rng.integers(3, 9))
        dists = rng.dirichlet(np.ones(vocab), size=(n, 3))
        tau = float(rng.uniform(0.05, 1.0))
        got = self_contrastive_loss(torch.tensor(dists), tau, exclude_self=exclude_self).item()
        assert got == pytest.approx(naive_contrastive(dists, tau, exclude_self), abs=1e-9)


@pytest.mark.parametrize('n', [1, 4, 10])
def test_contrastive_uniform_closed_form(n):
    dists = torch.full((n, 3, 7), 1 / 7, dtype=torch.float64)
    assert self_contrastive_loss(dists, 0.1).item() == pytest.approx(-math.log(2 / (3 * n)), abs=1e-12)


def test_contrastive_sharp_limit():
    # 인스턴스마다 다른 one-hot, 세 뷰 동일
    n = 5
    dists = torch.eye(8, dtype=torch.float64)[:n, None, :].repeat(1, 3, 1)
    assert self_contrastive_loss(dists, 0.001, exclude_self=True).item() < 1e-6
    assert self_contrastive_loss(dists, 0.001).item() == pytest.approx(math.log(3 / 2), abs=1e-6)


def test_contrastive_decreases_with_positive_similarity():
    # 인스턴스 0 의 뷰 1 만 뷰 0 쪽으로 옮긴다. 나머지 유사도는 모두 0 으로 고정
    def loss_at(t):
        dists = torch.zeros(2, 3, 4, dtype=torch.float64)
        dists[0, 0, 0] = 1.0
        dists[0, 1, 0], dists[0, 1, 1] = t, 1 - t
        dists[0, 2, 2] = 1.0
        dists[1, :, 3] = 1.0
        return self_contrastive_loss(dists, 0.1, exclude_self=True).item()

    losses = [loss_at(t) for t in np.linspace(0, 1, 6)]
    assert all(b < a for a, b in zip(losses, losses[1:]))


def test_contrastive_arguments():
    dists = torch.full((2, 3, 4), 0.25)
    with pytest.raises(ConfigError):
        self_contrastive_loss(dists, 0.0)
    with pytest.raises(ValueError):
        multi_view_contrastive(dists[:, :1], 0.1)


def test_contrastive_gradient(synthetic, mock_backend64):
    prompts = synthetic_tri_view_prompts(synthetic)
    n = len(prompts) // 3

    def loss_fn():
        _, dist = encode_tensors(prompts, mock_backend64, mode='train')
        return self_contrastive_loss(dist.reshape(n, 3, -1), 0.5)

    assert finite_difference_check(loss_fn, list(mock_backend64.parameters())) < 1e-4


def test_kmeans_recovers_exact_points():
    points = np.array([[0.0, 0, 1], [0, 1, 0], [1, 0, 0], [0.5, 0.5, 0]])
    dists = np.repeat(points, 5, axis=0)
    centroids = fit_centroids(dists, 4, seed=0)
    assert np.allclose(np.array(sorted(map(tuple, centroids.centers))), np.array(sorted(map(tuple, points))))
    assert centroids.inertia == pytest.approx(0.0, abs=1e-12)


def test_kmeans_single_cluster_is_mean():
    rng = np.random.default_rng(2)
    dists = rng.dirichlet(np.ones(5), size=30)
    centroids = fit_centroids(dists, 1)
    assert np.allclose(centroids.centers[0], dists.mean(axis=0))


def test_kmeans_blobs():
    rng = np.random.default_rng(3)
    centers = np.array([[0.0, 0.0], [5.0, 5.0]])
    dists = np.concatenate([c + 0.1 * rng.normal(size=(200, 2)) for c in centers])
    found = fit_centroids(dists, 2, seed=0).centers
    found = found[np.argsort(found[:, 0])]
    assert np.all(np.abs(found - centers) < 0.05)


def test_kmeans_arguments():
    with pytest.raises(ClusteringError):
        fit_centroids(np.eye(3), 4)
    with pytest.raises(ConfigError):
        fit_centroids(np.eye(3), 0)


def test_kmeans_inertia_does_not_increase():
    rng = np.random.default_rng(4)
    dists = rng.dirichlet(np.ones(6), size=120)
    init = dists[:5]
    inertias = [
        KMeans(n_clusters=5, init=init, n_init=1, max_iter=m, tol=KMEANS_TOL).fit(dists).inertia_
        for m in range(1, 6)
    ]
    assert all(b <= a + 1e-12 for a, b in zip(inertias, inertias[1:]))


def test_soft_assign_example():
    centers = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert np.allclose(soft_assign(np.array([0.0, 0.0]), centers), [2 / 3, 1 / 3])
    assert np.allclose(soft_assign(np.array([0.5, 0.0]), centers), [0.5, 0.5])


def test_soft_assign_matches_formula():
    rng = np.random.default_rng(5)
    for _ in range(100):
        vocab, c = int(rng.integers(2, 8)), int(rng.integers(1, 6))
        v = rng.dirichlet(np.ones(vocab), size=4)
        centers = rng.dirichlet(np.ones(vocab), size=c)
        kernel = np.array([[1 / (1 + np.sum((row - mu) ** 2)) for mu in centers] for row in v])
        expected = kernel / kernel.sum(axis=1, keepdims=True)
        assert np.allclose(soft_assign(v, Centroids(centers)), expected, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 6), st.integers(2, 10))
def test_soft_assign_rows_sum_to_one(seed, c, vocab):
    rng = np.random.default_rng(seed)
    p = soft_assign(rng.dirichlet(np.ones(vocab), size=7), rng.dirichlet(np.ones(vocab), size=c))
    assert p.shape == (7, c)
    assert np.all(p > 0)
    assert np.allclose(p.sum(axis=1), 1.0)


def test_soft_assign_width_mismatch():
    with pytest.raises(ValueError):
        soft_assign(np.ones((2, 3)) / 3, np.ones((2, 4)) / 4)


def test_hard_label():
    assert hard_label(np.array([0.2, 0.5, 0.3])) == 1
    assert hard_label(np.array([0.4, 0.2, 0.4])) == 0
    assert list(hard_label(np.array([[0.1, 0.9], [0.5, 0.5]]))) == [1, 0]


def core_and_satellites(seed, n_groups=8, core=95, satellite=5, dim=16):
    """관계마다 큰 핵 95개 + 작은 위성 5개. K_init=16 이면 핵 8개와 위성 8개로 나뉘고,
    위성은 N / K_init 보다 작아 버려진다. 둥근 덩어리 8개만 두면 K_init 쪽 여분 군집이
    한 관계를 크기가 비슷한 둘로 쪼개 추정치가 6-8 사이로 흔들린다.
    """
    rng = np.random.default_rng(seed)
    eye = np.eye(dim)
    rows = []
    for j in range(n_groups):
        center = 3.0 * eye[j]
        rows.append(center + 0.05 * rng.normal(size=(core, dim)))
        rows.append(center + 1.0 * eye[n_groups + j] + 0.05 * rng.normal(size=(satellite, dim)))
    return np.concatenate(rows)


@pytest.mark.parametrize('seed', range(5))
def test_estimate_drops_small_clusters(seed):
    estimate = estimate_relation_count(core_and_satellites(seed), 16, seed=seed)
    assert abs(estimate - 8) <= 1


def test_estimate_exact_clusters():
    dists = np.repeat(np.eye(4), 25, axis=0)
    assert estimate_relation_count(dists, 4) == 4


def test_estimate_arguments():
    with pytest.raises(ClusteringError):
        estimate_relation_count(np.eye(3), 5)
    with pytest.raises(ConfigError):
        estimate_relation_count(np.eye(3), 0)


def test_top_relational_words():
    vocab = ['a', 'b', 'c', 'd', 'e']
    assert top_relational_words(np.eye(5)[3], vocab, k=1) == ['d']
    dist = np.array([0.1, 0.4, 0.1, 0.3, 0.1])
    assert top_relational_words(dist, vocab, k=3) == ['b', 'd', 'a']
    assert top_relational_words(sparse.csr_matrix(dist), vocab, k=2) == ['b', 'd']
    with pytest.raises(ConfigError):
        top_relational_words(dist, vocab, k=6)
    with pytest.raises(ConfigError):
        top_relational_words(dist, vocab, k=0)

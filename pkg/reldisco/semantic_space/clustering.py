import logging
from dataclasses import dataclass

import numpy as np
from sklearn.cluster import KMeans
from sklearn.metrics.pairwise import euclidean_distances

from reldisco.errors import ClusteringError, ConfigError

logger = logging.getLogger(__name__)

KMEANS_TOL = 1e-6
KMEANS_MAX_ITER = 300


@dataclass
class Centroids:
    """뷰 하나의 클러스터 중심 mu^m (C x |v|)."""
    centers: np.ndarray
    view: int = 1
    inertia: float = float('nan')

    def __post_init__(self):
        self.centers = np.asarray(self.centers, dtype=np.float64)
        if self.centers.ndim != 2 or len(self.centers) < 1:
            raise ClusteringError(f'centroids must be a non-empty C x d matrix, got shape {self.centers.shape}')
        if not np.all(np.isfinite(self.centers)):
            raise ClusteringError('centroids contain non-finite values')

    @property
    def n_clusters(self):
        return len(self.centers)


def _kmeans(n_clusters, seed, n_init, max_iter=KMEANS_MAX_ITER):
    return KMeans(
        n_clusters=n_clusters,
        init='k-means++',
        n_init=n_init,
        max_iter=max_iter,
        tol=KMEANS_TOL,
        random_state=seed,
    )


def fit_centroids(dists, n_clusters, seed=0, n_init=10, view=1):
    """K-means (k-means++ 초기화, n_init 회 중 inertia 최소)."""
    n = dists.shape[0]
    if n_clusters < 1:
        raise ConfigError(f'cluster count must be >= 1, got {n_clusters}')
    if n < n_clusters:
        raise ClusteringError(f'{n} instances cannot form {n_clusters} clusters')
    km = _kmeans(n_clusters, seed, n_init).fit(dists)
    logger.debug('view %d: k-means C=%d inertia %.6f after %d iterations', view, n_clusters, km.inertia_, km.n_iter_)
    return Centroids(centers=km.cluster_centers_, view=view, inertia=float(km.inertia_))


def soft_assign(v, centroids):
    """Student t (자유도 1) 소프트 할당. v: [|v|] 또는 [N, |v|] -> 같은 차원 수의 확률."""
    centers = centroids.centers if isinstance(centroids, Centroids) else np.asarray(centroids)
    single = getattr(v, 'ndim', np.ndim(v)) == 1
    rows = np.asarray(v).reshape(1, -1) if single else v
    if rows.shape[1] != centers.shape[1]:
        raise ValueError(f'distribution width {rows.shape[1]} does not match centroid width {centers.shape[1]}')
    sq = euclidean_distances(rows, centers, squared=True)
    kernel = 1.0 / (1.0 + sq)
    p = kernel / kernel.sum(axis=1, keepdims=True)
    return p[0] if single else p


def hard_label(p):
    # np.argmax 는 동률이면 가장 작은 인덱스
    return np.argmax(np.asarray(p), axis=-1)


def estimate_relation_count(dists, k_init, seed=0, n_init=10):
    """K_init 개로 K-means 후 평균 크기(N / K_init) 미만 클러스터를 버리고 남은 수."""
    if k_init < 1:
        raise ConfigError(f'K_init must be >= 1, got {k_init}')
    n = dists.shape[0]
    if k_init > n:
        raise ClusteringError(f'K_init {k_init} exceeds the {n} unlabeled instances')
    labels = _kmeans(k_init, seed, n_init).fit_predict(dists)
    sizes = np.bincount(labels, minlength=k_init)
    threshold = n / k_init
    estimate = int(np.sum(sizes >= threshold))
    logger.info('relation count estimate %d (K_init %d, size threshold %.1f)', estimate, k_init, threshold)
    return estimate

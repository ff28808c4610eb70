import numpy as np
from scipy import sparse

from reldisco.errors import ConfigError


def _dense_row(dist):
    if sparse.issparse(dist):
        return np.asarray(dist.todense()).ravel()
    return np.asarray(dist).ravel()


def top_relational_words(dist, vocab, k=3):
    """확률 상위 k 개 단어 (내림차순, 동률이면 어휘 인덱스 순)."""
    row = _dense_row(dist)
    if k < 1:
        raise ConfigError(f'k must be >= 1, got {k}')
    if k > len(row):
        raise ConfigError(f'k={k} exceeds vocabulary size {len(row)}')
    order = np.argsort(-row, kind='stable')[:k]
    return [vocab[i] for i in order]

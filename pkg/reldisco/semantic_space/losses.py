import torch

from reldisco.errors import ConfigError


def multi_view_contrastive(features, tau, exclude_self=False):
    """여러 뷰 대조 손실.

    features: [A, M, D] (A 개 앵커 단위, M 개 뷰). 앵커 (a, m) 의 양성은 같은 a 의 나머지 M-1 개 뷰,
    분모는 A*M 개 전체 벡터와의 내적 유사도 (exclude_self=False 이면 자기 자신 포함).
    loss = -(1 / AM) sum_a sum_m log( sum_{u!=m} e^{s/tau} / sum_{b,u} e^{s/tau} )
    """
    if tau <= 0:
        raise ConfigError(f'temperature must be positive, got {tau}')
    n_anchor, n_view, _ = features.shape
    if n_view < 2:
        raise ValueError('contrastive loss needs at least two views')

    flat = features.reshape(n_anchor * n_view, -1)
    sim = flat @ flat.T / tau
    owner = torch.arange(n_anchor, device=features.device).repeat_interleave(n_view)
    same = owner[:, None] == owner[None, :]
    eye = torch.eye(len(owner), dtype=torch.bool, device=features.device)

    neg_inf = torch.finfo(sim.dtype).min
    log_num = torch.logsumexp(sim.masked_fill(~(same & ~eye), neg_inf), dim=1)
    denominator = sim.masked_fill(eye, neg_inf) if exclude_self else sim
    log_den = torch.logsumexp(denominator, dim=1)
    return (log_den - log_num).mean()


def self_contrastive_loss(dists, tau1, exclude_self=False):
    """단어 분포 v^m_i 의 tri-view 자기 대조 손실. dists: [N, M, |V|]."""
    return multi_view_contrastive(dists, tau1, exclude_self=exclude_self)

import torch

from reldisco.semantic_space.losses import multi_view_contrastive


def marginal_entropy(z):
    """뷰별 열 주변분포 Z^m_j = mean_i z^m_ij 의 Shannon 엔트로피 합. z: [N, M, K]."""
    marginals = z.mean(dim=0)
    return -(marginals * torch.log(marginals.clamp_min(1e-12))).sum()


def consistency_loss(z, tau2, entropy_weight=1.0, exclude_self=False):
    """열 단위 tri-view 일관성 대조 손실 - entropy_weight * 주변분포 엔트로피.

    z: [N, M, K] 확률. 앵커는 열 z^m_{:,j}, 양성은 다른 뷰의 같은 열.
    엔트로피를 빼므로 손실을 줄이면 head 사용이 고르게 퍼진다 (붕괴 방지).
    """
    columns = z.permute(2, 1, 0)  # [K, M, N]
    contrastive = multi_view_contrastive(columns, tau2, exclude_self=exclude_self)
    return contrastive - entropy_weight * marginal_entropy(z)

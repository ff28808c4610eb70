import torch
import torch.nn.functional as F

from reldisco.collab.selection import ABANDONED


def supervised_loss(logits, targets):
    """뷰 평균 교차 엔트로피. logits: [N, M, K], targets: [N] (버린 인스턴스는 -1, 제외).

    기여하는 인스턴스가 없으면 0.
    """
    n, n_view, n_heads = logits.shape
    targets = torch.as_tensor(targets, dtype=torch.long, device=logits.device)
    if not torch.any(targets != ABANDONED):
        return logits.sum() * 0.0
    return F.cross_entropy(
        logits.reshape(n * n_view, n_heads),
        targets.repeat_interleave(n_view),
        ignore_index=ABANDONED,
    )


def decision_targets(decisions, index):
    """LabelDecision 목록 -> 인스턴스 순서(index: id -> 위치)의 목표 라벨 배열."""
    targets = torch.full((len(index),), ABANDONED, dtype=torch.long)
    for d in decisions:
        if not d.abandoned:
            targets[index[d.instance_id]] = d.label
    return targets

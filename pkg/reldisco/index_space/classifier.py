import numpy as np
import torch
from torch import nn


class RelationClassifier(nn.Linear):
    """모든 뷰가 공유하는 관계 분류기 f(.): hidden -> K 개 head logits.

    head 0..|R^l|-1 은 사전 정의 관계(이름순)에 묶이고 나머지는 novel 용이다.
    """

    def __init__(self, hidden_size, n_heads, dtype=None):
        super().__init__(hidden_size, n_heads, dtype=dtype)

    @property
    def n_heads(self):
        return self.out_features


def classify(hidden, clf):
    """z = softmax(f(x)). hidden: [..., d] -> [..., K]."""
    if hidden.shape[-1] != clf.in_features:
        raise ValueError(f'hidden width {hidden.shape[-1]} does not match classifier input {clf.in_features}')
    return torch.softmax(clf(hidden), dim=-1)


def anchor_labels(z):
    """뷰 하나의 z 행들 -> 앵커 라벨 I^m (argmax, 동률이면 작은 head)."""
    if isinstance(z, torch.Tensor):
        z = z.detach().cpu().numpy()
    return np.argmax(np.asarray(z), axis=-1)

from dataclasses import dataclass
from typing import Optional

import numpy as np

ABANDONED = -1


@dataclass(frozen=True)
class LabelDecision:
    instance_id: str
    label: Optional[int]  # 버린 경우 None
    source_view: Optional[int]  # 1(main), 2(entity), 3(context)
    max_probability: float
    agreed: bool

    @property
    def abandoned(self):
        return self.label is None


def select_label_arrays(aligned, probabilities, theta):
    """배열 버전 선택 규칙.

    aligned: [N, M] 정렬된 클러스터 라벨, probabilities: [N, M, C] 정렬된 소프트 할당.
    Returns: (labels [N] (버림 = -1), source [N] (뷰 위치 0..M-1, 버림 = -1), max_prob [N], agreed [N])
    """
    aligned = np.asarray(aligned, dtype=np.int64)
    probabilities = np.asarray(probabilities, dtype=np.float64)
    n, n_view = aligned.shape
    agreed = np.all(aligned == aligned[:, :1], axis=1)

    # p-hat^m_{i, P-hat^m_i}
    own = np.take_along_axis(probabilities, aligned[:, :, None], axis=2)[:, :, 0]
    best_view = np.argmax(own, axis=1)
    max_prob = own[np.arange(n), best_view]

    labels = np.where(agreed, aligned[:, 0], aligned[np.arange(n), best_view])
    source = np.where(agreed, 0, best_view)
    keep = agreed | (max_prob >= theta)
    labels = np.where(keep, labels, ABANDONED)
    source = np.where(keep, source, ABANDONED)
    return labels, source, max_prob, agreed


def select_labels(aligned, probabilities, theta, instance_ids=None, views=(1, 2, 3)):
    """(a) 세 뷰 일치 -> 그 라벨, (b) 불일치지만 최대 확률 >= theta -> 그 뷰의 라벨, (c) 그 외 버림."""
    labels, source, max_prob, agreed = select_label_arrays(aligned, probabilities, theta)
    if instance_ids is None:
        instance_ids = [str(i) for i in range(len(labels))]
    decisions = []
    for iid, label, src, prob, ok in zip(instance_ids, labels, source, max_prob, agreed):
        if label == ABANDONED:
            decisions.append(LabelDecision(iid, None, None, float(prob), bool(ok)))
        else:
            decisions.append(LabelDecision(iid, int(label), int(views[src]), float(prob), bool(ok)))
    return decisions


def abandoned_fraction(decisions):
    if not decisions:
        return 0.0
    return sum(d.abandoned for d in decisions) / len(decisions)

import logging
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import adjusted_rand_score, normalized_mutual_info_score
from sklearn.metrics.cluster import contingency_matrix

from reldisco.errors import EvaluationError

logger = logging.getLogger(__name__)

SPLITS = ('Pre', 'Nov', 'All')
UNMATCHED = None


def _check_pair(pred, gold):
    pred, gold = np.asarray(pred), np.asarray(gold)
    if len(pred) != len(gold):
        raise EvaluationError(f'{len(pred)} predictions for {len(gold)} gold labels')
    if len(pred) == 0:
        raise EvaluationError('cannot score an empty labeling')
    return pred, gold


def hungarian_mapping(pred, gold):
    """예측 라벨 -> 정답 라벨 일대일 대응 (일치 수 최대, 분할표 음수에 헝가리안)."""
    pred, gold = _check_pair(pred, gold)
    gold_classes, gold_idx = np.unique(gold, return_inverse=True)
    pred_classes, pred_idx = np.unique(pred, return_inverse=True)
    table = contingency_matrix(gold_idx, pred_idx)
    rows, cols = linear_sum_assignment(-table)
    return {pred_classes[c]: gold_classes[r] for r, c in zip(rows, cols)}


def _mapped(pred, mapping):
    return np.array([mapping.get(p, UNMATCHED) for p in pred], dtype=object)


def clustering_accuracy(pred, gold):
    pred, gold = _check_pair(pred, gold)
    mapped = _mapped(pred, hungarian_mapping(pred, gold))
    return float(np.mean(mapped == gold.astype(object)))


def _codes(labels):
    return np.unique(labels, return_inverse=True)[1]


def nmi(pred, gold):
    # 정답과 예측이 모두 한 덩어리면 sklearn 은 1.0
    pred, gold = _check_pair(pred, gold)
    return float(normalized_mutual_info_score(_codes(gold), _codes(pred), average_method='arithmetic'))


def ari(pred, gold):
    pred, gold = _check_pair(pred, gold)
    return float(adjusted_rand_score(_codes(gold), _codes(pred)))


def _split_mask(gold, split, predefined, novel):
    if split == 'Pre':
        return np.isin(gold, list(predefined))
    if split == 'Nov':
        return np.isin(gold, list(novel))
    if split == 'All':
        return np.ones(len(gold), dtype=bool)
    raise EvaluationError(f'unknown split {split!r}; expected one of {SPLITS}')


def partition_metrics(pred, gold, split, predefined, novel, mapping=None):
    """정답 관계가 split 에 속하는 인스턴스에서 acc / nmi / ari.

    ACC 는 전체에서 구한 헝가리안 대응을 부분집합에 그대로 적용한다.
    """
    pred, gold = _check_pair(pred, gold)
    gold = gold.astype(object)
    mask = _split_mask(gold, split, predefined, novel)
    if not mask.any():
        raise EvaluationError(f'no gold instances in the {split} split')
    if mapping is None:
        mapping = hungarian_mapping(pred, gold)
    mapped = _mapped(pred[mask], mapping)
    return {
        'acc': float(np.mean(mapped == gold[mask])),
        'nmi': nmi(pred[mask], gold[mask]),
        'ari': ari(pred[mask], gold[mask]),
        'n': int(mask.sum()),
    }


@dataclass
class MetricReport:
    acc: dict = field(default_factory=dict)
    nmi: dict = field(default_factory=dict)
    ari: dict = field(default_factory=dict)
    n_instances: dict = field(default_factory=dict)
    cos_by_relation: dict = field(default_factory=dict)
    kl_by_relation: dict = field(default_factory=dict)
    cos: Optional[float] = None
    kl: Optional[float] = None

    def flat(self):
        row = {}
        for split in SPLITS:
            key = split.lower()
            row[f'acc_{key}'] = self.acc.get(split)
            row[f'nmi_{key}'] = self.nmi.get(split)
            row[f'ari_{key}'] = self.ari.get(split)
        if self.cos is not None:
            row['cos'] = self.cos
            row['kl'] = self.kl
        return row

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, record):
        return cls(**record)


def evaluate_predictions(pred, gold, predefined, novel):
    """Pre / Nov / All 세 구간 지표. 정답이 없는 구간은 None."""
    pred, gold = _check_pair(pred, gold)
    gold = gold.astype(object)
    mapping = hungarian_mapping(pred, gold)
    report = MetricReport()
    for split in SPLITS:
        if not _split_mask(gold, split, predefined, novel).any():
            report.acc[split] = report.nmi[split] = report.ari[split] = None
            report.n_instances[split] = 0
            continue
        scores = partition_metrics(pred, gold, split, predefined, novel, mapping=mapping)
        report.acc[split] = scores['acc']
        report.nmi[split] = scores['nmi']
        report.ari[split] = scores['ari']
        report.n_instances[split] = scores['n']
    return report

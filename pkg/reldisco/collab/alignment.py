from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from reldisco.errors import AlignmentError


@dataclass(frozen=True)
class AlignmentResult:
    view: int
    cost: np.ndarray  # Q^m
    assignment: np.ndarray  # U^m, U[c, c'] = 1 이면 클러스터 c' -> 라벨 c
    aligned_labels: np.ndarray  # P-hat^m
    aligned_probabilities: np.ndarray  # p-hat^m


def _labels(values, n_classes, name):
    values = np.asarray(values, dtype=np.int64).ravel()
    if values.size and (values.min() < 0 or values.max() >= n_classes):
        raise AlignmentError(f'{name} index outside [0, {n_classes})')
    return values


def _pair_counts(anchors, clusters, n_clusters, name):
    if len(anchors) != len(clusters):
        raise AlignmentError(f'{len(anchors)} {name} vs {len(clusters)} cluster labels')
    anchors = _labels(anchors, n_clusters, name)
    clusters = _labels(clusters, n_clusters, 'cluster')
    counts = np.zeros((n_clusters, n_clusters), dtype=np.int64)
    np.add.at(counts, (anchors, clusters), 1)
    return counts


def build_cost_matrix(anchors, clusters, n_clusters, bound=None, bound_weight=None):
    """q-hat[c, c'] = 앵커 c 이면서 클러스터 c' 인 인스턴스 수, Q = max(q-hat) - q-hat.

    bound: 라벨 인스턴스의 (묶인 head, 클러스터) 두 배열. bound_weight 배로 센다.
    기본 가중치는 len(anchors) + 1 이라 라벨 인스턴스가 모인 클러스터는 묶인 head 로 간다.
    """
    counts = _pair_counts(anchors, clusters, n_clusters, 'anchor')
    if bound is not None:
        heads, bound_clusters = bound
        weight = len(anchors) + 1 if bound_weight is None else bound_weight
        counts = counts + weight * _pair_counts(heads, bound_clusters, n_clusters, 'bound head')
    return counts.max() - counts


def align(cost):
    """헝가리안 알고리즘으로 총 비용 최소 순열 -> bool 행렬 U."""
    cost = np.asarray(cost)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise AlignmentError(f'cost matrix must be square, got shape {cost.shape}')
    rows, cols = linear_sum_assignment(cost)
    assignment = np.zeros(cost.shape, dtype=bool)
    assignment[rows, cols] = True
    return assignment


def _check_permutation(assignment):
    assignment = np.asarray(assignment, dtype=bool)
    if (assignment.ndim != 2 or assignment.shape[0] != assignment.shape[1]
            or not np.all(assignment.sum(axis=0) == 1) or not np.all(assignment.sum(axis=1) == 1)):
        raise AlignmentError('assignment is not a permutation matrix')
    return assignment


def apply_alignment(clusters, assignment):
    """P^m_i = c' 인 인스턴스를 U[c, c'] = 1 인 c 로 옮긴다."""
    assignment = _check_permutation(assignment)
    clusters = _labels(clusters, len(assignment), 'cluster')
    mapping = np.argmax(assignment, axis=0)
    return mapping[clusters]


def reindex_probabilities(probabilities, assignment):
    # p-hat[i, c] = p[i, c'] (U[c, c'] = 1)
    assignment = _check_permutation(assignment)
    return np.asarray(probabilities) @ assignment.T.astype(np.float64)


def align_view(anchors, clusters, probabilities, view=1, bound=None):
    n_clusters = np.asarray(probabilities).shape[1]
    cost = build_cost_matrix(anchors, clusters, n_clusters, bound=bound)
    assignment = align(cost)
    return AlignmentResult(
        view=view,
        cost=cost,
        assignment=assignment,
        aligned_labels=apply_alignment(clusters, assignment),
        aligned_probabilities=reindex_probabilities(probabilities, assignment),
    )

import csv
import logging
import re

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.stats import entropy

from reldisco.encoder.prompts import PromptedInput
from reldisco.encoder.representation import encode
from reldisco.errors import EvaluationError
from reldisco.models import MASK, ViewKind

logger = logging.getLogger(__name__)

TEMPLATE_VERB = 'means'
KL_EPSILON = 1e-10


def template_prompt(description):
    """"[X] means [MASK]" 템플릿."""
    words = tuple(str(description).split())
    if not words:
        raise EvaluationError('relation description is empty')
    return PromptedInput(
        tokens=words + (TEMPLATE_VERB, MASK),
        mask_position=len(words) + 1,
        view_kind=ViewKind.MAIN,
        instance_id=f'template:{" ".join(words)}',
        body_length=len(words),
    )


def ground_truth_distribution(description, backend):
    """사전학습(미세조정 전) 백엔드로 설명문 템플릿의 [MASK] 단어 분포."""
    return encode([template_prompt(description)], backend, mode='eval')[0].word_dist


def _as_vector(dist):
    if sparse.issparse(dist):
        return np.asarray(dist.todense(), dtype=np.float64).ravel()
    return np.asarray(dist, dtype=np.float64).ravel()


def semantic_similarity(pred_dist, truth_dist, eps=KL_EPSILON):
    """(cos, KL(pred || truth)). KL 은 eps 를 더하고 재정규화."""
    pred, truth = _as_vector(pred_dist), _as_vector(truth_dist)
    if pred.shape != truth.shape:
        raise EvaluationError(f'distribution widths differ: {pred.shape[0]} vs {truth.shape[0]}')
    denom = np.linalg.norm(pred) * np.linalg.norm(truth)
    cos = float(pred @ truth / denom) if denom > 0 else 0.0
    p = (pred + eps) / (pred + eps).sum()
    q = (truth + eps) / (truth + eps).sum()
    return cos, float(entropy(p, q))


def describe_relation(relation):
    # org:founded_by -> 'org founded by'
    return re.sub(r'[:_/\-.]+', ' ', relation).strip()


def load_relation_descriptions(path):
    """relation<TAB>description TSV -> dict."""
    frame = pd.read_csv(path, sep='\t', header=None, names=['relation', 'description'], dtype=str,
                        quoting=csv.QUOTE_NONE, keep_default_na=False)
    return dict(zip(frame['relation'], frame['description']))


def relation_mean_distributions(dists, relations, wanted):
    """관계별 예측 단어 분포 평균. dists: [N, |V|] (dense 또는 CSR)."""
    relations = np.asarray(relations, dtype=object)
    means = {}
    for relation in wanted:
        mask = relations == relation
        if not mask.any():
            continue
        means[relation] = np.asarray(dists[np.flatnonzero(mask)].mean(axis=0)).ravel()
    return means


def novel_semantic_scores(dists, relations, novel, backend, descriptions=None):
    """novel 관계마다 (평균 예측 분포, 정답 분포) 의 cos / KL 과 그 평균."""
    descriptions = descriptions or {}
    cos_by, kl_by = {}, {}
    for relation, mean_dist in relation_mean_distributions(dists, relations, sorted(novel)).items():
        truth = ground_truth_distribution(descriptions.get(relation) or describe_relation(relation), backend)
        cos_by[relation], kl_by[relation] = semantic_similarity(mean_dist, truth)
    if not cos_by:
        logger.warning('no novel relation in the evaluated split; semantic scores skipped')
        return cos_by, kl_by, None, None
    return cos_by, kl_by, float(np.mean(list(cos_by.values()))), float(np.mean(list(kl_by.values())))

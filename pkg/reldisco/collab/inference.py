import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch
from scipy import sparse

from reldisco.collab.checkpoint import load_checkpoint
from reldisco.encoder.backends import backend_from_description
from reldisco.encoder.prompts import build_prompt
from reldisco.encoder.representation import encode_tensors, truncate_top_k
from reldisco.index_space.classifier import RelationClassifier
from reldisco.semantic_space.words import top_relational_words
from reldisco.semifactual.lexicons import EntityTypeLexicon, SynonymLexicon
from reldisco.semifactual.views import generate_tri_view

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Prediction:
    instance_id: str
    label: int
    relation: Optional[str]  # 사전 정의 관계에 묶인 head 면 그 이름
    words: tuple
    confidence: float


def prompt_rows(triviews, views=(1, 2, 3)):
    return [tuple(build_prompt(tv.view(m)) for m in views) for tv in triviews]


def encode_views(rows, backend, classifier, batch_size=128, top_k=None):
    """평가 모드 인코딩. rows: 인스턴스별 뷰 프롬프트 튜플 -> (hidden, word_dist, z) numpy [N, M, ...].

    classifier 가 None 이면 z 도 None. top_k 를 주면 word_dist 는 배치마다 상위 k 로 잘라
    뷰별 행렬 리스트 (k < |V| 면 CSR) 로 돌려준다.
    """
    if not rows:
        raise ValueError('nothing to encode')
    if classifier is not None:
        classifier.eval()
    n_view = len(rows[0])
    hidden_out, dist_out, z_out = [], [], []
    for start in range(0, len(rows), batch_size):
        chunk = rows[start:start + batch_size]
        flat = [p for row in chunk for p in row]
        hidden, dist = encode_tensors(flat, backend, mode='eval')
        hidden_out.append(hidden.reshape(len(chunk), n_view, -1).cpu().numpy())
        dist = dist.reshape(len(chunk), n_view, -1).cpu().numpy()
        if top_k is None:
            dist_out.append(dist)
        else:
            dist_out.append([truncate_top_k(dist[:, pos], top_k) for pos in range(n_view)])
        if classifier is not None:
            with torch.no_grad():
                z = torch.softmax(classifier(hidden), dim=-1)
            z_out.append(z.reshape(len(chunk), n_view, -1).cpu().numpy())

    if top_k is None:
        dists = np.concatenate(dist_out)
    else:
        dists = [_stack([batch[pos] for batch in dist_out]) for pos in range(n_view)]
    z = np.concatenate(z_out) if classifier is not None else None
    return np.concatenate(hidden_out), dists, z


def _stack(blocks):
    if sparse.issparse(blocks[0]):
        return sparse.vstack(blocks, format='csr')
    return np.concatenate(blocks)


def infer_label(z):
    """뷰 평균 z 의 argmax. z: [M, K] 또는 [N, M, K]."""
    z = np.asarray(z)
    return np.argmax(z.mean(axis=-2), axis=-1)


class Predictor:
    """학습된 체크포인트로 새 인스턴스의 라벨과 관계 단어를 낸다."""

    def __init__(self, backend, classifier, head_to_relation, views=(1, 2, 3), entity_lexicon=None,
                 synonym_lexicon=None, pos_tagger=None, seed=0, context_ratio=0.05, top_k_words=3,
                 batch_size=128):
        self.backend = backend
        self.classifier = classifier
        self.head_to_relation = {int(k): v for k, v in head_to_relation.items()}
        self.views = tuple(views)
        self.entity_lexicon = entity_lexicon or EntityTypeLexicon()
        self.synonym_lexicon = synonym_lexicon or SynonymLexicon()
        self.pos_tagger = pos_tagger
        self.seed = seed
        self.context_ratio = context_ratio
        self.top_k_words = top_k_words
        self.batch_size = batch_size

    @classmethod
    def from_checkpoint(cls, checkpoint, device='cpu', **kwargs):
        bundle = checkpoint if isinstance(checkpoint, dict) else load_checkpoint(checkpoint, map_location=device)
        backend = backend_from_description(bundle['backend'], device=device)
        backend.load_state_dict(bundle['backend_state'])
        dtype = next(backend.parameters()).dtype
        classifier = RelationClassifier(backend.hidden_size, bundle['n_heads'], dtype=dtype).to(device)
        classifier.load_state_dict(bundle['classifier_state'])
        kwargs.setdefault('views', tuple(bundle['train_config']['views']))
        kwargs.setdefault('seed', bundle['train_config']['seed'])
        return cls(backend, classifier, bundle['head_to_relation'], **kwargs)

    def tri_views(self, instances):
        return [
            generate_tri_view(inst, self.entity_lexicon, self.synonym_lexicon, self.pos_tagger,
                              seed=self.seed, context_ratio=self.context_ratio)
            for inst in instances
        ]

    def predict_triviews(self, triviews):
        _, dists, z = encode_views(prompt_rows(triviews, self.views), self.backend, self.classifier,
                                   self.batch_size)
        predictions = []
        for tv, dist, zi in zip(triviews, dists, z):
            label = int(infer_label(zi))
            words = top_relational_words(dist[0], self.backend.vocab, self.top_k_words)
            predictions.append(Prediction(
                instance_id=tv.source_id,
                label=label,
                relation=self.head_to_relation.get(label),
                words=tuple(words),
                confidence=float(zi.mean(axis=0)[label]),
            ))
        return predictions

    def predict(self, instances):
        return self.predict_triviews(self.tri_views(instances))


def infer(instance, checkpoint, device='cpu', **kwargs):
    """인스턴스 하나 -> Prediction(라벨, 관계 단어)."""
    return Predictor.from_checkpoint(checkpoint, device=device, **kwargs).predict([instance])[0]

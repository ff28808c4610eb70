from contextlib import nullcontext
from dataclasses import dataclass

import numpy as np
import torch
from scipy import sparse


@dataclass(frozen=True)
class RelationRepresentation:
    hidden: np.ndarray  # x^m_i
    word_dist: np.ndarray  # v^m_i, softmax 정규화
    view: int
    instance_id: str


def encode_tensors(batch, backend, mode='eval'):
    """(hidden [B, d], word_dist [B, |V|]) 텐서. train 모드에서만 그래디언트가 흐른다."""
    if mode not in ('train', 'eval'):
        raise ValueError(f'mode must be train or eval, got {mode!r}')
    backend.train(mode == 'train')
    context = nullcontext() if mode == 'train' else torch.no_grad()
    with context:
        hidden, logits = backend.forward_prompts(batch)
        word_dist = torch.softmax(logits, dim=-1)
    return hidden, word_dist


def encode(batch, backend, mode='eval'):
    hidden, word_dist = encode_tensors(batch, backend, mode)
    hidden = hidden.detach().cpu().numpy()
    word_dist = word_dist.detach().cpu().numpy()
    return [
        RelationRepresentation(hidden=h, word_dist=v, view=p.view_kind.index, instance_id=p.instance_id)
        for h, v, p in zip(hidden, word_dist, batch)
    ]


def truncate_top_k(dists, k=None):
    """행마다 확률 상위 k 개만 남기고 재정규화. k 가 없거나 |V| 이상이면 그대로 (dense).

    잘라낸 경우 메모리 때문에 CSR 희소행렬로 돌려준다. 동률은 어휘 인덱스가 작은 쪽.
    """
    dists = np.asarray(dists)
    n, vocab_size = dists.shape
    if k is None or k >= vocab_size:
        return dists
    top = np.argsort(-dists, axis=1, kind='stable')[:, :k]
    values = np.take_along_axis(dists, top, axis=1)
    values = values / values.sum(axis=1, keepdims=True)
    rows = np.repeat(np.arange(n), k)
    return sparse.csr_matrix((values.ravel(), (rows, top.ravel())), shape=(n, vocab_size))

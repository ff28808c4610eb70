import math

import numpy as np
import pytest
import torch

from reldisco.corpus.synthetic import make_synthetic_corpus, write_synthetic_corpus
from reldisco.encoder.mock import MockBackend
from reldisco.encoder.prompts import build_prompt
from reldisco.models import RelationInstance, Span
from reldisco.semifactual.lexicons import EntityTypeLexicon, SynonymLexicon
from reldisco.semifactual.views import generate_tri_view


@pytest.fixture
def new_orleans():
    tokens = ('New', 'Orleans', 'is', 'located', 'in', 'the', 'United', 'States')
    return RelationInstance(
        instance_id='no-1',
        tokens=tokens,
        head=Span(0, 2, 'New Orleans', 'Q34404'),
        tail=Span(5, 8, 'the United States', 'Q30'),
        relation='located_in',
        pos_tags=('NNP', 'NNP', 'VBZ', 'VBN', 'IN', 'DT', 'NNP', 'NNPS'),
    )


@pytest.fixture
def entity_lexicon():
    return EntityTypeLexicon(
        by_kb_id={'Q34404': 'City', 'Q30': 'Country', 'Q956': 'City'},
        by_surface={'Beijing': 'City'},
    )


@pytest.fixture
def synonym_lexicon():
    return SynonymLexicon({
        ('located', 'v'): ['situated'],
        ('city', 'n'): ['town'],
        ('big', 'a'): ['large', 'great big'],
    })


@pytest.fixture(scope='session')
def synthetic():
    return make_synthetic_corpus(n_per_relation=200, dim=16, seed=0)


@pytest.fixture(scope='session')
def synthetic_files(tmp_path_factory):
    return write_synthetic_corpus(tmp_path_factory.mktemp('synthetic'), n_per_relation=200, dim=16, seed=0)


@pytest.fixture
def mock_backend(synthetic):
    _, relation_table, _, _, _ = synthetic
    table = {}
    for relation, (triggers, mean) in relation_table.items():
        for word in (relation,) + tuple(triggers):
            table[word] = mean
    return MockBackend(table)


@pytest.fixture
def mock_backend64(mock_backend):
    """gradient 검사용 float64 백엔드 (무작위 초기화로 항등이 아닌 지점에서 검사)."""
    backend = MockBackend(mock_backend.table, vocab=mock_backend.vocab, dtype=torch.float64)
    generator = torch.Generator().manual_seed(0)
    with torch.no_grad():
        for param in backend.parameters():
            param.add_(0.1 * torch.randn(param.shape, generator=generator, dtype=torch.float64))
    return backend


def finite_difference_check(loss_fn, params, n_coords=20, step=1e-5, seed=0):
    """무작위 좌표에서 해석 gradient 와 중심 차분을 비교해 최대 상대 오차를 돌려준다.

    상대 오차 분모는 max(|해석|, |수치|, 1e-4).
    """
    params = [p for p in params if p.requires_grad]
    for p in params:
        p.grad = None
    loss_fn().backward()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_coords):
        param = params[int(rng.integers(len(params)))]
        flat_index = int(rng.integers(param.numel()))
        analytic = param.grad.reshape(-1)[flat_index].item()
        with torch.no_grad():
            original = param.reshape(-1)[flat_index].item()
            param.reshape(-1)[flat_index] = original + step
            plus = loss_fn().item()
            param.reshape(-1)[flat_index] = original - step
            minus = loss_fn().item()
            param.reshape(-1)[flat_index] = original
        numeric = (plus - minus) / (2 * step)
        worst = max(worst, abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-4))
    return worst


def naive_contrastive(features, tau, exclude_self=False):
    """여러 뷰 대조 손실을 이중 반복문으로 그대로 계산 (비교 기준)."""
    n_anchor, n_view, _ = features.shape
    total = 0.0
    for a in range(n_anchor):
        for m in range(n_view):
            anchor = features[a, m]
            num = sum(math.exp(anchor @ features[a, u] / tau) for u in range(n_view) if u != m)
            den = 0.0
            for b in range(n_anchor):
                for u in range(n_view):
                    if exclude_self and (b, u) == (a, m):
                        continue
                    den += math.exp(anchor @ features[b, u] / tau)
            total += math.log(num / den)
    return -total / (n_anchor * n_view)


def synthetic_tri_view_prompts(synthetic, step=250, seed=0):
    instances, _, entity_rows, synonyms, _ = synthetic
    entity_lexicon = EntityTypeLexicon(by_kb_id={kb: t for _, kb, t in entity_rows})
    synonym_lexicon = SynonymLexicon(synonyms)
    prompts = []
    for inst in instances[::step]:
        tv = generate_tri_view(inst, entity_lexicon, synonym_lexicon, seed=seed)
        prompts.extend(build_prompt(v) for v in tv.views)
    return prompts

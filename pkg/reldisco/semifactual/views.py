import hashlib
import json
import logging
import math
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from reldisco.models import (
    HEAD_END,
    HEAD_START,
    TAIL_END,
    TAIL_START,
    MarkedSentence,
    TriView,
    ViewKind,
)

logger = logging.getLogger(__name__)

ENTITY_MODES = ('head', 'tail', 'both')

# 치환 금지 품사: 고유명사, 대명사, 등위접속사, 한정사, 구두점, 수사 (Penn + UPOS)
EXCLUDED_POS = frozenset({
    'NNP', 'NNPS', 'PROPN',
    'PRP', 'PRP$', 'WP', 'WP$', 'PRON',
    'CC', 'CCONJ',
    'DT', 'PDT', 'WDT', 'DET',
    'CD', 'NUM',
    '.', ',', ':', '``', "''", '-LRB-', '-RRB-', '(', ')', '#', '$', 'HYPH', 'PUNCT', 'SYM',
})


def instance_rng(seed, instance_id, stream):
    """(seed, instance_id, stream) 에서 파생한 난수열. 처리 순서와 무관하게 같다."""
    digest = hashlib.sha256(f'{instance_id}/{stream}'.encode('utf-8')).digest()
    return np.random.default_rng([int(seed), int.from_bytes(digest[:8], 'little')])


def _splice(tokens, edits, spans):
    # edits: {원래 시작 인덱스: (원래 끝, 새 토큰들)}; spans 는 편집 영역과 겹치지 않거나 정확히 일치해야 함
    out = []
    new_index = {}
    i = 0
    while i < len(tokens):
        new_index[i] = len(out)
        if i in edits:
            end, replacement = edits[i]
            out.extend(replacement)
            i = end
        else:
            out.append(tokens[i])
            i += 1
    new_index[len(tokens)] = len(out)
    return tuple(out), [(new_index[s], new_index[e]) for s, e in spans]


def main_view(instance):
    head, tail = instance.head, instance.tail
    out = []
    head_span = tail_span = None
    for i, token in enumerate(instance.tokens):
        if i == head.start:
            out.append(HEAD_START)
            h0 = len(out)
        if i == tail.start:
            out.append(TAIL_START)
            t0 = len(out)
        out.append(token)
        if i == head.end - 1:
            head_span = (h0, len(out))
            out.append(HEAD_END)
        if i == tail.end - 1:
            tail_span = (t0, len(out))
            out.append(TAIL_END)
    return MarkedSentence(
        tokens=tuple(out),
        head_span=head_span,
        tail_span=tail_span,
        view_kind=ViewKind.MAIN,
        source_id=instance.instance_id,
        relation=instance.relation,
    )


def entity_debiased_view(instance, lexicon, rng):
    """head / tail / 둘 다 중 하나를 골라 엔티티를 [타입] 으로 바꾼다."""
    mode = ENTITY_MODES[int(rng.integers(len(ENTITY_MODES)))]
    edits = {}
    fallback = False
    replaced = {'head': False, 'tail': False}
    for role, span in (('head', instance.head), ('tail', instance.tail)):
        if mode not in (role, 'both'):
            continue
        type_name = lexicon.lookup(span.surface, span.kb_id)
        if type_name is None:
            # 타입을 모르면 원래 표기를 유지
            fallback = True
            continue
        edits[span.start] = (span.end, (f'[{type_name}]',))
        replaced[role] = True

    tokens, (head_span, tail_span) = _splice(
        instance.tokens, edits, [(instance.head.start, instance.head.end), (instance.tail.start, instance.tail.end)]
    )
    return MarkedSentence(
        tokens=tokens,
        head_span=head_span,
        tail_span=tail_span,
        view_kind=ViewKind.ENTITY,
        source_id=instance.instance_id,
        relation=instance.relation,
        head_replaced=replaced['head'],
        tail_replaced=replaced['tail'],
        fallback=fallback,
    )


def eligible_context_positions(instance, lexicon, pos_tags):
    """엔티티 밖, 제외 품사가 아니고 사전에 동의어가 있는 위치. 교체 개수의 분모가 된다."""
    if pos_tags is None:
        return []
    inside = set(range(instance.head.start, instance.head.end)) | set(range(instance.tail.start, instance.tail.end))
    return [
        i for i, (token, tag) in enumerate(zip(instance.tokens, pos_tags))
        if i not in inside and tag not in EXCLUDED_POS and lexicon.candidates(token, tag)
    ]


def replacement_count(n_eligible, ratio):
    if n_eligible == 0:
        return 0
    return max(1, math.ceil(ratio * n_eligible - 1e-9))


def context_debiased_view(instance, lexicon, pos_tags, rng, ratio=0.05):
    """엔티티 밖 문맥 단어의 ratio 만큼을 동의어로 바꾼다 (올림, 최소 1개)."""
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f'context ratio must be in (0, 1], got {ratio}')
    eligible = eligible_context_positions(instance, lexicon, pos_tags)
    spans = [(instance.head.start, instance.head.end), (instance.tail.start, instance.tail.end)]
    if not eligible:
        tokens, (head_span, tail_span) = _splice(instance.tokens, {}, spans)
        return MarkedSentence(tokens, head_span, tail_span, ViewKind.CONTEXT, instance.instance_id,
                              instance.relation, fallback=True)

    k = replacement_count(len(eligible), ratio)
    chosen = sorted(int(i) for i in rng.choice(eligible, size=k, replace=False))
    edits = {}
    for i in chosen:
        candidates = lexicon.candidates(instance.tokens[i], pos_tags[i])
        synonym = candidates[int(rng.integers(len(candidates)))]
        # 여러 단어짜리 동의어는 제자리에서 다시 토큰화
        edits[i] = (i + 1, tuple(synonym.replace('_', ' ').split()))

    tokens, (head_span, tail_span) = _splice(instance.tokens, edits, spans)
    return MarkedSentence(tokens, head_span, tail_span, ViewKind.CONTEXT, instance.instance_id, instance.relation)


class PosTagger:
    """인라인 태그 우선, 없으면 sidecar(instance_id -> 태그)."""

    def __init__(self, sidecar=None):
        self.sidecar = sidecar or {}

    def __call__(self, instance):
        if instance.pos_tags is not None:
            return instance.pos_tags
        tags = self.sidecar.get(instance.instance_id)
        if tags is not None and len(tags) != len(instance.tokens):
            logger.warning('POS sidecar for %s has %d tags for %d tokens; ignored',
                           instance.instance_id, len(tags), len(instance.tokens))
            return None
        return tags


def generate_tri_view(instance, entity_lexicon, synonym_lexicon, pos_tagger=None, seed=0, context_ratio=0.05):
    pos_tagger = pos_tagger or PosTagger()
    views = (
        main_view(instance),
        entity_debiased_view(instance, entity_lexicon, instance_rng(seed, instance.instance_id, 'entity')),
        context_debiased_view(instance, synonym_lexicon, pos_tagger(instance),
                              instance_rng(seed, instance.instance_id, 'context'), ratio=context_ratio),
    )
    return TriView(source_id=instance.instance_id, views=views, relation=instance.relation)


def generate_tri_views(instances, entity_lexicon, synonym_lexicon, pos_tagger=None, seed=0,
                       context_ratio=0.05, n_jobs=1):
    # 인스턴스별 난수열이 독립이라 병렬 처리해도 결과가 같다
    triviews = Parallel(n_jobs=n_jobs)(
        delayed(generate_tri_view)(inst, entity_lexicon, synonym_lexicon, pos_tagger, seed, context_ratio)
        for inst in instances
    )
    n_entity_fallback = sum(tv.view(2).fallback for tv in triviews)
    n_context_fallback = sum(tv.view(3).fallback for tv in triviews)
    logger.info('generated %d tri-views (entity fallback %d, context fallback %d)',
                len(triviews), n_entity_fallback, n_context_fallback)
    return {tv.source_id: tv for tv in triviews}


def write_tri_views(path, triviews):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8') as f:
        for source_id in sorted(triviews):
            f.write(json.dumps(triviews[source_id].to_record(), ensure_ascii=False, sort_keys=True) + '\n')


def read_tri_views(path):
    triviews = {}
    with Path(path).open(encoding='utf-8') as f:
        for line in f:
            if line.strip():
                tv = TriView.from_record(json.loads(line))
                triviews[tv.source_id] = tv
    return triviews

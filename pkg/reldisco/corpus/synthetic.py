import logging
from pathlib import Path

import numpy as np

from reldisco.corpus.loaders import write_fewrel_json
from reldisco.models import RelationInstance, Span

logger = logging.getLogger(__name__)

# relation -> (head 타입, tail 타입, 서로 동의어인 트리거 동사들, 설명)
RELATIONS = {
    'located_in': ('City', 'Country', ('lies', 'sits', 'rests'), 'located in lies'),
    'founded_by': ('Company', 'Person', ('originates', 'stems', 'springs'), 'founded by originates'),
    'employs': ('Company', 'Person', ('employs', 'hires', 'engages'), 'employs hires'),
    'borders': ('Country', 'Country', ('borders', 'adjoins', 'abuts'), 'borders adjoins'),
    'governs': ('Person', 'City', ('governs', 'rules', 'administers'), 'governs rules'),
    'visits': ('Person', 'Country', ('visits', 'tours', 'frequents'), 'visits tours'),
}

# 문맥 명사와 동의어 (context 뷰 치환 후보)
FILLER_NOUNS = {
    'city': ('town',),
    'year': ('twelvemonth',),
    'group': ('grouping',),
    'area': ('region',),
    'team': ('squad',),
    'event': ('occasion',),
    'report': ('account',),
}
PREPOSITIONS = ('of', 'in', 'near')

_SYLLABLES = ('ka', 'lo', 'mi', 'ren', 'tu', 'va', 'sor', 'del', 'bri', 'no', 'xen', 'pa')
_ENTITY_TYPES = ('Person', 'City', 'Company', 'Country')


def _entity_pool(rng, size_per_type=40):
    """타입별 가상 엔티티 (이름, kb_id). 일부는 두 단어 이름."""
    pool = {}
    kb = 1000
    for type_name in _ENTITY_TYPES:
        names = set()
        while len(names) < size_per_type:
            n_words = 1 + int(rng.random() < 0.3)
            words = []
            for _ in range(n_words):
                n_syl = int(rng.integers(2, 4))
                words.append(''.join(rng.choice(_SYLLABLES, size=n_syl)).capitalize())
            names.add(' '.join(words))
        entries = []
        for name in sorted(names):
            entries.append((name, f'Q{kb}'))
            kb += 1
        pool[type_name] = entries
    return pool


def _filler_phrase(rng):
    noun = str(rng.choice(sorted(FILLER_NOUNS)))
    prep = str(rng.choice(PREPOSITIONS))
    return [('the', 'DT'), (noun, 'NN'), (prep, 'IN')]


def make_synthetic_corpus(n_per_relation=280, dim=16, scale=4.0, seed=0):
    """관계별 평균 벡터가 직교하는 분리 가능한 합성 말뭉치.

    Returns:
        instances: RelationInstance 리스트 (인라인 POS 포함)
        relation_table: relation -> (트리거들, 평균 벡터)
        entity_rows: (surface, kb_id, type) 목록
        synonyms: (word, pos) -> 후보 목록
        descriptions: relation -> 설명 문장
    """
    relations = sorted(RELATIONS)
    if dim < len(relations):
        raise ValueError(f'dim {dim} is smaller than the {len(relations)} synthetic relations')
    rng = np.random.default_rng(seed)

    # Task 1: 관계 평균 벡터 (QR 로 직교화)
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    relation_table = {
        relation: (RELATIONS[relation][2], scale * q[:, i]) for i, relation in enumerate(relations)
    }

    # Task 2: 엔티티 풀
    pool = _entity_pool(rng)
    entity_rows = [(name, kb_id, type_name) for type_name in _ENTITY_TYPES for name, kb_id in pool[type_name]]

    # Task 3: 문장 생성 "the N of <head> TRIGGER <tail> in the N"
    instances = []
    for relation in relations:
        head_type, tail_type, triggers, _ = RELATIONS[relation]
        for k in range(n_per_relation):
            head_name, head_kb = pool[head_type][int(rng.integers(len(pool[head_type])))]
            tail_name, tail_kb = pool[tail_type][int(rng.integers(len(pool[tail_type])))]
            while tail_name == head_name:
                tail_name, tail_kb = pool[tail_type][int(rng.integers(len(pool[tail_type])))]

            tagged = _filler_phrase(rng) if rng.random() < 0.7 else []
            head_start = len(tagged)
            tagged += [(w, 'NNP') for w in head_name.split()]
            head_end = len(tagged)
            tagged.append((str(rng.choice(triggers)), 'VBZ'))
            tail_start = len(tagged)
            tagged += [(w, 'NNP') for w in tail_name.split()]
            tail_end = len(tagged)
            if rng.random() < 0.5:
                noun = str(rng.choice(sorted(FILLER_NOUNS)))
                tagged += [('in', 'IN'), ('the', 'DT'), (noun, 'NN')]
            tagged.append(('.', '.'))

            tokens = tuple(w for w, _ in tagged)
            instances.append(RelationInstance(
                instance_id=f'{relation}#{k:05d}',
                tokens=tokens,
                head=Span(head_start, head_end, head_name, head_kb),
                tail=Span(tail_start, tail_end, tail_name, tail_kb),
                relation=relation,
                pos_tags=tuple(t for _, t in tagged),
            ))

    # Task 4: 동의어 사전 (트리거끼리, 문맥 명사)
    synonyms = {}
    for relation in relations:
        triggers = RELATIONS[relation][2]
        for word in triggers:
            synonyms[(word, 'v')] = [t for t in triggers if t != word]
    for noun, cands in FILLER_NOUNS.items():
        synonyms[(noun, 'n')] = list(cands)

    descriptions = {relation: RELATIONS[relation][3] for relation in relations}
    return instances, relation_table, entity_rows, synonyms, descriptions


def write_synthetic_corpus(out_dir, n_per_relation=280, dim=16, scale=4.0, seed=0):
    """합성 말뭉치와 부속 파일들을 out_dir 에 쓴다. 파일 경로 dict 를 돌려준다."""
    from reldisco.encoder.mock import write_mock_table
    from reldisco.semifactual.lexicons import EntityTypeLexicon, SynonymLexicon

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    instances, relation_table, entity_rows, synonyms, descriptions = make_synthetic_corpus(
        n_per_relation=n_per_relation, dim=dim, scale=scale, seed=seed,
    )
    paths = {
        'dataset': out_dir / 'dataset.json',
        'mock_table': out_dir / 'mock_table.tsv',
        'entity_types': out_dir / 'entity_types.tsv',
        'synonyms': out_dir / 'synonyms.tsv',
        'descriptions': out_dir / 'descriptions.tsv',
    }
    write_fewrel_json(paths['dataset'], instances)
    write_mock_table(paths['mock_table'], relation_table)
    EntityTypeLexicon.write(paths['entity_types'], entity_rows)
    lexicon = SynonymLexicon()
    for (word, pos), cands in synonyms.items():
        lexicon.add(word, pos, cands)
    lexicon.write(paths['synonyms'])
    paths['descriptions'].write_text(
        ''.join(f'{relation}\t{text}\n' for relation, text in sorted(descriptions.items())), encoding='utf-8',
    )
    logger.info('synthetic corpus: %d instances, %d relations -> %s', len(instances), len(descriptions), out_dir)
    return paths

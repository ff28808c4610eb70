import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from reldisco.errors import SplitError
from reldisco.models import SplitSpec

logger = logging.getLogger(__name__)

NO_RELATION_LABELS = frozenset({'no_relation', 'NA', 'No relation', 'Other'})


@dataclass(frozen=True)
class SizingPolicy:
    """관계별 분할 크기 규칙.

    per_relation: 관계마다 test / unlabeled / labeled 개수를 고정 (FewRel)
    fraction: test 비율 후 나머지를 unlabeled / labeled 로 반씩 (TACRED)
    """
    kind: str
    test_count: int = 0
    unlabeled_count: int = 0
    labeled_count: int = 0
    test_fraction: float = 0.0
    unlabeled_fraction: float = 0.5
    rounding: str = 'exact'
    # 관계 수 -> {novel_ratio: novel 관계 수}
    novel_count_table: dict = field(default_factory=dict)


FEWREL_POLICY = SizingPolicy(kind='per_relation', test_count=100, unlabeled_count=300, labeled_count=300)
TACRED_POLICY = SizingPolicy(
    kind='fraction',
    test_fraction=0.15,
    unlabeled_fraction=0.5,
    rounding='nearest',
    novel_count_table={41: {0.2: 9, 0.5: 20, 0.8: 32}},
)
POLICIES = {
    'fewrel-json': FEWREL_POLICY,
    'tacred-json': TACRED_POLICY,
}


def drop_no_relation(instances, labels=NO_RELATION_LABELS):
    kept = [inst for inst in instances if inst.relation not in labels]
    logger.info('dropped %d no-relation instances, %d left', len(instances) - len(kept), len(kept))
    return kept


def _round_half_up(x):
    return int(np.floor(x + 0.5))


def novel_relation_count(n_relations, novel_ratio, policy):
    if not 0.0 <= novel_ratio < 1.0:
        raise SplitError(f'novel_ratio must be in [0, 1), got {novel_ratio}')
    table = policy.novel_count_table.get(n_relations, {})
    for ratio, count in table.items():
        if abs(ratio - novel_ratio) < 1e-9:
            return count
    raw = novel_ratio * n_relations
    if policy.rounding == 'nearest':
        return _round_half_up(raw)
    if abs(raw - round(raw)) > 1e-9:
        raise SplitError(
            f'novel_ratio {novel_ratio} x {n_relations} relations = {raw:g} is not an integral relation count'
        )
    return int(round(raw))


def build_splits(instances, novel_ratio, per_relation_counts=FEWREL_POLICY, seed=0):
    """labeled / unlabeled / test 분할과 R^l, R^n 을 만든다. 같은 seed 면 같은 결과."""
    policy = per_relation_counts
    by_relation = defaultdict(list)
    for inst in instances:
        if inst.relation is None:
            raise SplitError(f'instance {inst.instance_id} has no relation label')
        by_relation[inst.relation].append(inst.instance_id)

    relations = sorted(by_relation)
    n_novel = novel_relation_count(len(relations), novel_ratio, policy)
    rng = np.random.default_rng(seed)

    # Task 1: novel 관계 균등 추출
    novel_idx = rng.choice(len(relations), size=n_novel, replace=False) if n_novel else []
    novel = frozenset(relations[i] for i in novel_idx)
    predefined = frozenset(relations) - novel

    # Task 2: 관계별 비복원 추출로 분할
    labeled, unlabeled, test = set(), set(), set()
    for relation in relations:
        ids = sorted(by_relation[relation])
        ids = [ids[i] for i in rng.permutation(len(ids))]
        n_test, n_unlabeled, n_labeled = _relation_sizes(relation, len(ids), relation in predefined, policy)
        test.update(ids[:n_test])
        unlabeled.update(ids[n_test:n_test + n_unlabeled])
        if relation in predefined:
            labeled.update(ids[n_test + n_unlabeled:n_test + n_unlabeled + n_labeled])

    spec = SplitSpec(
        labeled_ids=frozenset(labeled),
        unlabeled_ids=frozenset(unlabeled),
        test_ids=frozenset(test),
        predefined_relations=predefined,
        novel_relations=novel,
        novel_ratio=float(novel_ratio),
    )
    logger.info(
        'splits: %d pre-defined / %d novel relations, %d labeled, %d unlabeled, %d test',
        len(predefined), len(novel), len(labeled), len(unlabeled), len(test),
    )
    return spec


def _relation_sizes(relation, n, is_predefined, policy):
    if policy.kind == 'per_relation':
        need = policy.test_count + policy.unlabeled_count + (policy.labeled_count if is_predefined else 0)
        if n < need:
            raise SplitError(f'relation {relation!r} has {n} instances, sizing policy needs {need}')
        return policy.test_count, policy.unlabeled_count, policy.labeled_count

    if policy.kind == 'fraction':
        n_test = _round_half_up(policy.test_fraction * n)
        rest = n - n_test
        n_unlabeled = _round_half_up(policy.unlabeled_fraction * rest)
        n_labeled = rest - n_unlabeled
        if n_test < 1 or n_unlabeled < 1 or (is_predefined and n_labeled < 1):
            raise SplitError(f'relation {relation!r} has too few instances ({n}) for the sizing policy')
        return n_test, n_unlabeled, n_labeled

    raise SplitError(f'unknown sizing policy kind {policy.kind!r}')


MANIFEST_SECTIONS = ('predefined', 'novel', 'labeled', 'unlabeled', 'test')


def write_manifest(path, spec):
    sections = {
        'predefined': spec.predefined_relations,
        'novel': spec.novel_relations,
        'labeled': spec.labeled_ids,
        'unlabeled': spec.unlabeled_ids,
        'test': spec.test_ids,
    }
    lines = [f'novel_ratio\t{spec.novel_ratio!r}']
    for name in MANIFEST_SECTIONS:
        lines.append(f'[{name}]')
        lines.extend(sorted(sections[name]))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')


def read_manifest(path):
    sections = {name: [] for name in MANIFEST_SECTIONS}
    novel_ratio = None
    current = None
    for line in Path(path).read_text(encoding='utf-8').splitlines():
        if not line:
            continue
        if line.startswith('novel_ratio\t'):
            novel_ratio = float(line.split('\t', 1)[1])
        elif line.startswith('[') and line.endswith(']'):
            current = line[1:-1]
            if current not in sections:
                raise SplitError(f'{path}: unknown manifest section {current!r}')
        elif current is None:
            raise SplitError(f'{path}: entry before any section: {line!r}')
        else:
            sections[current].append(line)
    if novel_ratio is None:
        raise SplitError(f'{path}: missing novel_ratio header')
    return SplitSpec(
        labeled_ids=frozenset(sections['labeled']),
        unlabeled_ids=frozenset(sections['unlabeled']),
        test_ids=frozenset(sections['test']),
        predefined_relations=frozenset(sections['predefined']),
        novel_relations=frozenset(sections['novel']),
        novel_ratio=novel_ratio,
    )

import json
import logging
from pathlib import Path

from reldisco.errors import ConfigError, DatasetFormatError
from reldisco.models import RelationInstance, Span

logger = logging.getLogger(__name__)

FORMATS = ('fewrel-json', 'tacred-json')


def load_dataset(path, format='fewrel-json'):
    """관계 추출 말뭉치를 RelationInstance 리스트로 읽는다 (instance_id 순 정렬)."""
    if format not in FORMATS:
        raise ConfigError(f'unknown dataset format {format!r}; expected one of {FORMATS}')
    text = Path(path).read_text(encoding='utf-8')
    if not text.strip():
        return []
    data = json.loads(text)

    if format == 'fewrel-json':
        instances = list(_iter_fewrel(data))
    else:
        instances = list(_iter_tacred(data))

    instances.sort(key=lambda x: x.instance_id)
    logger.info('loaded %d instances from %s (%s)', len(instances), path, format)
    return instances


def _iter_fewrel(data):
    # relation -> [{tokens, h: [surface, kb_id, [[pos...]]], t: ...}]
    if not isinstance(data, dict):
        raise DatasetFormatError(0, '<root>', 'fewrel-json expects an object keyed by relation')
    index = 0
    for relation in sorted(data):
        records = data[relation]
        if not isinstance(records, list):
            raise DatasetFormatError(index, relation, 'relation entry must be a list')
        for k, record in enumerate(records):
            yield instance_from_record(record, index, relation=relation, default_id=f'{relation}#{k:05d}')
            index += 1


def instance_from_record(record, index, relation=None, default_id=None):
    """fewrel 식 레코드 하나 {id?, tokens, h, t, pos?} -> RelationInstance."""
    if not isinstance(record, dict):
        raise DatasetFormatError(index, '<record>', 'record must be an object')
    tokens = _tokens(record, 'tokens', index)
    head = _fewrel_span(record, 'h', tokens, index)
    tail = _fewrel_span(record, 't', tokens, index)
    instance_id = record.get('id') or default_id
    if not instance_id:
        raise DatasetFormatError(index, 'id')
    return RelationInstance(
        instance_id=str(instance_id),
        tokens=tokens,
        head=head,
        tail=tail,
        relation=record.get('relation', relation),
        pos_tags=_pos(record, index, ('pos', 'stanford_pos')),
    )


def _fewrel_span(record, key, tokens, index):
    entry = record.get(key)
    try:
        surface, kb_id, positions = entry[0], entry[1], entry[2]
        mention = [int(p) for p in positions[0]]
    except (TypeError, IndexError, KeyError, ValueError):
        raise DatasetFormatError(index, key, 'expected [surface, kb_id, [[token positions]]]')
    if not mention:
        raise DatasetFormatError(index, key, 'empty mention positions')
    return Span(min(mention), max(mention) + 1, str(surface), str(kb_id) if kb_id else None)


def _iter_tacred(data):
    if not isinstance(data, list):
        raise DatasetFormatError(0, '<root>', 'tacred-json expects a list of records')
    for index, record in enumerate(data):
        if not isinstance(record, dict):
            raise DatasetFormatError(index, '<record>', 'record must be an object')
        tokens = _tokens(record, 'token', index)
        spans = {}
        for role in ('subj', 'obj'):
            try:
                start = int(record[f'{role}_start'])
                end = int(record[f'{role}_end']) + 1  # TACRED 끝 인덱스는 포함
            except (KeyError, TypeError, ValueError):
                raise DatasetFormatError(index, f'{role}_start/{role}_end')
            spans[role] = Span(start, end, ' '.join(tokens[start:end]))
        relation = record.get('relation')
        if not isinstance(relation, str):
            raise DatasetFormatError(index, 'relation')
        instance_id = record.get('id')
        if not instance_id:
            raise DatasetFormatError(index, 'id')
        yield RelationInstance(
            instance_id=str(instance_id),
            tokens=tokens,
            head=spans['subj'],
            tail=spans['obj'],
            relation=relation,
            pos_tags=_pos(record, index, ('stanford_pos', 'pos')),
        )


def _tokens(record, key, index):
    tokens = record.get(key) if isinstance(record, dict) else None
    if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
        raise DatasetFormatError(index, key, 'expected a list of strings')
    return tuple(tokens)


def _pos(record, index, keys):
    for key in keys:
        if key in record:
            tags = record[key]
            if not isinstance(tags, list):
                raise DatasetFormatError(index, key, 'expected a list of POS tags')
            return tuple(str(t) for t in tags)
    return None


def load_pos_sidecar(path):
    """instance_id<TAB>공백 구분 POS 태그."""
    tags = {}
    with Path(path).open(encoding='utf-8') as f:
        for line in f:
            line = line.rstrip('\n')
            if not line:
                continue
            instance_id, _, tag_text = line.partition('\t')
            tags[instance_id] = tuple(tag_text.split())
    return tags


def attach_pos_tags(instances, sidecar):
    # 인라인 태그가 우선
    out = []
    for inst in instances:
        if inst.pos_tags is None and inst.instance_id in sidecar:
            inst = RelationInstance(inst.instance_id, inst.tokens, inst.head, inst.tail,
                                    inst.relation, sidecar[inst.instance_id])
        out.append(inst)
    return out


def write_fewrel_json(path, instances):
    """RelationInstance 리스트를 fewrel-json 형식으로 저장 (POS 태그 포함)."""
    grouped = {}
    for inst in instances:
        record = {
            'id': inst.instance_id,
            'tokens': list(inst.tokens),
            'h': [inst.head.surface, inst.head.kb_id, [list(range(inst.head.start, inst.head.end))]],
            't': [inst.tail.surface, inst.tail.kb_id, [list(range(inst.tail.start, inst.tail.end))]],
        }
        if inst.pos_tags is not None:
            record['pos'] = list(inst.pos_tags)
        grouped.setdefault(inst.relation, []).append(record)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(grouped, ensure_ascii=False, indent=1), encoding='utf-8')

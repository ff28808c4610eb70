from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from reldisco.errors import SpanError

# 엔티티 마커 / 프롬프트 특수 토큰
HEAD_START = '<h>'
HEAD_END = '</h>'
TAIL_START = '<t>'
TAIL_END = '</t>'
MASK = '[MASK]'
MARKER_TOKENS = (HEAD_START, HEAD_END, TAIL_START, TAIL_END)


@dataclass(frozen=True)
class Span:
    start: int  # 포함
    end: int  # 미포함
    surface: str
    kb_id: Optional[str] = None

    def __len__(self):
        return self.end - self.start

    def overlaps(self, other):
        return self.start < other.end and other.start < self.end


# 관계 인스턴스 x = <s, h, t>
@dataclass(frozen=True)
class RelationInstance:
    instance_id: str
    tokens: tuple
    head: Span
    tail: Span
    relation: Optional[str] = None
    pos_tags: Optional[tuple] = None

    def __post_init__(self):
        n = len(self.tokens)
        for name, span in (('head', self.head), ('tail', self.tail)):
            if span is None:
                raise SpanError(self.instance_id, f'{name} span missing')
            if len(span) <= 0:
                raise SpanError(self.instance_id, f'{name} span is empty')
            if span.start < 0 or span.end > n:
                raise SpanError(self.instance_id, f'{name} span {span.start}:{span.end} outside {n} tokens')
        if self.head.overlaps(self.tail):
            raise SpanError(self.instance_id, 'head and tail spans overlap')
        if self.pos_tags is not None and len(self.pos_tags) != n:
            raise SpanError(self.instance_id, f'{len(self.pos_tags)} POS tags for {n} tokens')

    def hidden(self):
        """정답 라벨을 가린 사본 (비라벨 분할 학습용)."""
        return RelationInstance(self.instance_id, self.tokens, self.head, self.tail, None, self.pos_tags)


@dataclass(frozen=True)
class SplitSpec:
    labeled_ids: frozenset
    unlabeled_ids: frozenset
    test_ids: frozenset
    predefined_relations: frozenset
    novel_relations: frozenset
    novel_ratio: float

    @property
    def all_relations(self):
        return self.predefined_relations | self.novel_relations


class ViewKind(str, Enum):
    MAIN = 'main'
    ENTITY = 'entity'
    CONTEXT = 'context'

    @property
    def index(self):
        # m ∈ {1, 2, 3}
        return VIEW_ORDER.index(self) + 1


VIEW_ORDER = (ViewKind.MAIN, ViewKind.ENTITY, ViewKind.CONTEXT)


@dataclass(frozen=True)
class MarkedSentence:
    tokens: tuple
    head_span: tuple  # 이 뷰의 tokens 기준 (start, end)
    tail_span: tuple
    view_kind: ViewKind
    source_id: str
    relation: Optional[str] = None
    head_replaced: bool = False
    tail_replaced: bool = False
    fallback: bool = False

    @property
    def head_tokens(self):
        return self.tokens[self.head_span[0]:self.head_span[1]]

    @property
    def tail_tokens(self):
        return self.tokens[self.tail_span[0]:self.tail_span[1]]

    @property
    def head_surface(self):
        return ' '.join(self.head_tokens)

    @property
    def tail_surface(self):
        return ' '.join(self.tail_tokens)

    def to_record(self):
        return {
            'tokens': list(self.tokens),
            'head_span': list(self.head_span),
            'tail_span': list(self.tail_span),
            'view_kind': self.view_kind.value,
            'head_replaced': self.head_replaced,
            'tail_replaced': self.tail_replaced,
            'fallback': self.fallback,
        }

    @classmethod
    def from_record(cls, record, source_id, relation=None):
        return cls(
            tokens=tuple(record['tokens']),
            head_span=tuple(record['head_span']),
            tail_span=tuple(record['tail_span']),
            view_kind=ViewKind(record['view_kind']),
            source_id=source_id,
            relation=relation,
            head_replaced=record['head_replaced'],
            tail_replaced=record['tail_replaced'],
            fallback=record['fallback'],
        )


@dataclass(frozen=True)
class TriView:
    source_id: str
    views: tuple = field(default_factory=tuple)
    relation: Optional[str] = None

    def __post_init__(self):
        if len(self.views) != 3:
            raise ValueError(f'{self.source_id}: a tri-view needs 3 views, got {len(self.views)}')

    def view(self, m):
        """m 은 1(main), 2(entity), 3(context)."""
        return self.views[m - 1]

    def to_record(self):
        return {
            'source_id': self.source_id,
            'relation': self.relation,
            'views': [v.to_record() for v in self.views],
        }

    @classmethod
    def from_record(cls, record):
        source_id = record['source_id']
        relation = record.get('relation')
        views = tuple(MarkedSentence.from_record(v, source_id, relation) for v in record['views'])
        return cls(source_id=source_id, views=views, relation=relation)

from dataclasses import dataclass

from reldisco.errors import PromptTooLongError, SpanError
from reldisco.models import HEAD_START, MASK, TAIL_START, ViewKind


@dataclass(frozen=True)
class PromptedInput:
    tokens: tuple
    mask_position: int
    view_kind: ViewKind
    instance_id: str
    body_length: int  # 앞쪽 문장 부분 길이, 잘라낼 수 있는 구간

    @property
    def body(self):
        return self.tokens[:self.body_length]

    @property
    def suffix(self):
        return self.tokens[self.body_length:]


def _slot(value, role, instance_id):
    if value is None or not str(value).strip():
        raise SpanError(instance_id, f'empty {role} slot in prompt')
    return tuple(str(value).split())


def build_prompt(view, head=None, tail=None):
    """x_prompt(s) = s ⊕ h [MASK] t. 엔티티 뷰에서 치환된 엔티티는 <h> / <t> 로."""
    if not view.tokens:
        raise SpanError(view.source_id, 'empty view')
    if head is None:
        head = HEAD_START if view.head_replaced else view.head_surface
    if tail is None:
        tail = TAIL_START if view.tail_replaced else view.tail_surface
    head_tokens = _slot(head, 'head', view.source_id)
    tail_tokens = _slot(tail, 'tail', view.source_id)
    tokens = tuple(view.tokens) + head_tokens + (MASK,) + tail_tokens
    return PromptedInput(
        tokens=tokens,
        mask_position=len(view.tokens) + len(head_tokens),
        view_kind=view.view_kind,
        instance_id=view.source_id,
        body_length=len(view.tokens),
    )


def truncate_prompt(prompt, max_length):
    """문장 부분을 오른쪽부터 잘라 max_length 에 맞춘다. 프롬프트 꼬리는 자르지 않음."""
    suffix = prompt.suffix
    budget = max_length - len(suffix)
    if budget < 0:
        raise PromptTooLongError(prompt.instance_id, len(suffix), max_length)
    body = prompt.body[:budget]
    return PromptedInput(
        tokens=tuple(body) + tuple(suffix),
        mask_position=prompt.mask_position - (prompt.body_length - len(body)),
        view_kind=prompt.view_kind,
        instance_id=prompt.instance_id,
        body_length=len(body),
    )

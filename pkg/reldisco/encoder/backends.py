import logging

import torch
from torch import nn

from reldisco.errors import ConfigError, PromptTooLongError
from reldisco.models import MARKER_TOKENS

logger = logging.getLogger(__name__)


class EncoderBackend(nn.Module):
    """[MASK] 위치의 hidden 벡터와 어휘 logits 를 내는 인코더 공통 인터페이스."""

    vocab = ()
    hidden_size = 0
    max_length = 128

    def forward_prompts(self, prompts):
        """prompts -> (hidden [B, d], logits [B, |V|])."""
        raise NotImplementedError

    def describe(self):
        """체크포인트에서 같은 백엔드를 다시 만들 수 있는 설정값."""
        raise NotImplementedError

    @property
    def device(self):
        return next(self.parameters()).device


class MaskedLMBackend(EncoderBackend):
    """사전학습 masked LM (기본 bert-base-uncased) 백엔드."""

    def __init__(self, model_name='bert-base-uncased', max_length=128, device='cpu'):
        super().__init__()
        from transformers import AutoModelForMaskedLM, AutoTokenizer

        self.model_name = model_name
        self.max_length = max_length
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        n_added = self.tokenizer.add_special_tokens({'additional_special_tokens': list(MARKER_TOKENS)})
        self.model = AutoModelForMaskedLM.from_pretrained(model_name)
        if n_added:
            self.model.resize_token_embeddings(len(self.tokenizer))
            self._init_added_embeddings(n_added)
        self.model.to(device)
        self.hidden_size = self.model.config.hidden_size
        self.vocab = tuple(self.tokenizer.convert_ids_to_tokens(list(range(len(self.tokenizer)))))
        logger.info('loaded %s (%d vocab, hidden %d)', model_name, len(self.vocab), self.hidden_size)

    def _init_added_embeddings(self, n_added):
        # 마커 토큰 임베딩은 무작위 초기화
        embeddings = self.model.get_input_embeddings().weight
        std = getattr(self.model.config, 'initializer_range', 0.02)
        with torch.no_grad():
            embeddings[-n_added:].normal_(mean=0.0, std=std)

    def describe(self):
        return {'kind': 'masked-lm', 'model_name': self.model_name, 'max_length': self.max_length}

    def _encode_words(self, words):
        if not words:
            return []
        return self.tokenizer(list(words), is_split_into_words=True, add_special_tokens=False)['input_ids']

    def _prompt_ids(self, prompt):
        n_head = prompt.mask_position - prompt.body_length
        suffix = prompt.suffix
        head_ids = self._encode_words(suffix[:n_head])
        tail_ids = self._encode_words(suffix[n_head + 1:])
        suffix_ids = head_ids + [self.tokenizer.mask_token_id] + tail_ids
        budget = self.max_length - 2 - len(suffix_ids)  # [CLS], [SEP]
        if budget < 0:
            raise PromptTooLongError(prompt.instance_id, len(suffix_ids) + 2, self.max_length)
        body_ids = self._encode_words(prompt.body)[:budget]
        ids = [self.tokenizer.cls_token_id] + body_ids + suffix_ids + [self.tokenizer.sep_token_id]
        return ids, 1 + len(body_ids) + len(head_ids)

    def forward_prompts(self, prompts):
        encoded = [self._prompt_ids(p) for p in prompts]
        width = max(len(ids) for ids, _ in encoded)
        pad = self.tokenizer.pad_token_id
        input_ids = torch.full((len(encoded), width), pad, dtype=torch.long)
        attention = torch.zeros((len(encoded), width), dtype=torch.long)
        for row, (ids, _) in enumerate(encoded):
            input_ids[row, :len(ids)] = torch.tensor(ids)
            attention[row, :len(ids)] = 1
        mask_positions = torch.tensor([pos for _, pos in encoded])

        device = self.device
        out = self.model(
            input_ids=input_ids.to(device),
            attention_mask=attention.to(device),
            output_hidden_states=True,
        )
        rows = torch.arange(len(encoded), device=device)
        mask_positions = mask_positions.to(device)
        hidden = out.hidden_states[-1][rows, mask_positions]
        logits = out.logits[rows, mask_positions]
        return hidden, logits


def build_backend(kind, checkpoint='bert-base-uncased', mock_table_path=None, max_length=128, device='cpu'):
    if kind == 'masked-lm':
        return MaskedLMBackend(checkpoint, max_length=max_length, device=device)
    if kind == 'mock':
        from reldisco.encoder.mock import MockBackend

        if not mock_table_path:
            raise ConfigError('mock backend needs MOCK_TABLE_PATH')
        return MockBackend.from_table_file(mock_table_path, max_length=max_length).to(device)
    raise ConfigError(f'unknown backend {kind!r}; expected masked-lm or mock')


def backend_from_description(description, device='cpu'):
    """describe() 결과로 백엔드를 다시 만든다 (파라미터는 state_dict 로 따로 복원)."""
    kind = description.get('kind')
    if kind == 'masked-lm':
        return MaskedLMBackend(description['model_name'], max_length=description['max_length'], device=device)
    if kind == 'mock':
        from reldisco.encoder.mock import MockBackend

        return MockBackend.from_description(description).to(device)
    raise ConfigError(f'cannot rebuild backend of kind {kind!r}')

import hashlib
from pathlib import Path

import numpy as np
import torch
from torch import nn

from reldisco.encoder.backends import EncoderBackend
from reldisco.encoder.prompts import truncate_prompt
from reldisco.errors import ConfigError
from reldisco.models import MARKER_TOKENS, MASK

_SKIP = frozenset(MARKER_TOKENS) | {MASK}


class MockBackend(EncoderBackend):
    """CPU 테스트용 결정적 백엔드.

    토큰 -> 고정 벡터 조회표(관계별 평균 벡터, 그 외 토큰은 해시 시드 잡음)의 합을
    학습 가능한 선형 사상에 통과시켜 hidden 을 만들고, 어휘 임베딩과의 내적으로 logits 를 만든다.
    """

    def __init__(self, table, vocab=None, noise_scale=0.05, logit_scale=1.0, max_length=128, seed=0,
                 dtype=torch.float32):
        super().__init__()
        if not table:
            raise ConfigError('mock backend needs a non-empty token table')
        self.table = {str(k).lower(): np.asarray(v, dtype=np.float64) for k, v in table.items()}
        dims = {v.shape[0] for v in self.table.values()}
        if len(dims) != 1:
            raise ConfigError(f'mock table vectors have mixed widths {sorted(dims)}')
        self.hidden_size = dims.pop()
        self.vocab = tuple(vocab) if vocab is not None else tuple(sorted(self.table))
        self.noise_scale = noise_scale
        self.logit_scale = logit_scale
        self.max_length = max_length
        self.seed = seed
        self.dtype = dtype
        self._cache = {}

        self.projection = nn.Linear(self.hidden_size, self.hidden_size, dtype=dtype)
        with torch.no_grad():
            self.projection.weight.copy_(torch.eye(self.hidden_size, dtype=dtype))
            self.projection.bias.zero_()
        out = np.stack([self.token_vector(w) for w in self.vocab])
        out = out / np.maximum(np.linalg.norm(out, axis=1, keepdims=True), 1e-12)
        self.output_embedding = nn.Parameter(torch.tensor(out, dtype=dtype))

    def token_vector(self, token):
        key = token.lower()
        if key not in self._cache:
            if key in self.table:
                vec = self.table[key]
            else:
                digest = hashlib.sha256(f'{self.seed}/{key}'.encode('utf-8')).digest()
                rng = np.random.default_rng(int.from_bytes(digest[:8], 'little'))
                vec = rng.normal(scale=self.noise_scale, size=self.hidden_size)
            self._cache[key] = vec
        return self._cache[key]

    def features(self, prompt):
        prompt = truncate_prompt(prompt, self.max_length)
        vecs = [self.token_vector(t) for t in prompt.tokens if t not in _SKIP]
        if not vecs:
            return np.zeros(self.hidden_size)
        return np.sum(vecs, axis=0)

    def forward_prompts(self, prompts):
        feats = torch.tensor(np.stack([self.features(p) for p in prompts]), dtype=self.dtype,
                             device=self.output_embedding.device)
        hidden = self.projection(feats)
        logits = self.logit_scale * hidden @ self.output_embedding.T
        return hidden, logits

    def describe(self):
        return {
            'kind': 'mock',
            'table': {k: v.tolist() for k, v in self.table.items()},
            'vocab': list(self.vocab),
            'noise_scale': self.noise_scale,
            'logit_scale': self.logit_scale,
            'max_length': self.max_length,
            'seed': self.seed,
        }

    @classmethod
    def from_description(cls, description):
        return cls(
            description['table'],
            vocab=description['vocab'],
            noise_scale=description['noise_scale'],
            logit_scale=description['logit_scale'],
            max_length=description['max_length'],
            seed=description['seed'],
        )

    @classmethod
    def from_table_file(cls, path, **kwargs):
        table, vocab = read_mock_table(path)
        return cls(table, vocab=vocab, **kwargs)


def read_mock_table(path):
    """relation<TAB>trigger1|trigger2<TAB>v1 v2 ... -> (토큰 표, 어휘).

    관계 이름과 트리거 단어 모두 그 관계의 평균 벡터에 대응한다.
    """
    table, vocab = {}, []
    with Path(path).open(encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip('\n')
            if not line:
                continue
            parts = line.split('\t')
            if len(parts) != 3:
                raise ConfigError(f'{path}:{lineno}: expected relation<TAB>triggers<TAB>vector')
            relation, triggers, vector = parts
            mean = np.array([float(x) for x in vector.split()])
            for word in [relation] + [t for t in triggers.split('|') if t]:
                key = word.lower()
                if key not in table:
                    vocab.append(key)
                table[key] = mean
    return table, vocab


def write_mock_table(path, relation_table):
    """relation_table: relation -> (triggers, mean vector)."""
    lines = []
    for relation in sorted(relation_table):
        triggers, mean = relation_table[relation]
        vector = ' '.join(f'{x:.8f}' for x in np.asarray(mean))
        lines.append(f'{relation}\t{"|".join(triggers)}\t{vector}')
    Path(path).write_text('\n'.join(lines) + '\n', encoding='utf-8')

import dataclasses
import typing
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from reldisco.collab.train_config import TrainConfig
from reldisco.errors import ConfigError

_TRUE = {'1', 'true', 'yes', 'on'}
_FALSE = {'0', 'false', 'no', 'off'}


@dataclass
class ExperimentConfig:
    seed: int = 42
    log_level: str = 'INFO'
    output_dir: str = 'runs/default'

    dataset_path: Optional[str] = None
    dataset_format: str = 'fewrel-json'
    pos_sidecar_path: Optional[str] = None
    entity_lexicon_path: Optional[str] = None
    synonym_lexicon_path: Optional[str] = None
    relation_descriptions_path: Optional[str] = None
    novel_ratio: float = 0.2
    context_ratio: float = 0.05
    test_count: Optional[int] = None
    unlabeled_count: Optional[int] = None
    labeled_count: Optional[int] = None

    backend: str = 'masked-lm'
    backend_checkpoint: str = 'bert-base-uncased'
    mock_table_path: Optional[str] = None
    max_length: int = 128
    top_k_vocab: int = 2048
    device: str = 'cpu'

    known_k: bool = True
    k_init: int = 160
    kmeans_n_init: int = 10

    tau1: float = 0.05
    tau2: float = 0.1
    theta: float = 0.7
    learning_rate: float = 1e-4
    max_epochs: int = 100
    patience: int = 10
    warmup_epochs: int = 5
    batch_size: int = 32
    eval_batch_size: int = 128
    semantic_weight: float = 1.0
    consistency_weight: float = 1.0
    entropy_weight: float = 1.0
    supervised_weight: float = 1.0
    exclude_self: bool = False

    views: str = '1,2,3'
    use_contrastive: bool = True
    align_mode: str = 'anchor'
    use_selection: bool = True

    top_words: int = 3
    n_jobs: int = 1

    def __post_init__(self):
        hints = typing.get_type_hints(type(self))
        for f in dataclasses.fields(self):
            setattr(self, f.name, _coerce(f.name, getattr(self, f.name), hints[f.name]))
        self.validate()

    @classmethod
    def field_names(cls):
        return [f.name for f in dataclasses.fields(cls)]

    @classmethod
    def from_mapping(cls, values):
        unknown = sorted(set(values) - set(cls.field_names()))
        if unknown:
            raise ConfigError(f'unknown config keys: {", ".join(unknown)}')
        return cls(**values)

    def validate(self):
        if not 0.0 <= self.novel_ratio < 1.0:
            raise ConfigError(f'NOVEL_RATIO must be in [0, 1), got {self.novel_ratio}')
        if not 0.0 < self.context_ratio <= 1.0:
            raise ConfigError(f'CONTEXT_RATIO must be in (0, 1], got {self.context_ratio}')
        if self.backend not in ('masked-lm', 'mock'):
            raise ConfigError(f'BACKEND must be masked-lm or mock, got {self.backend!r}')
        if self.max_length < 8:
            raise ConfigError(f'MAX_LENGTH too small: {self.max_length}')
        if self.k_init < 1 or self.top_words < 1:
            raise ConfigError('K_INIT and TOP_WORDS must be >= 1')
        counts = (self.test_count, self.unlabeled_count, self.labeled_count)
        if any(c is not None for c in counts) and not all(c is not None and c >= 0 for c in counts):
            raise ConfigError('TEST_COUNT, UNLABELED_COUNT and LABELED_COUNT must be given together')
        self.train_config()

    def view_list(self):
        try:
            return tuple(int(v) for v in str(self.views).split(',') if v.strip())
        except ValueError:
            raise ConfigError(f'VIEWS must be a comma-separated list of 1, 2, 3, got {self.views!r}')

    def train_config(self):
        return TrainConfig(
            tau1=self.tau1,
            tau2=self.tau2,
            theta=self.theta,
            learning_rate=self.learning_rate,
            max_epochs=self.max_epochs,
            patience=self.patience,
            warmup_epochs=self.warmup_epochs,
            batch_size=self.batch_size,
            eval_batch_size=self.eval_batch_size,
            seed=self.seed,
            semantic_weight=self.semantic_weight,
            consistency_weight=self.consistency_weight,
            entropy_weight=self.entropy_weight,
            supervised_weight=self.supervised_weight,
            exclude_self=self.exclude_self,
            top_k_vocab=self.top_k_vocab,
            kmeans_n_init=self.kmeans_n_init,
            views=self.view_list(),
            use_contrastive=self.use_contrastive,
            align_mode=self.align_mode,
            use_selection=self.use_selection,
        )

    def require_paths(self, *names):
        """명령 시작 시 필요한 경로 설정이 있고 실제로 존재하는지 확인."""
        problems = []
        for name in names:
            value = getattr(self, name)
            if not value:
                problems.append(f'{name.upper()} is not set')
            elif not Path(value).exists():
                problems.append(f'{name.upper()} does not exist: {value}')
        if problems:
            raise ConfigError('; '.join(problems))

    @property
    def out(self):
        return Path(self.output_dir)


def _coerce(name, value, hint):
    origin = typing.get_origin(hint)
    optional = origin is typing.Union and type(None) in typing.get_args(hint)
    if optional:
        hint = next(a for a in typing.get_args(hint) if a is not type(None))
        if value is None or (isinstance(value, str) and value.strip().lower() in ('', 'none', 'null')):
            return None
    if value is None:
        raise ConfigError(f'{name.upper()} must not be empty')
    try:
        if hint is bool:
            if isinstance(value, bool):
                return value
            text = str(value).strip().lower()
            if text in _TRUE:
                return True
            if text in _FALSE:
                return False
            raise ValueError(value)
        if hint is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if hint is float:
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f'{name.upper()}: cannot read {value!r} as {hint.__name__}')

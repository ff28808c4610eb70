from dataclasses import asdict, dataclass, field

from reldisco.errors import ConfigError

ALIGN_MODES = ('anchor', 'self')


@dataclass
class TrainConfig:
    tau1: float = 0.05
    tau2: float = 0.1
    theta: float = 0.7
    learning_rate: float = 1e-4
    max_epochs: int = 100
    patience: int = 10
    warmup_epochs: int = 5
    batch_size: int = 32
    eval_batch_size: int = 128
    seed: int = 42
    semantic_weight: float = 1.0
    consistency_weight: float = 1.0
    entropy_weight: float = 1.0
    supervised_weight: float = 1.0
    exclude_self: bool = False
    top_k_vocab: int = 2048
    kmeans_n_init: int = 10
    # 변형 실험
    views: tuple = field(default=(1, 2, 3))
    use_contrastive: bool = True
    align_mode: str = 'anchor'
    use_selection: bool = True

    def __post_init__(self):
        self.views = tuple(sorted({int(v) for v in self.views}))
        self.validate()

    def validate(self):
        if self.tau1 <= 0 or self.tau2 <= 0:
            raise ConfigError(f'temperatures must be positive (tau1={self.tau1}, tau2={self.tau2})')
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError(f'theta must be in [0, 1], got {self.theta}')
        if self.learning_rate <= 0:
            raise ConfigError(f'learning rate must be positive, got {self.learning_rate}')
        for name in ('max_epochs', 'batch_size', 'eval_batch_size', 'kmeans_n_init'):
            if getattr(self, name) < 1:
                raise ConfigError(f'{name} must be >= 1, got {getattr(self, name)}')
        for name in ('patience', 'warmup_epochs'):
            if getattr(self, name) < 0:
                raise ConfigError(f'{name} must be >= 0, got {getattr(self, name)}')
        if not self.views or 1 not in self.views or not set(self.views) <= {1, 2, 3}:
            raise ConfigError(f'views must be a subset of 1,2,3 containing the main view, got {self.views}')
        if self.align_mode not in ALIGN_MODES:
            raise ConfigError(f'align_mode must be one of {ALIGN_MODES}, got {self.align_mode!r}')
        if self.top_k_vocab is not None and self.top_k_vocab < 1:
            raise ConfigError(f'top_k_vocab must be >= 1, got {self.top_k_vocab}')

    @property
    def contrastive_active(self):
        return self.use_contrastive and len(self.views) >= 2

    def to_dict(self):
        record = asdict(self)
        record['views'] = list(self.views)
        return record

    @classmethod
    def from_dict(cls, record):
        return cls(**record)

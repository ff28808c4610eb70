import os
from pathlib import Path


class Config:
    SEED = 42
    LOG_LEVEL = 'INFO'
    OUTPUT_DIR = os.environ.get('RELDISCO_OUTPUT_DIR') or str(Path(__file__).parent / 'runs' / 'default')

    # 데이터셋 / 분할
    DATASET_PATH = None
    DATASET_FORMAT = 'fewrel-json'
    POS_SIDECAR_PATH = None
    ENTITY_LEXICON_PATH = None
    SYNONYM_LEXICON_PATH = None
    RELATION_DESCRIPTIONS_PATH = None
    NOVEL_RATIO = 0.2
    CONTEXT_RATIO = 0.05

    # 인코더
    BACKEND = 'masked-lm'
    BACKEND_CHECKPOINT = 'bert-base-uncased'
    MOCK_TABLE_PATH = None
    MAX_LENGTH = 128
    TOP_K_VOCAB = 2048
    DEVICE = 'cpu'

    # 관계 수 (KNOWN_K=False 이면 K_INIT 으로 추정)
    KNOWN_K = True
    K_INIT = 160
    KMEANS_N_INIT = 10

    # 학습 하이퍼파라미터
    TAU1 = 0.05
    TAU2 = 0.1
    THETA = 0.7
    LEARNING_RATE = 1e-4
    MAX_EPOCHS = 100
    PATIENCE = 10
    WARMUP_EPOCHS = 5
    BATCH_SIZE = 32
    EVAL_BATCH_SIZE = 128
    SEMANTIC_WEIGHT = 1.0
    CONSISTENCY_WEIGHT = 1.0
    ENTROPY_WEIGHT = 1.0
    SUPERVISED_WEIGHT = 1.0
    EXCLUDE_SELF = False

    # 변형 실험 스위치
    VIEWS = '1,2,3'
    USE_CONTRASTIVE = True
    ALIGN_MODE = 'anchor'
    USE_SELECTION = True

    # 관계별 분할 크기 (셋 다 주면 데이터셋 기본 규칙 대신 사용)
    TEST_COUNT = None
    UNLABELED_COUNT = None
    LABELED_COUNT = None

    TOP_WORDS = 3
    N_JOBS = 1


class DevelopmentConfig(Config):
    LOG_LEVEL = 'DEBUG'
    BACKEND = 'mock'
    BATCH_SIZE = 16
    LEARNING_RATE = 1e-3


class ProductionConfig(Config):
    BACKEND = 'masked-lm'
    DEVICE = os.environ.get('RELDISCO_DEVICE') or 'cuda'


class TestingConfig(Config):
    LOG_LEVEL = 'WARNING'
    BACKEND = 'mock'
    MAX_EPOCHS = 3
    PATIENCE = 2
    WARMUP_EPOCHS = 1
    BATCH_SIZE = 16
    KMEANS_N_INIT = 3
    LEARNING_RATE = 1e-3


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}

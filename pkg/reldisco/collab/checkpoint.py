import logging
from pathlib import Path

import torch

from reldisco.errors import CheckpointError

logger = logging.getLogger(__name__)

BEST = 'checkpoint.pt'
LAST = 'last.pt'
DIVERGED = 'diverged.pt'

REQUIRED_KEYS = ('backend', 'backend_state', 'classifier_state', 'n_heads', 'head_to_relation', 'train_config')


def save_checkpoint(path, bundle):
    """{backend 설정/파라미터, 분류기, centroid, head->관계, 설정, 지표} 를 하나의 파일로."""
    missing = [k for k in REQUIRED_KEYS if k not in bundle]
    if missing:
        raise CheckpointError(f'checkpoint bundle missing {missing}')
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + '.tmp')
    torch.save(bundle, tmp)
    tmp.replace(path)
    logger.debug('saved checkpoint %s (epoch %s)', path, bundle.get('epoch'))
    return path


def load_checkpoint(path, map_location='cpu'):
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f'checkpoint not found: {path}')
    try:
        bundle = torch.load(path, map_location=map_location, weights_only=False)
    except Exception as exc:
        raise CheckpointError(f'cannot read checkpoint {path}: {exc}') from exc
    missing = [k for k in REQUIRED_KEYS if k not in bundle]
    if missing:
        raise CheckpointError(f'{path} is missing {missing}')
    return bundle

import logging
import os

from dotenv import dotenv_values

from config import config
from reldisco.errors import ConfigError, ReldiscoError
from reldisco.experiment import ExperimentConfig
from reldisco.log import configure_logging

logger = logging.getLogger(__name__)


def _class_values(config_class):
    names = set(ExperimentConfig.field_names())
    return {
        key.lower(): getattr(config_class, key)
        for key in dir(config_class)
        if key.isupper() and key.lower() in names
    }


def create_experiment(config_name=None, config_file=None, **overrides):
    """설정 클래스 -> KEY=VALUE 파일 -> RELDISCO_OUTPUT_DIR -> 명령행 플래그 순으로 덮어쓴다."""
    config_name = config_name or os.getenv('RELDISCO_CONFIG') or 'default'
    if config_name not in config:
        raise ConfigError(f'unknown config {config_name!r}; expected one of {sorted(config)}')
    values = _class_values(config[config_name])

    if config_file:
        if not os.path.isfile(config_file):
            raise ConfigError(f'config file not found: {config_file}')
        for key, value in dotenv_values(config_file).items():
            values[key.lower()] = value

    env_output = os.getenv('RELDISCO_OUTPUT_DIR')
    if env_output:
        values['output_dir'] = env_output

    values.update({k: v for k, v in overrides.items() if v is not None})
    experiment = ExperimentConfig.from_mapping(values)
    configure_logging(experiment.log_level)
    logger.debug('experiment config %s: %s', config_name, experiment)
    return experiment


__all__ = ['ExperimentConfig', 'ReldiscoError', 'create_experiment']

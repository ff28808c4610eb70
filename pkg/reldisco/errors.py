class ReldiscoError(Exception):
    """파이프라인 전체에서 쓰는 최상위 예외."""


class ConfigError(ReldiscoError):
    pass


class DatasetFormatError(ReldiscoError):
    def __init__(self, record_index, field, detail=''):
        self.record_index = record_index
        self.field = field
        message = f'record {record_index}: bad field {field!r}'
        if detail:
            message = f'{message} ({detail})'
        super().__init__(message)


class SpanError(ReldiscoError):
    def __init__(self, instance_id, detail):
        self.instance_id = instance_id
        super().__init__(f'instance {instance_id}: {detail}')


class SplitError(ReldiscoError):
    pass


class LexiconError(ReldiscoError):
    pass


class PromptTooLongError(ReldiscoError):
    def __init__(self, instance_id, length, max_length):
        self.instance_id = instance_id
        super().__init__(
            f'instance {instance_id}: prompt suffix needs {length} positions, backend allows {max_length}'
        )


class ClusteringError(ReldiscoError):
    pass


class AlignmentError(ReldiscoError):
    pass


class EvaluationError(ReldiscoError):
    pass


class CheckpointError(ReldiscoError):
    pass


class TrainingDivergedError(ReldiscoError):
    def __init__(self, epoch, phase, checkpoint_path):
        self.epoch = epoch
        self.phase = phase
        self.checkpoint_path = checkpoint_path
        super().__init__(
            f'non-finite loss in {phase} phase at epoch {epoch}; diagnostic checkpoint: {checkpoint_path}'
        )

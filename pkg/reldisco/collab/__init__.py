from .alignment import AlignmentResult, align, align_view, apply_alignment, build_cost_matrix, reindex_probabilities
from .checkpoint import load_checkpoint, save_checkpoint
from .inference import Prediction, Predictor, encode_views, infer, infer_label
from .losses import decision_targets, supervised_loss
from .selection import LabelDecision, abandoned_fraction, select_label_arrays, select_labels
from .train_config import TrainConfig
from .trainer import EarlyStopper, Trainer, TrainingData, TrainResult, resolve_head_count, train

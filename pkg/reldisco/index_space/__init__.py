from .classifier import RelationClassifier, anchor_labels, classify
from .losses import consistency_loss, marginal_entropy

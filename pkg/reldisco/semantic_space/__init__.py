from .clustering import Centroids, estimate_relation_count, fit_centroids, hard_label, soft_assign
from .losses import multi_view_contrastive, self_contrastive_loss
from .words import top_relational_words

from .metrics import (
    SPLITS,
    MetricReport,
    ari,
    clustering_accuracy,
    evaluate_predictions,
    hungarian_mapping,
    nmi,
    partition_metrics,
)
from .reports import average_reports, cluster_word_report, load_report, relation_word_report, write_reports
from .semantic import (
    describe_relation,
    ground_truth_distribution,
    load_relation_descriptions,
    novel_semantic_scores,
    semantic_similarity,
    template_prompt,
)

from .loaders import attach_pos_tags, instance_from_record, load_dataset, load_pos_sidecar, write_fewrel_json
from .splits import (
    FEWREL_POLICY,
    POLICIES,
    TACRED_POLICY,
    SizingPolicy,
    build_splits,
    drop_no_relation,
    novel_relation_count,
    read_manifest,
    write_manifest,
)
from .synthetic import make_synthetic_corpus, write_synthetic_corpus

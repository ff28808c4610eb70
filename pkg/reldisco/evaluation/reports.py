import json
import logging
from collections import Counter
from pathlib import Path

import pandas as pd

from reldisco.errors import EvaluationError
from reldisco.evaluation.metrics import MetricReport
from reldisco.semantic_space.words import top_relational_words

logger = logging.getLogger(__name__)

REPORT_JSON = 'report.json'
METRICS_TSV = 'metrics.tsv'
CLUSTER_WORDS_TSV = 'cluster_words.tsv'
RELATION_WORDS_TSV = 'relation_words.tsv'


def _top_words(dists, vocab, k):
    return [top_relational_words(dists[i], vocab, k) for i in range(dists.shape[0])]


def cluster_word_report(labels, dists, vocab, k=3):
    """클러스터별로 인스턴스 상위 k 단어에 나온 횟수 (cluster_id, word, frequency)."""
    frame = pd.DataFrame({'cluster_id': [int(x) for x in labels], 'word': _top_words(dists, vocab, k)})
    frame = frame.explode('word')
    counts = frame.groupby(['cluster_id', 'word']).size().reset_index(name='frequency')
    return counts.sort_values(['cluster_id', 'frequency', 'word'], ascending=[True, False, True],
                              ignore_index=True)


def relation_word_report(relations, dists, vocab, k=3):
    """관계별 가장 자주 나온 상위 k 단어 (relation, words)."""
    rows = []
    frame = pd.DataFrame({'relation': list(relations), 'word': _top_words(dists, vocab, k)})
    for relation, group in frame.groupby('relation', sort=True):
        counter = Counter(w for words in group['word'] for w in words)
        top = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
        rows.append({'relation': relation, 'words': ','.join(w for w, _ in top)})
    return pd.DataFrame(rows, columns=['relation', 'words'])


def write_reports(out_dir, report, cluster_words=None, relation_words=None, extra=None):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    record = report.to_dict()
    if extra:
        record.update(extra)
    (out_dir / REPORT_JSON).write_text(json.dumps(record, ensure_ascii=False, indent=2, sort_keys=True),
                                       encoding='utf-8')
    pd.DataFrame([report.flat()]).to_csv(out_dir / METRICS_TSV, sep='\t', index=False)
    if cluster_words is not None:
        cluster_words.to_csv(out_dir / CLUSTER_WORDS_TSV, sep='\t', index=False)
    if relation_words is not None:
        relation_words.to_csv(out_dir / RELATION_WORDS_TSV, sep='\t', index=False, header=False)
    logger.info('wrote evaluation reports to %s', out_dir)
    return out_dir / REPORT_JSON


def load_report(path):
    record = json.loads(Path(path).read_text(encoding='utf-8'))
    fields = MetricReport.__dataclass_fields__
    return MetricReport.from_dict({k: v for k, v in record.items() if k in fields})


def average_reports(paths):
    """여러 시드의 report.json -> 지표별 mean / std 표."""
    if not paths:
        raise EvaluationError('no reports to average')
    frame = pd.DataFrame([load_report(p).flat() for p in paths]).astype(float)
    summary = frame.agg(['mean', 'std']).T.reset_index().rename(columns={'index': 'metric'})
    summary['runs'] = len(paths)
    return summary

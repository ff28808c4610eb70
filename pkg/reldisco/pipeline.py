"""명령별 실행 흐름 (prepare / train / evaluate / predict / estimate-k)."""
import json
import logging
from pathlib import Path

from reldisco.collab import checkpoint as ckpt
from reldisco.collab.inference import Predictor, encode_views, infer_label, prompt_rows
from reldisco.collab.trainer import TrainingData, resolve_head_count, train
from reldisco.corpus.loaders import attach_pos_tags, instance_from_record, load_dataset, load_pos_sidecar
from reldisco.corpus.splits import POLICIES, SizingPolicy, build_splits, drop_no_relation, read_manifest, write_manifest
from reldisco.encoder.backends import backend_from_description, build_backend
from reldisco.errors import ReldiscoError
from reldisco.evaluation.metrics import evaluate_predictions
from reldisco.evaluation.reports import cluster_word_report, relation_word_report, write_reports
from reldisco.evaluation.semantic import load_relation_descriptions, novel_semantic_scores
from reldisco.semantic_space.clustering import estimate_relation_count
from reldisco.semifactual.lexicons import EntityTypeLexicon, SynonymLexicon
from reldisco.semifactual.views import PosTagger, generate_tri_views, read_tri_views, write_tri_views

logger = logging.getLogger(__name__)

MANIFEST = 'splits.manifest'
VIEWS = 'views.jsonl'


def sizing_policy(exp):
    if exp.test_count is not None:
        return SizingPolicy(kind='per_relation', test_count=exp.test_count,
                            unlabeled_count=exp.unlabeled_count, labeled_count=exp.labeled_count)
    return POLICIES[exp.dataset_format]


def load_corpus(exp):
    exp.require_paths('dataset_path')
    instances = load_dataset(exp.dataset_path, exp.dataset_format)
    if exp.pos_sidecar_path:
        exp.require_paths('pos_sidecar_path')
        instances = attach_pos_tags(instances, load_pos_sidecar(exp.pos_sidecar_path))
    if exp.dataset_format == 'tacred-json':
        instances = drop_no_relation(instances)
    return instances


def load_lexicons(exp):
    exp.require_paths('entity_lexicon_path', 'synonym_lexicon_path')
    return EntityTypeLexicon.load(exp.entity_lexicon_path), SynonymLexicon.load(exp.synonym_lexicon_path)


def run_prepare(exp):
    """분할 manifest 와 tri-view 캐시를 출력 디렉터리에 쓴다. 같은 설정이면 같은 파일."""
    entity_lexicon, synonym_lexicon = load_lexicons(exp)
    instances = load_corpus(exp)
    spec = build_splits(instances, exp.novel_ratio, sizing_policy(exp), seed=exp.seed)

    out = exp.out
    write_manifest(out / MANIFEST, spec)
    needed = spec.labeled_ids | spec.unlabeled_ids | spec.test_ids
    triviews = generate_tri_views(
        [inst for inst in instances if inst.instance_id in needed],
        entity_lexicon, synonym_lexicon, PosTagger(),
        seed=exp.seed, context_ratio=exp.context_ratio, n_jobs=exp.n_jobs,
    )
    write_tri_views(out / VIEWS, triviews)
    logger.info('prepared %d tri-views under %s', len(triviews), out)
    return spec


def load_prepared(exp):
    out = exp.out
    for name in (MANIFEST, VIEWS):
        if not (out / name).is_file():
            raise ReldiscoError(f'{out / name} not found; run prepare first')
    instances = load_corpus(exp)
    spec = read_manifest(out / MANIFEST)
    return TrainingData.from_split(instances, spec, read_tri_views(out / VIEWS))


def experiment_backend(exp):
    if exp.backend == 'mock':
        exp.require_paths('mock_table_path')
    return build_backend(exp.backend, exp.backend_checkpoint, exp.mock_table_path, exp.max_length, exp.device)


def run_train(exp, resume=False, show_progress=True):
    data = load_prepared(exp)
    backend = experiment_backend(exp)
    train_config = exp.train_config()
    if resume:
        n_heads = ckpt.load_checkpoint(exp.out / ckpt.LAST)['n_heads']
    else:
        n_heads = resolve_head_count(data, backend, train_config, known_k=exp.known_k, k_init=exp.k_init)
    return train(data, backend, train_config, exp.out, n_heads=n_heads, resume=resume,
                 show_progress=show_progress)


def run_estimate_k(exp):
    data = load_prepared(exp)
    backend = experiment_backend(exp)
    rows = prompt_rows(data.views_of(data.unlabeled), views=(1,))
    _, dists, _ = encode_views(rows, backend, None, exp.eval_batch_size, top_k=exp.top_k_vocab)
    return estimate_relation_count(dists[0], min(exp.k_init, len(rows)), seed=exp.seed, n_init=exp.kmeans_n_init)


def run_evaluate(exp, checkpoint_path=None, report_dir=None):
    """test 분할 Pre / Nov / All 지표, novel 관계 COS / KL, 단어 보고서."""
    checkpoint_path = Path(checkpoint_path or exp.out / ckpt.BEST)
    bundle = ckpt.load_checkpoint(checkpoint_path, map_location=exp.device)
    predictor = Predictor.from_checkpoint(bundle, device=exp.device)
    data = load_prepared(exp)

    # Task 1: test 분할 예측과 구간별 지표
    rows = prompt_rows(data.views_of(data.test), predictor.views)
    _, dists, z = encode_views(rows, predictor.backend, predictor.classifier, exp.eval_batch_size,
                               top_k=exp.top_k_vocab)
    pred = infer_label(z)
    gold = [inst.relation for inst in data.test]
    report = evaluate_predictions(pred, gold, data.split.predefined_relations, data.split.novel_relations)

    # Task 2: novel 관계 의미 점수. 정답 분포는 미세조정 전 백엔드로
    pretrained = backend_from_description(bundle['backend'], device=exp.device)
    descriptions = {}
    if exp.relation_descriptions_path:
        exp.require_paths('relation_descriptions_path')
        descriptions = load_relation_descriptions(exp.relation_descriptions_path)
    main_dists = dists[0]
    report.cos_by_relation, report.kl_by_relation, report.cos, report.kl = novel_semantic_scores(
        main_dists, gold, data.split.novel_relations, pretrained, descriptions,
    )

    # Task 3: 보고서 파일
    vocab = predictor.backend.vocab
    write_reports(
        report_dir or exp.out, report,
        cluster_words=cluster_word_report(pred, main_dists, vocab, exp.top_words),
        relation_words=relation_word_report(gold, main_dists, vocab, exp.top_words),
        extra={'checkpoint': str(checkpoint_path), 'epoch': bundle.get('epoch')},
    )
    return report


def run_predict(exp, input_path, output_path, checkpoint_path=None):
    """JSON lines 입력 한 줄마다 결과 한 줄. 잘못된 줄은 error 로 기록하고 계속한다.

    Returns: 실패한 줄 수
    """
    checkpoint_path = Path(checkpoint_path or exp.out / ckpt.BEST)
    # 사전은 선택이지만 준 경로는 있어야 한다
    exp.require_paths(*[name for name in ('entity_lexicon_path', 'synonym_lexicon_path') if getattr(exp, name)])
    entity_lexicon = EntityTypeLexicon.load(exp.entity_lexicon_path) if exp.entity_lexicon_path else None
    synonym_lexicon = SynonymLexicon.load(exp.synonym_lexicon_path) if exp.synonym_lexicon_path else None
    predictor = Predictor.from_checkpoint(
        checkpoint_path, device=exp.device, entity_lexicon=entity_lexicon, synonym_lexicon=synonym_lexicon,
        context_ratio=exp.context_ratio, top_k_words=exp.top_words, batch_size=exp.eval_batch_size,
    )

    results, failures = [], 0
    lines = Path(input_path).read_text(encoding='utf-8').splitlines()
    for index, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            instance = instance_from_record(json.loads(line), index, default_id=f'line{index + 1}')
            prediction = predictor.predict([instance])[0]
            results.append({
                'line': index + 1,
                'id': prediction.instance_id,
                'label': prediction.label,
                'relation': prediction.relation,
                'words': list(prediction.words),
                'confidence': prediction.confidence,
            })
        except (ValueError, ReldiscoError) as exc:
            failures += 1
            logger.warning('line %d: %s', index + 1, exc)
            results.append({'line': index + 1, 'error': str(exc)})

    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(''.join(json.dumps(r, ensure_ascii=False) + '\n' for r in results), encoding='utf-8')
    logger.info('predicted %d rows (%d failed) -> %s', len(results), failures, output_path)
    return failures

import functools
import logging

import click

from reldisco import create_experiment
from reldisco.errors import ReldiscoError

logger = logging.getLogger(__name__)


def _handle_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ReldiscoError as exc:
            raise click.ClickException(str(exc)) from exc
    return wrapper


def experiment_options(f):
    """실험 설정 플래그. 나머지 필드는 --set KEY=VALUE 로."""
    options = [
        click.option('--dataset', 'dataset_path', help='데이터셋 파일'),
        click.option('--format', 'dataset_format', type=click.Choice(['fewrel-json', 'tacred-json'])),
        click.option('--output-dir', help='산출물 디렉터리'),
        click.option('--seed', type=int),
        click.option('--novel-ratio', type=float),
        click.option('--backend', type=click.Choice(['masked-lm', 'mock'])),
        click.option('--backend-checkpoint'),
        click.option('--mock-table', 'mock_table_path'),
        click.option('--entity-lexicon', 'entity_lexicon_path'),
        click.option('--synonym-lexicon', 'synonym_lexicon_path'),
        click.option('--pos-sidecar', 'pos_sidecar_path'),
        click.option('--descriptions', 'relation_descriptions_path'),
        click.option('--device'),
        click.option('--known-k/--estimate-k', 'known_k', default=None),
        click.option('--max-epochs', type=int),
        click.option('--learning-rate', type=float),
        click.option('--set', 'extra', multiple=True, metavar='KEY=VALUE', help='임의 설정값 덮어쓰기'),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _experiment(ctx, extra=(), **flags):
    overrides = dict(flags)
    for item in extra:
        key, sep, value = item.partition('=')
        if not sep:
            raise click.BadParameter(f'expected KEY=VALUE, got {item!r}', param_hint='--set')
        overrides[key.strip().lower()] = value
    return create_experiment(ctx.obj['config_name'], ctx.obj['config_file'], **overrides)


@click.group()
@click.option('--config', 'config_name', envvar='RELDISCO_CONFIG', default=None,
              help='설정 클래스 이름 (development / production / testing / default)')
@click.option('--config-file', type=click.Path(dir_okay=False), help='KEY=VALUE 설정 파일')
@click.pass_context
def cli(ctx, config_name, config_file):
    """관계 발견 실험 명령."""
    ctx.ensure_object(dict)
    ctx.obj['config_name'] = config_name
    ctx.obj['config_file'] = config_file


@cli.command()
@experiment_options
@click.pass_context
@_handle_errors
def prepare(ctx, **flags):
    """분할 manifest 와 tri-view 캐시 생성."""
    from reldisco.pipeline import run_prepare

    exp = _experiment(ctx, **flags)
    spec = run_prepare(exp)
    click.echo(f'{len(spec.predefined_relations)} pre-defined / {len(spec.novel_relations)} novel relations, '
               f'{len(spec.labeled_ids)} labeled, {len(spec.unlabeled_ids)} unlabeled, {len(spec.test_ids)} test')


@cli.command()
@experiment_options
@click.option('--resume', is_flag=True, help='last.pt 에서 이어서 학습')
@click.pass_context
@_handle_errors
def train(ctx, resume, **flags):
    """학습 (warm-up 후 에폭 루프)."""
    from reldisco.pipeline import run_train

    exp = _experiment(ctx, **flags)
    result = run_train(exp, resume=resume, show_progress=exp.log_level in ('DEBUG', 'INFO'))
    click.echo(f'best acc_all {result.best_score:.4f} at epoch {result.best_epoch} '
               f'({result.epochs_run} epochs) -> {result.checkpoint_path}')


@cli.command()
@experiment_options
@click.option('--checkpoint', type=click.Path(dir_okay=False), help='기본: OUTPUT_DIR/checkpoint.pt')
@click.option('--report-dir', type=click.Path(file_okay=False))
@click.pass_context
@_handle_errors
def evaluate(ctx, checkpoint, report_dir, **flags):
    """test 분할 지표와 단어 보고서."""
    from reldisco.pipeline import run_evaluate

    exp = _experiment(ctx, **flags)
    report = run_evaluate(exp, checkpoint, report_dir)
    for key, value in report.flat().items():
        click.echo(f'{key}\t{"n/a" if value is None else f"{value:.4f}"}')


@cli.command()
@experiment_options
@click.option('--input', 'input_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--output', 'output_path', required=True, type=click.Path(dir_okay=False))
@click.option('--checkpoint', type=click.Path(dir_okay=False))
@click.pass_context
@_handle_errors
def predict(ctx, input_path, output_path, checkpoint, **flags):
    """JSON lines 문장 -> 라벨과 관계 단어."""
    from reldisco.pipeline import run_predict

    exp = _experiment(ctx, **flags)
    failures = run_predict(exp, input_path, output_path, checkpoint)
    if failures:
        click.echo(f'{failures} rows failed; see {output_path}', err=True)
        ctx.exit(2)


@cli.command('estimate-k')
@experiment_options
@click.option('--k-init', type=int)
@click.pass_context
@_handle_errors
def estimate_k(ctx, k_init, **flags):
    """비라벨 데이터로 관계 수 추정."""
    from reldisco.pipeline import run_estimate_k

    exp = _experiment(ctx, k_init=k_init, **flags)
    click.echo(run_estimate_k(exp))


@cli.command('make-synthetic')
@click.argument('out_dir', type=click.Path(file_okay=False))
@click.option('--per-relation', default=280, show_default=True)
@click.option('--dim', default=16, show_default=True)
@click.option('--scale', default=4.0, show_default=True)
@click.option('--seed', default=0, show_default=True)
@_handle_errors
def make_synthetic(out_dir, per_relation, dim, scale, seed):
    """mock 백엔드용 합성 말뭉치와 사전 파일."""
    from reldisco.corpus.synthetic import write_synthetic_corpus

    paths = write_synthetic_corpus(out_dir, n_per_relation=per_relation, dim=dim, scale=scale, seed=seed)
    for name, path in paths.items():
        click.echo(f'{name}\t{path}')


@cli.command('build-synonyms')
@click.option('--dataset', 'dataset_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--format', 'dataset_format', default='fewrel-json',
              type=click.Choice(['fewrel-json', 'tacred-json']))
@click.option('--output', 'output_path', required=True, type=click.Path(dir_okay=False))
@_handle_errors
def build_synonyms(dataset_path, dataset_format, output_path):
    """데이터셋 단어의 WordNet 동의어 사전."""
    from reldisco.corpus.loaders import load_dataset
    from reldisco.semifactual.lexicons import build_synonym_lexicon
    from reldisco.semifactual.views import EXCLUDED_POS

    pairs = set()
    for inst in load_dataset(dataset_path, dataset_format):
        if inst.pos_tags is None:
            continue
        pairs.update((tok, tag) for tok, tag in zip(inst.tokens, inst.pos_tags) if tag not in EXCLUDED_POS)
    lexicon = build_synonym_lexicon(pairs)
    lexicon.write(output_path)
    click.echo(f'{len(lexicon)} entries -> {output_path}')


@cli.command()
@click.argument('reports', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--output', 'output_path', type=click.Path(dir_okay=False))
@_handle_errors
def average(reports, output_path):
    """여러 시드 report.json 의 평균 / 표준편차."""
    from reldisco.evaluation.reports import average_reports

    summary = average_reports(list(reports))
    if output_path:
        summary.to_csv(output_path, sep='\t', index=False)
    click.echo(summary.to_csv(sep='\t', index=False), nl=False)

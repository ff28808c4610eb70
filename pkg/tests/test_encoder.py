import numpy as np
import pytest
import torch
from scipy import sparse

from reldisco.encoder.mock import MockBackend, read_mock_table, write_mock_table
from reldisco.encoder.prompts import build_prompt, truncate_prompt
from reldisco.encoder.representation import encode, encode_tensors, truncate_top_k
from reldisco.errors import ConfigError, PromptTooLongError, SpanError
from reldisco.models import MASK
from reldisco.semifactual.lexicons import EntityTypeLexicon, SynonymLexicon
from reldisco.semifactual.views import entity_debiased_view, generate_tri_view, main_view


class BothMode:
    def integers(self, n):
        return 2


def test_prompt_on_main_view(new_orleans):
    prompt = build_prompt(main_view(new_orleans))
    assert prompt.suffix == ('New', 'Orleans', MASK, 'the', 'United', 'States')
    assert prompt.tokens[prompt.mask_position] == MASK
    assert prompt.mask_position == 12 + 2


def test_prompt_uses_markers_for_replaced_entities(new_orleans, entity_lexicon):
    prompt = build_prompt(entity_debiased_view(new_orleans, entity_lexicon, BothMode()))
    assert prompt.suffix == ('<h>', MASK, '<t>')


def test_prompt_rejects_empty_slot(new_orleans):
    with pytest.raises(SpanError):
        build_prompt(main_view(new_orleans), head='  ')


def test_truncate_keeps_suffix(new_orleans):
    prompt = build_prompt(main_view(new_orleans))
    cut = truncate_prompt(prompt, 10)
    assert len(cut.tokens) == 10
    assert cut.suffix == prompt.suffix
    assert cut.tokens[cut.mask_position] == MASK
    assert truncate_prompt(prompt, 100) == prompt


def test_truncate_suffix_too_long(new_orleans):
    with pytest.raises(PromptTooLongError):
        truncate_prompt(build_prompt(main_view(new_orleans)), 5)


def test_mock_needs_table():
    with pytest.raises(ConfigError):
        MockBackend({})


def synthetic_prompts(instances):
    return [build_prompt(main_view(inst)) for inst in instances]


def test_mock_same_relation_is_close(synthetic, mock_backend):
    instances = synthetic[0]
    by_relation = {}
    for inst in instances:
        by_relation.setdefault(inst.relation, []).append(inst)
    for relation, group in by_relation.items():
        reps = encode(synthetic_prompts(group[:2]), mock_backend)
        a, b = reps[0].hidden, reps[1].hidden
        assert a @ b / (np.linalg.norm(a) * np.linalg.norm(b)) > 0.9, relation


def test_mock_word_distribution(synthetic, mock_backend):
    instances, relation_table, _, _, _ = synthetic
    reps = encode(synthetic_prompts(instances[::97]), mock_backend)
    for inst, rep in zip(instances[::97], reps):
        assert rep.word_dist.shape == (len(mock_backend.vocab),)
        assert np.all(rep.word_dist >= 0)
        assert rep.word_dist.sum() == pytest.approx(1.0, abs=1e-5)
        assert rep.view == 1
        top = mock_backend.vocab[int(np.argmax(rep.word_dist))]
        assert top in (inst.relation,) + tuple(relation_table[inst.relation][0])


def test_eval_mode_is_deterministic(synthetic, mock_backend):
    prompts = synthetic_prompts(synthetic[0][:5])
    _, first = encode_tensors(prompts, mock_backend, mode='eval')
    _, second = encode_tensors(prompts, mock_backend, mode='eval')
    assert torch.equal(first, second)
    assert not first.requires_grad


def test_train_mode_tracks_gradients(synthetic, mock_backend):
    _, dist = encode_tensors(synthetic_prompts(synthetic[0][:3]), mock_backend, mode='train')
    assert dist.requires_grad
    with pytest.raises(ValueError):
        encode_tensors([], mock_backend, mode='predict')


def test_views_of_one_instance_stay_close(synthetic, mock_backend):
    instances, relation_table, entity_rows, synonyms, _ = synthetic
    owner = {w: r for r, (triggers, _) in relation_table.items() for w in (r,) + tuple(triggers)}
    entity_lexicon = EntityTypeLexicon(by_kb_id={kb: t for _, kb, t in entity_rows})
    triview = generate_tri_view(instances[0], entity_lexicon, SynonymLexicon(synonyms), seed=0)
    reps = encode([build_prompt(v) for v in triview.views], mock_backend)
    assert [r.view for r in reps] == [1, 2, 3]
    assert {owner[mock_backend.vocab[int(np.argmax(r.word_dist))]] for r in reps} == {instances[0].relation}


def test_truncate_top_k():
    rng = np.random.default_rng(0)
    dists = rng.dirichlet(np.ones(30), size=8)
    assert truncate_top_k(dists, 30) is dists
    assert truncate_top_k(dists, None) is dists
    cut = truncate_top_k(dists, 5)
    assert sparse.issparse(cut)
    assert np.allclose(np.asarray(cut.sum(axis=1)).ravel(), 1.0)
    assert np.all(cut.getnnz(axis=1) == 5)
    assert np.array_equal(np.asarray(cut.argmax(axis=1)).ravel(), dists.argmax(axis=1))


def test_mock_table_file(tmp_path, synthetic):
    relation_table = synthetic[1]
    write_mock_table(tmp_path / 'table.tsv', relation_table)
    table, vocab = read_mock_table(tmp_path / 'table.tsv')
    words = {w for r, (triggers, _) in relation_table.items() for w in (r,) + tuple(triggers)}
    assert sorted(vocab) == sorted(words)
    assert np.allclose(table['lies'], relation_table['located_in'][1], atol=1e-7)
    backend = MockBackend.from_table_file(tmp_path / 'table.tsv')
    rebuilt = MockBackend.from_description(backend.describe())
    prompt = [build_prompt(main_view(synthetic[0][0]))]
    assert torch.allclose(encode_tensors(prompt, backend)[1], encode_tensors(prompt, rebuilt)[1])

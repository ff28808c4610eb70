import itertools
import math

import numpy as np
import pytest
import torch
from hypothesis import given, settings, strategies as st

from reldisco.collab.alignment import align, align_view, apply_alignment, build_cost_matrix, reindex_probabilities
from reldisco.collab.checkpoint import load_checkpoint, save_checkpoint
from reldisco.collab.inference import infer_label
from reldisco.collab.losses import decision_targets, supervised_loss
from reldisco.collab.selection import ABANDONED, LabelDecision, abandoned_fraction, select_labels
from reldisco.collab.train_config import TrainConfig
from reldisco.collab.trainer import EarlyStopper
from reldisco.encoder.representation import encode_tensors
from reldisco.errors import AlignmentError, CheckpointError, ConfigError
from reldisco.index_space.classifier import RelationClassifier

from conftest import finite_difference_check, synthetic_tri_view_prompts


def test_cost_matrix_identity():
    labels = np.repeat(np.arange(3), 10)
    cost = build_cost_matrix(labels, labels, 3)
    assert np.array_equal(cost, 10 * (1 - np.eye(3, dtype=np.int64)))
    assert np.array_equal(align(cost), np.eye(3, dtype=bool))


def test_cyclic_shift_is_undone():
    anchors = np.repeat(np.arange(4), 10)
    clusters = (anchors + 1) % 4
    result = align_view(anchors, clusters, np.eye(4)[clusters])
    assert np.array_equal(result.aligned_labels, anchors)
    assert np.array_equal(result.aligned_probabilities, np.eye(4)[anchors])


def test_empty_cost_matrix():
    cost = build_cost_matrix([], [], 3)
    assert np.array_equal(cost, np.zeros((3, 3)))
    assignment = align(cost)
    assert np.all(assignment.sum(axis=0) == 1)


def test_cost_matrix_errors():
    with pytest.raises(AlignmentError):
        build_cost_matrix([0, 3], [0, 1], 3)
    with pytest.raises(AlignmentError):
        build_cost_matrix([0, 1], [0], 3)
    with pytest.raises(AlignmentError):
        align(np.zeros((2, 3)))
    with pytest.raises(AlignmentError):
        apply_alignment([0, 1], np.ones((2, 2), dtype=bool))


def test_bound_heads_override_anchors():
    # 클러스터 0 의 비라벨 앵커는 head 2 쪽이지만 라벨 인스턴스는 head 0 에 묶여 있다
    clusters = np.repeat(np.arange(3), 10)
    anchors = np.repeat([2, 1, 0], 10)
    labeled = (np.zeros(5, dtype=int), np.zeros(5, dtype=int))
    free = align_view(anchors, clusters, np.eye(3)[clusters])
    assert free.aligned_labels[0] == 2

    bound = align_view(anchors, clusters, np.eye(3)[clusters], bound=labeled)
    assert np.array_equal(bound.aligned_labels, clusters)
    assert np.array_equal(bound.aligned_probabilities, np.eye(3)[clusters])

    # 가중치 1 이면 비라벨 앵커 수에 밀린다
    assert align(build_cost_matrix(anchors, clusters, 3, bound=labeled, bound_weight=1))[2, 0]
    with pytest.raises(AlignmentError):
        build_cost_matrix(anchors, clusters, 3, bound=(np.zeros(5, dtype=int), np.zeros(4, dtype=int)))


def test_align_is_optimal():
    rng = np.random.default_rng(0)
    for _ in range(200):
        c = int(rng.integers(1, 7))
        cost = rng.integers(0, 20, size=(c, c))
        assignment = align(cost)
        best = min(sum(cost[r, p[r]] for r in range(c)) for p in itertools.permutations(range(c)))
        assert cost[assignment].sum() == best


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 6))
def test_reindexed_probability_follows_label(seed, c):
    rng = np.random.default_rng(seed)
    clusters = rng.integers(c, size=20)
    anchors = rng.integers(c, size=20)
    probabilities = rng.dirichlet(np.ones(c), size=20)
    result = align_view(anchors, clusters, probabilities)
    rows = np.arange(20)
    assert np.allclose(result.aligned_probabilities[rows, result.aligned_labels], probabilities[rows, clusters])
    assert np.allclose(np.sort(result.aligned_probabilities, axis=1), np.sort(probabilities, axis=1))


def own_rows(labels, own, c=3):
    """뷰별 (정렬 라벨, 그 라벨의 확률) -> [M, C] 확률."""
    rows = []
    for label, q in zip(labels, own):
        row = np.full(c, (1 - q) / (c - 1))
        row[label] = q
        rows.append(row)
    return np.array(rows)


SELECTION_CASES = [
    # (뷰별 라벨, 뷰별 자기 라벨 확률, 기대 라벨, 기대 출처 뷰)
    ((2, 2, 2), (0.4, 0.4, 0.4), 2, 1),
    ((0, 0, 0), (0.9, 0.8, 0.95), 0, 1),
    ((1, 1, 1), (0.34, 0.9, 0.9), 1, 1),
    ((0, 1, 2), (0.5, 0.8, 0.6), 1, 2),
    ((2, 2, 0), (0.3, 0.4, 0.9), 0, 3),
    ((1, 0, 0), (0.7, 0.7, 0.2), 1, 1),
    ((0, 1, 2), (0.5, 0.6, 0.69), None, None),
    ((1, 1, 0), (0.69, 0.2, 0.3), None, None),
    ((2, 0, 0), (0.34, 0.34, 0.34), None, None),
]


@pytest.mark.parametrize('labels, own, label, source', SELECTION_CASES)
def test_selection_cases(labels, own, label, source):
    (decision,) = select_labels(np.array([labels]), own_rows(labels, own)[None], 0.7, ['x'])
    assert decision.label == label
    assert decision.source_view == source
    assert decision.agreed == (len(set(labels)) == 1)
    assert decision.max_probability == pytest.approx(max(own))


def test_selection_follows_view_order():
    labels, own = (0, 1, 2), (0.5, 0.8, 0.6)
    order = [2, 0, 1]
    (decision,) = select_labels(np.array([[labels[i] for i in order]]),
                                own_rows(labels, own)[order][None], 0.7)
    assert decision.label == 1
    assert decision.source_view == order.index(1) + 1


def test_abandoned_fraction_grows_with_theta():
    rng = np.random.default_rng(1)
    aligned = rng.integers(3, size=(200, 3))
    probabilities = rng.dirichlet(np.ones(3), size=(200, 3))
    fractions = [abandoned_fraction(select_labels(aligned, probabilities, theta)) for theta in np.linspace(0, 1, 11)]
    assert fractions[0] == 0.0
    assert all(b >= a for a, b in zip(fractions, fractions[1:]))
    assert abandoned_fraction([]) == 0.0


def test_supervised_loss_extremes():
    targets = torch.tensor([0, 2, 1])
    perfect = 50.0 * torch.nn.functional.one_hot(targets, 4).double()[:, None, :].repeat(1, 3, 1)
    assert supervised_loss(perfect, targets).item() < 1e-12
    uniform = torch.zeros(3, 3, 4, dtype=torch.float64)
    assert supervised_loss(uniform, targets).item() == pytest.approx(math.log(4), abs=1e-12)


def test_supervised_loss_matches_loops():
    rng = np.random.default_rng(2)
    for _ in range(50):
        n, k = int(rng.integers(1, 6)), int(rng.integers(2, 6))
        logits = rng.normal(size=(n, 3, k))
        targets = rng.integers(-1, k, size=n)
        terms = [
            -(logits[i, m, t] - np.log(np.exp(logits[i, m]).sum()))
            for i, t in enumerate(targets) if t != ABANDONED for m in range(3)
        ]
        expected = np.mean(terms) if terms else 0.0
        got = supervised_loss(torch.tensor(logits), targets).item()
        assert got == pytest.approx(expected, abs=1e-9)


def test_supervised_loss_without_targets():
    logits = torch.randn(4, 3, 5, requires_grad=True)
    loss = supervised_loss(logits, [ABANDONED] * 4)
    loss.backward()
    assert loss.item() == 0.0
    assert torch.all(logits.grad == 0)


def test_decision_targets():
    decisions = [LabelDecision('a', 2, 1, 0.9, True), LabelDecision('b', None, None, 0.3, False)]
    targets = decision_targets(decisions, {'b': 0, 'a': 1, 'c': 2})
    assert targets.tolist() == [ABANDONED, 2, ABANDONED]


def test_supervised_loss_gradient(synthetic, mock_backend64):
    prompts = synthetic_tri_view_prompts(synthetic)
    n = len(prompts) // 3
    torch.manual_seed(0)
    clf = RelationClassifier(mock_backend64.hidden_size, 6, dtype=torch.float64)
    targets = torch.tensor([0, 3, ABANDONED, 5, 1][:n])

    def loss_fn():
        hidden, _ = encode_tensors(prompts, mock_backend64, mode='train')
        return supervised_loss(clf(hidden).reshape(n, 3, -1), targets)

    params = list(mock_backend64.projection.parameters()) + list(clf.parameters())
    assert finite_difference_check(loss_fn, params) < 1e-4


def test_infer_label():
    z = np.array([[0.6, 0.4], [0.1, 0.9], [0.5, 0.5]])
    assert infer_label(z) == 1
    assert list(infer_label(np.stack([z, z[:, ::-1]]))) == [1, 0]
    assert infer_label(np.full((3, 4), 0.25)) == 0


def test_train_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(theta=1.5)
    with pytest.raises(ConfigError):
        TrainConfig(views=(2, 3))
    with pytest.raises(ConfigError):
        TrainConfig(align_mode='nearest')
    with pytest.raises(ConfigError):
        TrainConfig(tau1=0)
    config = TrainConfig(views=(3, 1))
    assert config.views == (1, 3)
    assert TrainConfig.from_dict(config.to_dict()) == config
    assert not TrainConfig(views=(1,)).contrastive_active


def test_early_stopper():
    stopper = EarlyStopper(patience=2)
    assert [stopper.step(s, e) for e, s in enumerate([0.1, 0.2, 0.2, 0.15], 1)] == [True, True, False, False]
    assert stopper.should_stop
    assert (stopper.best_epoch, stopper.best_score) == (2, 0.2)

    restored = EarlyStopper(patience=2)
    restored.load_state_dict(stopper.state_dict())
    assert restored.should_stop

    never = EarlyStopper(patience=0)
    for epoch in range(1, 20):
        never.step(0.0, epoch)
    assert not never.should_stop


def test_checkpoint_files(tmp_path):
    bundle = {'backend': {'kind': 'mock'}, 'backend_state': {}, 'classifier_state': {}, 'n_heads': 3,
              'head_to_relation': {0: 'a'}, 'train_config': TrainConfig().to_dict()}
    save_checkpoint(tmp_path / 'c.pt', bundle)
    assert load_checkpoint(tmp_path / 'c.pt')['n_heads'] == 3
    assert not (tmp_path / 'c.pt.tmp').exists()

    with pytest.raises(CheckpointError):
        save_checkpoint(tmp_path / 'd.pt', {'n_heads': 3})
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / 'missing.pt')
    (tmp_path / 'junk.pt').write_bytes(b'not a checkpoint')
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / 'junk.pt')

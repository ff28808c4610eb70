import math

import numpy as np
import pytest
import torch
from hypothesis import given, strategies as st

from reldisco.encoder.representation import encode_tensors
from reldisco.index_space.classifier import RelationClassifier, anchor_labels, classify
from reldisco.index_space.losses import consistency_loss, marginal_entropy

from conftest import finite_difference_check, naive_contrastive, synthetic_tri_view_prompts


def naive_consistency(z, tau, entropy_weight=1.0):
    columns = np.transpose(z, (2, 1, 0))
    entropy = 0.0
    for m in range(z.shape[1]):
        marginal = z[:, m].mean(axis=0)
        entropy -= sum(p * math.log(p) for p in marginal if p > 0)
    return naive_contrastive(columns, tau) - entropy_weight * entropy


def sharp_z(rng, n=32, k=4, views=3, scale=8.0):
    labels = rng.integers(k, size=n)
    logits = scale * np.eye(k)[labels] + rng.normal(size=(n, k))
    z = torch.softmax(torch.tensor(logits), dim=-1)
    return z[:, None, :].repeat(1, views, 1)


def test_classify_zero_weights_is_uniform():
    clf = RelationClassifier(5, 4)
    with torch.no_grad():
        clf.weight.zero_()
        clf.bias.zero_()
    z = classify(torch.randn(3, 5), clf)
    assert torch.allclose(z, torch.full((3, 4), 0.25))


def test_classify_dominant_head():
    clf = RelationClassifier(2, 3)
    with torch.no_grad():
        clf.weight.copy_(torch.tensor([[0.0, 0.0], [50.0, 0.0], [0.0, 0.0]]))
        clf.bias.zero_()
    z = classify(torch.tensor([[1.0, 0.0]]), clf)
    assert z[0, 1].item() == pytest.approx(1.0)


def test_classify_matches_softmax():
    torch.manual_seed(0)
    clf = RelationClassifier(6, 5, dtype=torch.float64)
    hidden = torch.randn(4, 3, 6, dtype=torch.float64)
    logits = hidden @ clf.weight.T + clf.bias
    expected = torch.exp(logits) / torch.exp(logits).sum(dim=-1, keepdim=True)
    assert torch.allclose(classify(hidden, clf), expected, atol=1e-12)
    assert clf.n_heads == 5


def test_classify_width_mismatch():
    with pytest.raises(ValueError):
        classify(torch.randn(2, 7), RelationClassifier(6, 3))


def test_anchor_labels():
    z = np.array([[0.1, 0.7, 0.2], [0.4, 0.4, 0.2], [0.0, 0.1, 0.9]])
    assert list(anchor_labels(z)) == [1, 0, 2]
    assert list(anchor_labels(torch.tensor(z))) == [1, 0, 2]


@given(st.lists(st.integers(-20, 20), min_size=2, max_size=8))
def test_anchor_is_invariant_to_monotone_logits(logits):
    logits = torch.tensor(logits, dtype=torch.float64) / 4
    before = anchor_labels(torch.softmax(logits, dim=-1))
    after = anchor_labels(torch.softmax(logits ** 3 + logits, dim=-1))
    assert before == after


def test_uniform_marginal_entropy():
    k = 6
    z = torch.full((10, 3, k), 1 / k, dtype=torch.float64)
    assert marginal_entropy(z).item() == pytest.approx(3 * math.log(k), abs=1e-12)


def test_consistency_matches_loops():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n, k = int(rng.integers(2, 7)), int(rng.integers(2, 6))
        z = rng.dirichlet(np.ones(k), size=(n, 3))
        tau = float(rng.uniform(0.1, 1.0))
        weight = float(rng.uniform(0.0, 2.0))
        got = consistency_loss(torch.tensor(z), tau, entropy_weight=weight).item()
        assert got == pytest.approx(naive_consistency(z, tau, weight), abs=1e-9)


def test_aligned_columns_beat_shuffled():
    rng = np.random.default_rng(1)
    for _ in range(20):
        z = sharp_z(rng)
        shuffled = z.clone()
        shuffled[:, 2] = z[:, 2][:, [1, 2, 3, 0]]
        assert consistency_loss(z, 0.1).item() < consistency_loss(shuffled, 0.1).item()


def test_identical_views_beat_any_permutation():
    rng = np.random.default_rng(2)
    z = sharp_z(rng)
    aligned = consistency_loss(z, 0.1).item()
    for _ in range(10):
        perm = rng.permutation(4)
        if np.array_equal(perm, np.arange(4)):
            continue
        permuted = z.clone()
        permuted[:, 1] = z[:, 1][:, perm]
        assert aligned <= consistency_loss(permuted, 0.1).item()


def test_entropy_term_favours_spread_heads():
    collapsed = torch.zeros(8, 3, 4, dtype=torch.float64)
    collapsed[..., 0] = 1.0
    spread = torch.eye(4, dtype=torch.float64).repeat(2, 1)[:, None, :].repeat(1, 3, 1)
    assert consistency_loss(spread, 0.5).item() < consistency_loss(collapsed, 0.5).item()


def test_consistency_gradient(synthetic, mock_backend64):
    prompts = synthetic_tri_view_prompts(synthetic)
    n = len(prompts) // 3
    torch.manual_seed(0)
    clf = RelationClassifier(mock_backend64.hidden_size, 6, dtype=torch.float64)

    def loss_fn():
        hidden, _ = encode_tensors(prompts, mock_backend64, mode='train')
        z = classify(hidden, clf).reshape(n, 3, -1)
        return consistency_loss(z, 0.5)

    params = list(mock_backend64.projection.parameters()) + list(clf.parameters())
    assert finite_difference_check(loss_fn, params) < 1e-4

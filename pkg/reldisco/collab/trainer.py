import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from tqdm import tqdm

from reldisco.collab import checkpoint as ckpt
from reldisco.collab.alignment import align_view
from reldisco.collab.inference import encode_views, infer_label, prompt_rows
from reldisco.collab.losses import decision_targets, supervised_loss
from reldisco.collab.selection import ABANDONED, LabelDecision, abandoned_fraction, select_labels
from reldisco.encoder.representation import encode_tensors
from reldisco.errors import ConfigError, SplitError, TrainingDivergedError
from reldisco.evaluation.metrics import evaluate_predictions
from reldisco.index_space.classifier import RelationClassifier, anchor_labels
from reldisco.index_space.losses import consistency_loss
from reldisco.log import append_jsonl
from reldisco.semantic_space.clustering import estimate_relation_count, fit_centroids, hard_label, soft_assign
from reldisco.semantic_space.losses import self_contrastive_loss

logger = logging.getLogger(__name__)

METRICS_LOG = 'metrics.jsonl'


@dataclass
class TrainingData:
    labeled: list
    unlabeled: list  # 라벨을 가린 인스턴스
    test: list
    triviews: dict
    split: object

    @classmethod
    def from_split(cls, instances, split, triviews):
        by_id = {inst.instance_id: inst for inst in instances}
        needed = split.labeled_ids | split.unlabeled_ids | split.test_ids
        missing = [i for i in needed if i not in by_id]
        if missing:
            raise SplitError(f'{len(missing)} manifest ids not in the dataset, e.g. {sorted(missing)[:3]}')
        no_view = [i for i in needed if i not in triviews]
        if no_view:
            raise SplitError(f'{len(no_view)} instances have no tri-view, e.g. {sorted(no_view)[:3]}')
        return cls(
            labeled=[by_id[i] for i in sorted(split.labeled_ids)],
            unlabeled=[by_id[i].hidden() for i in sorted(split.unlabeled_ids)],
            test=[by_id[i] for i in sorted(split.test_ids)],
            triviews=triviews,
            split=split,
        )

    def views_of(self, instances):
        return [self.triviews[inst.instance_id] for inst in instances]


class EarlyStopper:
    """지표가 patience 에폭 연속으로 오르지 않으면 멈춘다. patience=0 이면 끄기."""

    def __init__(self, patience=10):
        self.patience = patience
        self.best_score = -math.inf
        self.best_epoch = None
        self.bad_epochs = 0

    def step(self, score, epoch):
        if score > self.best_score:
            self.best_score = score
            self.best_epoch = epoch
            self.bad_epochs = 0
            return True
        self.bad_epochs += 1
        return False

    @property
    def should_stop(self):
        return self.patience > 0 and self.bad_epochs >= self.patience

    def state_dict(self):
        return {'patience': self.patience, 'best_score': self.best_score,
                'best_epoch': self.best_epoch, 'bad_epochs': self.bad_epochs}

    def load_state_dict(self, state):
        self.best_score = state['best_score']
        self.best_epoch = state['best_epoch']
        self.bad_epochs = state['bad_epochs']


@dataclass
class TrainResult:
    best_epoch: int
    best_score: float
    epochs_run: int
    checkpoint_path: Path
    history: list = field(default_factory=list)


def resolve_head_count(data, backend, config, known_k=True, k_init=160):
    """head 수 K. known_k 면 실제 관계 수, 아니면 비라벨 main 뷰 단어 분포로 추정."""
    n_predefined = len(data.split.predefined_relations)
    if known_k:
        return len(data.split.all_relations)
    rows = prompt_rows(data.views_of(data.unlabeled), views=(1,))
    _, dists, _ = encode_views(rows, backend, None, config.eval_batch_size, top_k=config.top_k_vocab)
    estimate = estimate_relation_count(dists[0], min(k_init, len(rows)), seed=config.seed,
                                       n_init=config.kmeans_n_init)
    n_heads = max(estimate, n_predefined, 1)
    logger.info('estimated relation count %d -> using %d heads (%d pre-defined)', estimate, n_heads, n_predefined)
    return n_heads


class Trainer:
    """관계 발견 학습 루프: warm-up 후 에폭마다 의미 정제 -> 군집 -> 앵커 -> 정렬 -> 선택 -> 미세조정."""

    def __init__(self, data, backend, config, out_dir, n_heads=None, show_progress=True):
        self.data = data
        self.backend = backend
        self.config = config
        self.out_dir = Path(out_dir)
        self.show_progress = show_progress

        torch.manual_seed(config.seed)
        self.rng = np.random.default_rng(config.seed)

        self.predefined = sorted(data.split.predefined_relations)
        self.novel = sorted(data.split.novel_relations)
        self.head_to_relation = dict(enumerate(self.predefined))
        self.relation_to_head = {r: h for h, r in self.head_to_relation.items()}
        self.n_heads = n_heads or len(data.split.all_relations)
        if self.n_heads < len(self.predefined):
            raise ConfigError(f'{self.n_heads} heads cannot cover {len(self.predefined)} pre-defined relations')

        dtype = next(backend.parameters()).dtype
        self.classifier = RelationClassifier(backend.hidden_size, self.n_heads, dtype=dtype).to(backend.device)
        self.optimizer = torch.optim.Adam(
            list(backend.parameters()) + list(self.classifier.parameters()), lr=config.learning_rate,
        )
        self.stopper = EarlyStopper(config.patience)
        self.history = []
        self.epoch = 0
        self.warmed_up = False
        self.centroids = {}
        self.labeled_clusters = None
        self.decisions = []

        views = config.views
        self.rows = {
            'labeled': prompt_rows(data.views_of(data.labeled), views),
            'unlabeled': prompt_rows(data.views_of(data.unlabeled), views),
            'test': prompt_rows(data.views_of(data.test), views),
        }
        self.labeled_targets = torch.tensor([self.relation_to_head[i.relation] for i in data.labeled],
                                            dtype=torch.long)
        if len(self.rows['unlabeled']) < self.n_heads:
            raise ConfigError(f'{len(self.rows["unlabeled"])} unlabeled instances for {self.n_heads} clusters')

    # ------------------------------------------------------------------ 공통
    def _batches(self, n, shuffle=True):
        order = self.rng.permutation(n) if shuffle else np.arange(n)
        size = self.config.batch_size
        return [order[i:i + size] for i in range(0, n, size)]

    def _forward(self, rows):
        n_view = len(rows[0])
        flat = [p for row in rows for p in row]
        self.classifier.train()
        hidden, dist = encode_tensors(flat, self.backend, mode='train')
        hidden = hidden.reshape(len(rows), n_view, -1)
        dist = dist.reshape(len(rows), n_view, -1)
        logits = self.classifier(hidden)
        return dist, logits

    def _semantic_term(self, dist):
        cfg = self.config
        return cfg.semantic_weight * self_contrastive_loss(dist, cfg.tau1, exclude_self=cfg.exclude_self)

    def _consistency_term(self, logits, n_heads=None):
        # n_heads 를 주면 앞쪽 head 만 (warm-up 에서는 사전 정의 관계에 묶인 head)
        cfg = self.config
        if n_heads is not None:
            logits = logits[..., :n_heads]
        z = torch.softmax(logits, dim=-1)
        return cfg.consistency_weight * consistency_loss(z, cfg.tau2, entropy_weight=cfg.entropy_weight,
                                                         exclude_self=cfg.exclude_self)

    def _step(self, loss, phase):
        if not torch.isfinite(loss):
            path = self._save(ckpt.DIVERGED)
            logger.error('non-finite %s loss at epoch %d', phase, self.epoch)
            raise TrainingDivergedError(self.epoch, phase, path)
        self.optimizer.zero_grad()
        loss.backward()
        self.optimizer.step()
        return float(loss.detach())

    def _run_phase(self, phase, rows, loss_fn, targets=None):
        losses = []
        batches = self._batches(len(rows))
        for idx in tqdm(batches, desc=f'epoch {self.epoch} {phase}', leave=False, disable=not self.show_progress):
            dist, logits = self._forward([rows[i] for i in idx])
            batch_targets = targets[torch.as_tensor(idx)] if targets is not None else None
            losses.append(self._step(loss_fn(dist, logits, batch_targets), phase))
        return float(np.mean(losses)) if losses else 0.0

    # ------------------------------------------------------------------ 단계
    def warmup(self):
        """라벨 데이터로 인코더와 분류기 초기화 (자기 대조 + 일관성 + 교차 엔트로피).

        일관성 손실은 사전 정의 관계에 묶인 head 만 본다. novel head 는 교차 엔트로피로만 내려간다.
        """
        cfg = self.config
        if not self.rows['labeled']:
            logger.warning('no labeled instances; skipping warm-up')
            self.warmed_up = True
            return []

        def loss_fn(dist, logits, targets):
            loss = cfg.supervised_weight * supervised_loss(logits, targets)
            if cfg.contrastive_active:
                loss = loss + self._semantic_term(dist) + self._consistency_term(logits, n_heads=bound)
            return loss

        bound = len(self.predefined)
        losses = []
        for k in range(cfg.warmup_epochs):
            losses.append(self._run_phase('warmup', self.rows['labeled'], loss_fn, self.labeled_targets))
            logger.info('warm-up %d/%d loss %.4f', k + 1, cfg.warmup_epochs, losses[-1])
        self.warmed_up = True
        return losses

    def refine(self):
        if not self.config.contrastive_active:
            return 0.0
        return self._run_phase('refine', self.rows['unlabeled'], lambda d, l, t: self._semantic_term(d))

    def cluster(self):
        """뷰별 K-means 와 Student t 소프트 할당. 라벨 인스턴스도 같은 중심으로 군집 라벨을 매긴다."""
        cfg = self.config
        labeled_dists = None
        if self.rows['labeled']:
            _, labeled_dists, _ = encode_views(self.rows['labeled'], self.backend, None, cfg.eval_batch_size,
                                               top_k=cfg.top_k_vocab)
        labeled_clusters = []
        _, dists, _ = encode_views(self.rows['unlabeled'], self.backend, None, cfg.eval_batch_size,
                                   top_k=cfg.top_k_vocab)
        probabilities, labels = [], []
        for pos, view in enumerate(cfg.views):
            view_dists = dists[pos]
            centroids = fit_centroids(view_dists, self.n_heads, seed=cfg.seed, n_init=cfg.kmeans_n_init, view=view)
            self.centroids[view] = centroids
            p = soft_assign(view_dists, centroids)
            probabilities.append(p)
            labels.append(hard_label(p))
            if labeled_dists is not None:
                labeled_clusters.append(hard_label(soft_assign(labeled_dists[pos], centroids)))
        self.labeled_clusters = np.stack(labeled_clusters, axis=1) if labeled_clusters else None
        return np.stack(labels, axis=1), np.stack(probabilities, axis=1)

    def learn_anchors(self):
        """비라벨 데이터의 일관성 학습. 라벨 인스턴스를 섞어 교차 엔트로피로 묶인 head 를 붙잡는다."""
        cfg = self.config
        if not cfg.contrastive_active:
            return 0.0
        rows = self.rows['labeled'] + self.rows['unlabeled']
        unlabeled = torch.full((len(self.rows['unlabeled']),), ABANDONED, dtype=torch.long)
        targets = torch.cat([self.labeled_targets, unlabeled])

        def loss_fn(dist, logits, batch_targets):
            return self._consistency_term(logits) + cfg.supervised_weight * supervised_loss(logits, batch_targets)

        return self._run_phase('anchor', rows, loss_fn, targets)

    def anchors(self):
        _, _, z = encode_views(self.rows['unlabeled'], self.backend, self.classifier, self.config.eval_batch_size)
        return np.stack([anchor_labels(z[:, pos]) for pos in range(z.shape[1])], axis=1)

    def align(self, anchors, clusters, probabilities):
        """뷰별 헝가리안 정렬. self 모드면 main 뷰만 앵커에, 나머지는 정렬된 main 라벨에 맞춘다.

        라벨 인스턴스가 모인 클러스터는 그 관계에 묶인 head 로 고정된다.
        """
        results = []
        bound_heads = self.labeled_targets.numpy()
        for pos, view in enumerate(self.config.views):
            if self.config.align_mode == 'self' and pos > 0:
                reference = results[0].aligned_labels
            else:
                reference = anchors[:, pos]
            bound = None
            if self.labeled_clusters is not None:
                bound = (bound_heads, self.labeled_clusters[:, pos])
            results.append(align_view(reference, clusters[:, pos], probabilities[:, pos], view=view, bound=bound))
        aligned = np.stack([r.aligned_labels for r in results], axis=1)
        aligned_probs = np.stack([r.aligned_probabilities for r in results], axis=1)
        return aligned, aligned_probs

    def select(self, aligned, aligned_probs):
        ids = [inst.instance_id for inst in self.data.unlabeled]
        if self.config.use_selection:
            return select_labels(aligned, aligned_probs, self.config.theta, ids, views=self.config.views)
        # 선택 없이 main 뷰 정렬 라벨을 그대로
        return [
            LabelDecision(iid, int(label), 1, float(aligned_probs[i, 0, label]), bool(np.all(aligned[i] == label)))
            for i, (iid, label) in enumerate(zip(ids, aligned[:, 0]))
        ]

    def fine_tune(self, decisions):
        cfg = self.config
        index = {inst.instance_id: i for i, inst in enumerate(self.data.unlabeled)}
        pseudo = decision_targets(decisions, index)
        rows = self.rows['labeled'] + self.rows['unlabeled']
        targets = torch.cat([self.labeled_targets, pseudo])

        def loss_fn(dist, logits, batch_targets):
            loss = cfg.supervised_weight * supervised_loss(logits, batch_targets)
            if cfg.contrastive_active and len(dist) > 1:
                loss = loss + self._semantic_term(dist) + self._consistency_term(logits)
            return loss

        return self._run_phase('finetune', rows, loss_fn, targets)

    def selected_loss(self, decisions):
        """선택된 의사 라벨 부분집합의 교차 엔트로피 (학습 추적용)."""
        _, _, z = encode_views(self.rows['unlabeled'], self.backend, self.classifier, self.config.eval_batch_size)
        keep = [i for i, d in enumerate(decisions) if not d.abandoned]
        if not keep:
            return float('nan')
        probs = z[keep]
        labels = np.array([decisions[i].label for i in keep])
        picked = np.take_along_axis(probs, labels[:, None, None].repeat(probs.shape[1], axis=1), axis=2)
        return float(-np.log(np.clip(picked, 1e-12, None)).mean())

    def evaluate(self, split='test'):
        instances = getattr(self.data, split)
        _, _, z = encode_views(self.rows[split], self.backend, self.classifier, self.config.eval_batch_size)
        pred = infer_label(z)
        gold = [inst.relation for inst in instances]
        return evaluate_predictions(pred, gold, self.predefined, self.novel)

    # ------------------------------------------------------------------ 체크포인트
    def bundle(self):
        return {
            'backend': self.backend.describe(),
            'backend_state': self.backend.state_dict(),
            'classifier_state': self.classifier.state_dict(),
            'n_heads': self.n_heads,
            'hidden_size': self.backend.hidden_size,
            'head_to_relation': dict(self.head_to_relation),
            'predefined_relations': list(self.predefined),
            'novel_relations': list(self.novel),
            'centroids': {view: c.centers for view, c in self.centroids.items()},
            'train_config': self.config.to_dict(),
            'epoch': self.epoch,
            'warmed_up': self.warmed_up,
            'history': list(self.history),
            'optimizer_state': self.optimizer.state_dict(),
            'stopper': self.stopper.state_dict(),
        }

    def _save(self, name):
        return ckpt.save_checkpoint(self.out_dir / name, self.bundle())

    def resume(self, path=None):
        bundle = ckpt.load_checkpoint(path or self.out_dir / ckpt.LAST, map_location=self.backend.device)
        if bundle['n_heads'] != self.n_heads:
            raise ConfigError(f'checkpoint has {bundle["n_heads"]} heads, trainer has {self.n_heads}')
        self.backend.load_state_dict(bundle['backend_state'])
        self.classifier.load_state_dict(bundle['classifier_state'])
        self.optimizer.load_state_dict(bundle['optimizer_state'])
        self.stopper.load_state_dict(bundle['stopper'])
        self.epoch = bundle['epoch']
        self.warmed_up = bundle['warmed_up']
        self.history = list(bundle['history'])
        self.rng = np.random.default_rng([self.config.seed, self.epoch])
        logger.info('resumed from epoch %d (best acc_all %.4f at epoch %s)',
                    self.epoch, self.stopper.best_score, self.stopper.best_epoch)

    # ------------------------------------------------------------------ 루프
    def run_episode(self):
        self.epoch += 1
        record = {'epoch': self.epoch}
        record['loss_refine'] = self.refine()
        clusters, probabilities = self.cluster()
        record['loss_anchor'] = self.learn_anchors()
        anchors = self.anchors()
        aligned, aligned_probs = self.align(anchors, clusters, probabilities)
        self.decisions = self.select(aligned, aligned_probs)
        record['abandoned_fraction'] = abandoned_fraction(self.decisions)
        record['loss_finetune'] = self.fine_tune(self.decisions)
        record['loss_selected'] = self.selected_loss(self.decisions)
        record.update(self.evaluate('test').flat())
        return record

    def fit(self):
        cfg = self.config
        metrics_path = self.out_dir / METRICS_LOG
        if not self.warmed_up:
            self.warmup()

        while self.epoch < cfg.max_epochs:
            record = self.run_episode()
            self.history.append(record)
            append_jsonl(metrics_path, record)
            improved = self.stopper.step(record['acc_all'], self.epoch)
            logger.info('epoch %d acc_all %.4f acc_pre %s acc_nov %s abandoned %.3f%s', self.epoch, record['acc_all'],
                        _fmt(record.get('acc_pre')), _fmt(record.get('acc_nov')), record['abandoned_fraction'],
                        ' *' if improved else '')
            if improved:
                self._save(ckpt.BEST)
            self._save(ckpt.LAST)
            if self.stopper.should_stop:
                logger.info('no improvement for %d epochs; stopping', self.stopper.bad_epochs)
                break

        return TrainResult(
            best_epoch=self.stopper.best_epoch,
            best_score=self.stopper.best_score,
            epochs_run=self.epoch,
            checkpoint_path=self.out_dir / ckpt.BEST,
            history=list(self.history),
        )


def _fmt(value):
    return 'n/a' if value is None else f'{value:.4f}'


def train(data, backend, config, out_dir, n_heads=None, resume=False, show_progress=True):
    trainer = Trainer(data, backend, config, out_dir, n_heads=n_heads, show_progress=show_progress)
    if resume:
        trainer.resume()
    return trainer.fit()

"""Curriculum training with per-pair coordinate descent between the two encoder paths.

Each training pair flips a coin: heads (probability ``1 - coin_prob``) trains
the cross-modal path sentence -> decoder, tails the autoencoder path
pose -> decoder.  Both paths share the decoder, so over an epoch the expected
objective is the sum of both losses.  A stage at horizon ``t`` runs epochs
until validation loss stops improving, then the horizon doubles.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import autodiff as ad
from .pose import process
from .text import WordEmbeddingTable, embed_sentence

log = logging.getLogger(__name__)

CROSS, AUTO = 0, 1


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    curriculum: bool = True
    loss: str = "smooth_l1"
    embedding_mode: str = "joint"
    coin_prob: float = 0.5
    val_fraction: float = 0.2
    patience: int = 1
    max_T: int = 32
    batch_size: int = 1
    max_epochs_per_stage: int = 50
    optimizer: str = "adam"
    lr: float = 1e-3
    clip_norm: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.val_fraction < 1:
            raise ValueError(f"val_fraction must be in (0, 1), got {self.val_fraction}")
        if not 0 <= self.coin_prob <= 1:
            raise ValueError(f"coin_prob must be in [0, 1], got {self.coin_prob}")
        if self.max_T < 2:
            raise ValueError(f"max_T must be >= 2, got {self.max_T}")
        if self.loss not in ad.LOSSES:
            raise ValueError(f"loss must be one of {sorted(ad.LOSSES)}, got {self.loss!r}")
        if self.embedding_mode not in ("joint", "sequential"):
            raise ValueError(f"embedding_mode must be joint or sequential, "
                             f"got {self.embedding_mode!r}")
        if self.patience < 1 or self.batch_size < 1 or self.max_epochs_per_stage < 1:
            raise ValueError("patience, batch_size and max_epochs_per_stage must be >= 1")


@dataclass
class Pair:
    clip_id: str
    sentence: str
    tokens: object  # TokenSequence
    processed: object  # ProcessedSequence
    target: np.ndarray  # model-space features (T, F)
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.target)


@dataclass
class SplitCorpus:
    train_clips: list
    val_clips: list
    train: list = field(default_factory=list)  # Pair
    val: list = field(default_factory=list)


@dataclass
class CurriculumState:
    t: int = 2
    best_val: float = math.inf
    history: list = field(default_factory=list)  # (t, epochs, final val loss)


@dataclass
class StageReport:
    phase: str
    t: int
    epochs: int = 0
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    best_val_at_start: float = math.inf
    tally: dict = field(default_factory=lambda: {"cross": 0, "auto": 0})
    stop_reason: str = ""


def curriculum_schedule(max_T: int, curriculum=True) -> list:
    """Horizons 2, 4, 8, ... with the last one clamped to exactly ``max_T``."""
    if max_T < 2:
        raise ValueError(f"max_T must be >= 2, got {max_T}")
    if not curriculum:
        return [max_T]
    ts, t = [], 2
    while t < max_T:
        ts.append(t)
        t *= 2
    ts.append(max_T)
    return ts


def split_data(clips, val_fraction=0.2, seed=0):
    """Seeded clip-level split; every sentence of a clip lands on the same side."""
    n = len(clips)
    if n < 5:
        raise ValueError(f"need at least 5 clips to split, got {n}")
    if not 0 < val_fraction < 1:
        raise ValueError(f"val_fraction must be in (0, 1), got {val_fraction}")
    n_val = min(max(int(round(n * val_fraction)), 1), n - 1)
    order = np.random.default_rng(seed).permutation(n)
    val_idx = sorted(order[:n_val].tolist())
    train_idx = sorted(order[n_val:].tolist())
    return SplitCorpus([clips[i] for i in train_idx], [clips[i] for i in val_idx])


def make_pairs(clips, table: WordEmbeddingTable, to_model_space=None):
    pairs = []
    for clip in clips:
        proc = process(clip.sequence)
        target = proc.features if to_model_space is None else to_model_space(proc.features)
        for sentence in clip.sentences:
            pairs.append(Pair(clip.id, sentence, embed_sentence(sentence, table), proc,
                              np.asarray(target, dtype=np.float64), dict(clip.meta)))
    return pairs


def prepare_split(clips, model, config: TrainConfig, table=None) -> SplitCorpus:
    """Split clips, fit the model's feature normalisation on training clips, build pairs."""
    if table is None:
        table = WordEmbeddingTable(model.config.word_dim)
    split = split_data(clips, config.val_fraction, config.seed)
    model.fit_normalization(process(c.sequence).features for c in split.train_clips)
    split.train = make_pairs(split.train_clips, table, model.to_model_space)
    split.val = make_pairs(split.val_clips, table, model.to_model_space)
    return split


def _path_loss(model, path, pairs, t, loss_fn):
    if path == CROSS:
        return model.cross_loss(pairs, t, loss_fn)
    return model.auto_loss(pairs, t, loss_fn)


def _grouped(pairs, paths, t):
    """Group a batch by (path, effective horizon); clips shorter than t use their length."""
    groups = {}
    for p, r in zip(pairs, paths):
        groups.setdefault((r, min(t, len(p))), []).append(p)
    return sorted(groups.items(), key=lambda kv: kv[0])


def validation_loss(model, pairs, t, loss_fn, path=CROSS, chunk=64):
    """Mean per-pair loss over ``pairs`` at horizon ``t`` (no tape, no grads)."""
    if not pairs:
        return float("nan")
    total = 0.0
    for (r, te), group in _grouped(pairs, [path] * len(pairs), t):
        for i in range(0, len(group), chunk):
            sub = group[i:i + chunk]
            total += _path_loss(model, r, sub, te, loss_fn).item() * len(sub)
    return total / len(pairs)


class Trainer:
    """Runs one training job; all randomness comes from ``config.seed``."""

    def __init__(self, model, config: TrainConfig):
        self.model = model
        self.config = config
        self.loss_fn = ad.LOSSES[config.loss]
        self.rng = np.random.default_rng(config.seed)
        self.opt = ad.OptimizerState(config.optimizer, config.lr)
        self.curriculum = CurriculumState()

    def _flip(self, phase):
        if phase == "auto":
            return AUTO
        if phase == "cross":
            return CROSS
        return AUTO if self.rng.random() < self.config.coin_prob else CROSS

    def _update(self, batch, paths, t, trainable):
        tape = ad.Tape()
        with tape:
            total = None
            for (r, te), group in _grouped(batch, paths, t):
                loss = _path_loss(self.model, r, group, te, self.loss_fn)
                weighted = ad.scale(loss, len(group) / len(batch))
                total = weighted if total is None else ad.add(total, weighted)
        value = total.item()
        if not math.isfinite(value):
            raise TrainingError(f"non-finite loss {value} at horizon t={t}")
        ad.backward(total, tape)
        named = self.model.named_parameters()
        active = {k: named[k] for k in trainable if named[k].grad is not None}
        for k, p in named.items():
            if k not in active:
                p.grad = None
        if active:
            if self.config.clip_norm:
                ad.clip_grad_norm(active, self.config.clip_norm)
            ad.optimizer_step(active, self.opt)
        return value

    def run_epoch(self, pairs, t, phase, trainable, report: StageReport):
        order = self.rng.permutation(len(pairs))
        bs = self.config.batch_size
        losses = []
        for i in range(0, len(order), bs):
            batch = [pairs[j] for j in order[i:i + bs]]
            paths = [self._flip(phase) for _ in batch]
            for r in paths:
                report.tally["auto" if r == AUTO else "cross"] += 1
            losses.append(self._update(batch, paths, t, trainable) * len(batch))
        return sum(losses) / max(len(pairs), 1)

    def train_stage(self, split: SplitCorpus, t, phase="joint", trainable=None):
        """Epochs at horizon ``t`` until validation loss stops improving."""
        if t > self.config.max_T:
            raise ValueError(f"stage horizon {t} exceeds max_T {self.config.max_T}")
        if trainable is None:
            trainable = list(self.model.named_parameters())
        cur = self.curriculum
        cur.t = t
        cur.best_val = math.inf  # reset on every stage
        report = StageReport(phase, t, best_val_at_start=cur.best_val)
        val_path = AUTO if phase == "auto" else CROSS
        bad = 0
        while True:
            tr = self.run_epoch(split.train, t, phase, trainable, report)
            val = validation_loss(self.model, split.val, t, self.loss_fn, val_path)
            report.epochs += 1
            report.train_loss.append(tr)
            report.val_loss.append(val)
            log.info("phase=%s t=%d epoch=%d train=%.5f val=%.5f",
                     phase, t, report.epochs, tr, val)
            if val < cur.best_val:
                cur.best_val, bad = val, 0
            else:
                bad += 1
            if bad >= self.config.patience:
                report.stop_reason = "validation"
                break
            if report.epochs >= self.config.max_epochs_per_stage:
                report.stop_reason = "epoch_cap"
                break
        cur.history.append((t, report.epochs, report.val_loss[-1]))
        return report

    def phases(self):
        groups = self.model.parameter_groups()
        names = {g: list(ps) for g, ps in groups.items()}
        if self.config.embedding_mode == "joint":
            return [("joint", [k for g in names for k in names[g]])]
        return [("auto", names["pose_encoder"] + names["decoder"]),
                ("cross", names["sentence_encoder"])]

    def fit(self, split: SplitCorpus) -> dict:
        schedule = curriculum_schedule(self.config.max_T, self.config.curriculum)
        stages = []
        for phase, trainable in self.phases():
            for t in schedule:
                stages.append(self.train_stage(split, t, phase, trainable))
        return {
            "config": asdict(self.config),
            "seed": self.config.seed,
            "schedule": schedule,
            "stages": [asdict(s) for s in stages],
            "total_epochs": sum(s.epochs for s in stages),
            "optimizer_steps": self.opt.step,
            "train_clips": [c.id for c in split.train_clips],
            "val_clips": [c.id for c in split.val_clips],
        }


def train(model, corpus, config: TrainConfig, table=None):
    """Train ``model`` in place; ``corpus`` is a list of clips or a prepared SplitCorpus.

    Returns ``(model, report)``.
    """
    split = corpus if isinstance(corpus, SplitCorpus) else prepare_split(
        corpus, model, config, table)
    report = Trainer(model, config).fit(split)
    return model, report

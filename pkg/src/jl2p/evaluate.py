"""Generate poses for (sentence, clip) pairs and score them; embedding-space probes."""

from __future__ import annotations

import numpy as np

from .metrics import evaluate_sequences
from .pose import ProcessedSequence, invert
from .trainer import Pair


def generate_for_pairs(model, pairs, horizon=None, chunk=64):
    """Absolute-position predictions for each pair, started at the truth's initial root pose.

    Each pair is generated for ``min(len(pair), horizon)`` frames.
    """
    out = [None] * len(pairs)
    by_len = {}
    for i, p in enumerate(pairs):
        t = len(p) if horizon is None else min(len(p), horizon)
        by_len.setdefault(t, []).append(i)
    for t, idx in sorted(by_len.items()):
        for s in range(0, len(idx), chunk):
            part = idx[s:s + chunk]
            feats = model.generate_batch([pairs[i].tokens for i in part], t)
            for i, f in zip(part, feats):
                proc = pairs[i].processed
                out[i] = invert(ProcessedSequence(proc.skeleton, f, proc.fps, proc.initial_root))
    return out


def truth_for_pairs(pairs, horizon=None):
    res = []
    for p in pairs:
        t = len(p) if horizon is None else min(len(p), horizon)
        seq = invert(p.processed)
        seq.frames = seq.frames[:t]
        res.append(seq)
    return res


def evaluate_pairs(model, pairs: list[Pair], horizon=None, ground_truth=False):
    """EvalReport for generated (or, with ``ground_truth``, oracle) poses."""
    truths = truth_for_pairs(pairs, horizon)
    preds = truths if ground_truth else generate_for_pairs(model, pairs, horizon)
    root = pairs[0].processed.skeleton.root_index
    ids = [f"{p.clip_id}:{p.sentence}" for p in pairs]
    return evaluate_sequences(preds, truths, root_index=root, ids=ids)


def _unit(rows):
    n = np.linalg.norm(rows, axis=1, keepdims=True)
    return rows / np.where(n == 0, 1.0, n)


def embedding_probe(model, pairs, horizon=None, label_key="label"):
    """Cosine distances of paired vs mismatched codes and sentence->pose retrieval.

    Retrieval searches over one pose code per clip; a hit is a clip whose
    ``meta[label_key]`` equals the query sentence's.
    """
    zx = model.encode_sentence([p.tokens for p in pairs]).data
    clip_ids = list(dict.fromkeys(p.clip_id for p in pairs))
    first = {cid: next(p for p in pairs if p.clip_id == cid) for cid in clip_ids}
    poses = []
    for cid in clip_ids:
        tgt = first[cid].target
        poses.append(tgt if horizon is None else tgt[:horizon])
    lens = {len(a) for a in poses}
    if len(lens) == 1:
        zy_clip = model.encode_pose(np.stack(poses)).data
    else:
        zy_clip = np.stack([model.encode_pose(a).data for a in poses])
    col = {cid: i for i, cid in enumerate(clip_ids)}
    ux, uy = _unit(zx), _unit(zy_clip)
    cos = ux @ uy.T  # (pairs, clips)
    own = np.array([col[p.clip_id] for p in pairs])
    paired = 1.0 - cos[np.arange(len(pairs)), own]
    mask = np.ones_like(cos, dtype=bool)
    mask[np.arange(len(pairs)), own] = False
    mismatched = 1.0 - cos[mask]
    labels = [first[cid].meta.get(label_key) for cid in clip_ids]
    nearest = cos.argmax(axis=1)
    hits = [labels[nearest[i]] == p.meta.get(label_key) for i, p in enumerate(pairs)]
    n_classes = len(set(labels))
    return {
        "paired_cosine_distance": float(paired.mean()),
        "mismatched_cosine_distance": float(mismatched.mean()),
        "retrieval_accuracy": float(np.mean(hits)),
        "chance": 1.0 / n_classes,
        "classes": n_classes,
    }

"""Positional error metrics on absolute joint positions (mm)."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .pose import PoseSequence

DEFAULT_SIGMAS = (35.0, 40.0, 45.0, 50.0, 55.0)
SCHEMA_VERSION = 1


class MetricError(ValueError):
    pass


def _pair_frames(pred, truth):
    p = pred.frames if isinstance(pred, PoseSequence) else np.asarray(pred, dtype=np.float64)
    y = truth.frames if isinstance(truth, PoseSequence) else np.asarray(truth, dtype=np.float64)
    if p.shape != y.shape:
        raise MetricError(f"prediction shape {p.shape} != ground truth shape {y.shape}")
    if isinstance(pred, PoseSequence) and isinstance(truth, PoseSequence) \
            and pred.skeleton.joint_names != truth.skeleton.joint_names:
        raise MetricError("prediction and ground truth use different skeletons")
    return p, y


def joint_errors(pred, truth) -> np.ndarray:
    """Euclidean error per (frame, joint), shape ``(T, J)``."""
    p, y = _pair_frames(pred, truth)
    return np.linalg.norm(p - y, axis=-1)


def ape(pred, truth, joint: int) -> float:
    """Mean over frames of joint ``joint``'s Euclidean error."""
    return float(joint_errors(pred, truth)[:, joint].mean())


def pck(pred, truth, sigma: float) -> float:
    """Fraction of (frame, joint) keypoints within ``sigma`` mm."""
    if not sigma > 0:
        raise MetricError(f"sigma must be positive, got {sigma}")
    return float((joint_errors(pred, truth) <= sigma).mean())


def pck_curve(errors, sigmas=DEFAULT_SIGMAS) -> dict:
    """PCK per threshold from pooled ``(…, J)`` error arrays."""
    e = np.asarray(errors)
    for s in sigmas:
        if not s > 0:
            raise MetricError(f"sigma must be positive, got {s}")
    return {float(s): float((e <= s).mean()) for s in sigmas}


def pck_sweep(pred, truth, sigmas=DEFAULT_SIGMAS) -> dict:
    return pck_curve(joint_errors(pred, truth), sigmas)


def default_part_groups(joint_names, root_index=0) -> dict:
    """Root / Torso / Head / Arms / Legs by joint-name keywords."""
    groups = {"Root": [], "Torso": [], "Head": [], "Arms": [], "Legs": []}
    for i, name in enumerate(joint_names):
        n = name.lower()
        if i == root_index:
            groups["Root"].append(i)
        elif "head" in n or "neck" in n:
            groups["Head"].append(i)
        elif any(k in n for k in ("arm", "hand", "wrist", "elbow", "shoulder")):
            groups["Arms"].append(i)
        elif any(k in n for k in ("leg", "foot", "knee", "ankle", "hip", "toe")):
            groups["Legs"].append(i)
        else:
            groups["Torso"].append(i)
    return {k: v for k, v in groups.items() if v}


def _check_partition(groups, J):
    seen = sorted(j for idx in groups.values() for j in idx)
    if seen != list(range(J)):
        raise MetricError(f"part groups {groups} do not partition {J} joints")


def ape_by_part_over_time(pred, truth, groups) -> dict:
    """``{part: (T,) array}`` of the mean error over the part's joints at each frame."""
    e = joint_errors(pred, truth)
    _check_partition(groups, e.shape[1])
    return {name: e[:, idx].mean(axis=1) for name, idx in groups.items()}


@dataclass
class Trajectory:
    points: np.ndarray  # (T, 2) root (x, z), frame 0 at the origin
    times: np.ndarray  # seconds

    def __len__(self):
        return len(self.points)

    @property
    def path_length(self):
        return float(np.linalg.norm(np.diff(self.points, axis=0), axis=1).sum())

    @property
    def displacement(self):
        return self.points[-1] - self.points[0]


def trajectory(seq: PoseSequence) -> Trajectory:
    xz = seq.root[:, [0, 2]]
    return Trajectory(xz - xz[0], np.arange(len(seq)) / seq.fps)


# ---------------------------------------------------------------------------
# aggregated report


@dataclass
class EvalReport:
    joint_names: list
    per_joint_ape: dict
    mean_ape: float
    mean_ape_without_root: float
    pck: dict
    ape_over_time: dict  # part -> list per timestep
    fps: float
    clip_count: int
    per_clip: list = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_json(self):
        d = asdict(self)
        d["pck"] = {f"{k:g}": v for k, v in self.pck.items()}
        return json.dumps(d, indent=2, sort_keys=True)


def evaluate_sequences(preds, truths, root_index=0, groups=None, sigmas=DEFAULT_SIGMAS,
                       ids=None) -> EvalReport:
    """Aggregate over clips with every (clip, frame) weighted equally per joint."""
    if len(preds) != len(truths) or not preds:
        raise MetricError("need equally many (and at least one) predictions and truths")
    names = list(truths[0].skeleton.joint_names)
    errs = [joint_errors(p, y) for p, y in zip(preds, truths)]
    pooled = np.concatenate(errs, axis=0)
    per_joint = pooled.mean(axis=0)
    non_root = [j for j in range(len(names)) if j != root_index]
    groups = groups or default_part_groups(names, root_index)
    _check_partition(groups, len(names))
    # per-timestep curves average over the clips long enough to reach that step
    T = max(len(e) for e in errs)
    over_time = {}
    for part, idx in groups.items():
        sums, counts = np.zeros(T), np.zeros(T)
        for e in errs:
            sums[:len(e)] += e[:, idx].mean(axis=1)
            counts[:len(e)] += 1
        over_time[part] = (sums / counts).tolist()
    per_clip = [{"id": ids[i] if ids else i, "mean_ape": float(e.mean()),
                 "per_joint_ape": e.mean(axis=0).tolist()} for i, e in enumerate(errs)]
    return EvalReport(
        joint_names=names,
        per_joint_ape={n: float(v) for n, v in zip(names, per_joint)},
        mean_ape=float(per_joint.mean()),
        mean_ape_without_root=float(per_joint[non_root].mean()),
        pck=pck_curve(pooled, sigmas),
        ape_over_time=over_time,
        fps=float(truths[0].fps),
        clip_count=len(errs),
        per_clip=per_clip,
    )


def write_report(report: EvalReport, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"json": out / "eval_report.json", "pck_csv": out / "pck.csv",
             "ape_time_csv": out / "ape_over_time.csv"}
    paths["json"].write_text(report.to_json() + "\n")
    with open(paths["pck_csv"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sigma_mm", "pck"])
        for s, v in report.pck.items():
            w.writerow([f"{s:g}", repr(v)])
    with open(paths["ape_time_csv"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestep_ms", "part", "ape_mm"])
        for part, curve in report.ape_over_time.items():
            for t, v in enumerate(curve):
                w.writerow([f"{1000.0 * t / report.fps:g}", part, repr(v)])
    return paths

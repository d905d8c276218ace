"""Skeletons, pose sequences and the root-velocity feature representation.

Coordinates are millimetres with +Y up.  A body *faces* direction
``(sin a, 0, cos a)`` for facing angle ``a``; ``a = 0`` is +Z.

Per-frame feature layout (``F = 4 + 3 * (J - 1)``)::

    [vx, vz, omega, root_y, x_1, y_1, z_1, ..., x_{J-1}, y_{J-1}, z_{J-1}]

``vx, vz`` is the root's XZ displacement since the previous frame, expressed
in the previous frame's facing frame; ``omega`` is the change in facing
angle.  Non-root joints are root-centred on the ground plane and rotated so
the body faces +Z; their heights stay absolute.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FACING_PAIRS = (("l_hip", "r_hip"), ("left_hip", "right_hip"), ("lhip", "rhip"),
                ("l_leg", "r_leg"), ("left_leg", "right_leg"))


CORPUS_SCHEMA_VERSION = 1


class PoseError(ValueError):
    pass


@dataclass(frozen=True)
class Skeleton:
    joint_names: tuple
    root_index: int = 0
    facing_pair: tuple | None = None

    def __post_init__(self):
        names = tuple(self.joint_names)
        object.__setattr__(self, "joint_names", names)
        if len(names) < 2:
            raise PoseError("a skeleton needs at least 2 joints")
        if len(set(names)) != len(names):
            raise PoseError(f"duplicate joint names in {names}")
        if not 0 <= self.root_index < len(names):
            raise PoseError(f"root_index {self.root_index} out of range for {len(names)} joints")
        if self.facing_pair is None:
            for pair in FACING_PAIRS:
                if pair[0] in names and pair[1] in names:
                    object.__setattr__(self, "facing_pair", pair)
                    break
        elif any(n not in names for n in self.facing_pair):
            raise PoseError(f"facing pair {self.facing_pair} not in skeleton")

    @property
    def joint_count(self):
        return len(self.joint_names)

    @property
    def feature_dim(self):
        return 4 + 3 * (self.joint_count - 1)

    def index(self, name):
        return self.joint_names.index(name)

    def layout(self):
        return {"joint_names": list(self.joint_names), "root_index": self.root_index}


@dataclass
class PoseSequence:
    skeleton: Skeleton
    frames: np.ndarray  # (T, J, 3)
    fps: float

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        J = self.skeleton.joint_count
        if self.frames.ndim != 3 or self.frames.shape[1:] != (J, 3) or len(self.frames) < 1:
            raise PoseError(f"frames must be (T>=1, {J}, 3), got {self.frames.shape}")
        if not np.all(np.isfinite(self.frames)):
            raise PoseError("non-finite coordinates in pose sequence")
        if not self.fps > 0:
            raise PoseError(f"fps must be positive, got {self.fps}")

    def __len__(self):
        return len(self.frames)

    @property
    def root(self):
        return self.frames[:, self.skeleton.root_index]


@dataclass
class ProcessedSequence:
    skeleton: Skeleton
    features: np.ndarray  # (T, F)
    fps: float
    initial_root: tuple = (0.0, 0.0, 0.0)  # x, z, facing angle

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        F = self.skeleton.feature_dim
        if self.features.ndim != 2 or self.features.shape[1] != F:
            raise PoseError(f"features must be (T, {F}), got {self.features.shape}")

    def __len__(self):
        return len(self.features)


def rotate_y(xz: np.ndarray, angle) -> np.ndarray:
    """Rotate ``(..., 2)`` XZ vectors about +Y; ``angle`` broadcasts over leading axes."""
    c, s = np.cos(angle), np.sin(angle)
    x, z = xz[..., 0], xz[..., 1]
    return np.stack([x * c + z * s, -x * s + z * c], axis=-1)


def wrap_angle(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def forward_vectors(seq: PoseSequence) -> np.ndarray:
    """Ground-plane forward vector per frame, ``(T, 2)`` as (x, z), unnormalised."""
    sk = seq.skeleton
    if sk.facing_pair is None:
        raise PoseError(f"skeleton {sk.joint_names} has no facing joint pair")
    left, right = (sk.index(n) for n in sk.facing_pair)
    axis = seq.frames[:, right] - seq.frames[:, left]
    # +Y cross hip axis
    return np.stack([axis[:, 2], -axis[:, 0]], axis=-1)


def facing_angles(seq: PoseSequence, eps=1e-9) -> np.ndarray:
    fwd = forward_vectors(seq)
    norms = np.linalg.norm(fwd, axis=1)
    angles = np.arctan2(fwd[:, 0], fwd[:, 1])
    if norms[0] < eps:
        raise PoseError("facing direction is degenerate in the first frame")
    for t in range(1, len(angles)):
        if norms[t] < eps:
            angles[t] = angles[t - 1]
    return angles


def _rotate_about_root(seq: PoseSequence, angles) -> np.ndarray:
    frames = seq.frames.copy()
    root = frames[:, seq.skeleton.root_index, :][:, None, :]
    rel = frames[..., [0, 2]] - root[..., [0, 2]]
    frames[..., [0, 2]] = rotate_y(rel, np.asarray(angles)[:, None]) + root[..., [0, 2]]
    return frames


def normalize_facing(seq: PoseSequence):
    """Rotate every frame about the vertical through its root so it faces +Z.

    Returns ``(normalized_sequence, angles)``; ``restore_facing`` undoes it.
    """
    angles = facing_angles(seq)
    frames = _rotate_about_root(seq, -angles)
    return PoseSequence(seq.skeleton, frames, seq.fps), angles


def restore_facing(seq: PoseSequence, angles) -> PoseSequence:
    return PoseSequence(seq.skeleton, _rotate_about_root(seq, angles), seq.fps)


def process(seq: PoseSequence) -> ProcessedSequence:
    T = len(seq)
    if T < 2:
        raise PoseError(f"processing needs at least 2 frames, got {T}")
    sk = seq.skeleton
    theta = facing_angles(seq)
    root = seq.root
    root_xz = root[:, [0, 2]]

    vel = np.empty((T, 2))
    vel[1:] = rotate_y(np.diff(root_xz, axis=0), -theta[:-1])
    vel[0] = vel[1]
    omega = np.empty(T)
    omega[1:] = wrap_angle(np.diff(theta))
    omega[0] = omega[1]

    others = [j for j in range(sk.joint_count) if j != sk.root_index]
    joints = seq.frames[:, others]
    local = joints.copy()
    local[..., [0, 2]] = rotate_y(joints[..., [0, 2]] - root_xz[:, None], -theta[:, None])

    feats = np.concatenate(
        [vel, omega[:, None], root[:, 1:2], local.reshape(T, -1)], axis=1)
    init = (float(root_xz[0, 0]), float(root_xz[0, 1]), float(theta[0]))
    return ProcessedSequence(sk, feats, seq.fps, init)


def invert(proc: ProcessedSequence, initial_root=None) -> PoseSequence:
    """Integrate root velocities from the initial root pose back to absolute positions.

    ``initial_root`` overrides the stored ``(x, z, angle)`` start, e.g. to
    place generated motion at a ground-truth clip's starting pose.
    """
    sk = proc.skeleton
    f = proc.features
    T = len(f)
    x0, z0, a0 = proc.initial_root if initial_root is None else initial_root
    theta = np.empty(T)
    xz = np.empty((T, 2))
    theta[0] = a0
    xz[0] = (x0, z0)
    for t in range(1, T):
        xz[t] = xz[t - 1] + rotate_y(f[t, 0:2], theta[t - 1])
        theta[t] = theta[t - 1] + f[t, 2]

    J = sk.joint_count
    frames = np.empty((T, J, 3))
    r = sk.root_index
    frames[:, r, 0] = xz[:, 0]
    frames[:, r, 1] = f[:, 3]
    frames[:, r, 2] = xz[:, 1]
    local = f[:, 4:].reshape(T, J - 1, 3)
    others = [j for j in range(J) if j != r]
    world = local.copy()
    world[..., [0, 2]] = rotate_y(local[..., [0, 2]], theta[:, None]) + xz[:, None]
    frames[:, others] = world
    return PoseSequence(sk, frames, proc.fps)


def subsample(seq: PoseSequence, target_fps: float) -> PoseSequence:
    """Keep every ``fps / target_fps``-th frame starting at frame 0."""
    if not target_fps > 0:
        raise PoseError(f"target rate must be positive, got {target_fps}")
    ratio = seq.fps / target_fps
    stride = int(round(ratio))
    if stride < 1 or abs(ratio - stride) > 1e-9:
        raise PoseError(f"cannot subsample {seq.fps} Hz to {target_fps} Hz: "
                        f"stride {ratio:g} is not a positive integer")
    return PoseSequence(seq.skeleton, seq.frames[::stride].copy(), target_fps)


# ---------------------------------------------------------------------------
# corpus files


@dataclass
class Clip:
    id: str
    sentences: list
    sequence: PoseSequence
    meta: dict = field(default_factory=dict)


def clip_to_record(clip: Clip) -> dict:
    seq = clip.sequence
    return {
        "schema_version": CORPUS_SCHEMA_VERSION,
        "id": clip.id,
        "sentences": list(clip.sentences),
        "fps": seq.fps,
        "joint_names": list(seq.skeleton.joint_names),
        "root_index": seq.skeleton.root_index,
        "frames": seq.frames.tolist(),
        **({"meta": clip.meta} if clip.meta else {}),
    }


def clip_from_record(rec: dict) -> Clip:
    for key in ("id", "sentences", "fps", "joint_names", "root_index", "frames"):
        if key not in rec:
            raise PoseError(f"corpus record missing {key!r}")
    sk = Skeleton(tuple(rec["joint_names"]), int(rec["root_index"]))
    if not rec["sentences"]:
        raise PoseError(f"clip {rec['id']!r} has no sentences")
    return Clip(str(rec["id"]), list(rec["sentences"]),
                PoseSequence(sk, np.asarray(rec["frames"], dtype=np.float64), rec["fps"]),
                dict(rec.get("meta", {})))


def dumps_corpus(clips) -> str:
    return "".join(json.dumps(clip_to_record(c)) + "\n" for c in clips)


def write_corpus(path, clips):
    Path(path).write_text(dumps_corpus(clips))


def read_corpus(path) -> list:
    clips = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                clips.append(clip_from_record(json.loads(line)))
            except (json.JSONDecodeError, PoseError) as e:
                raise PoseError(f"{path}:{lineno}: {e}") from e
    return clips

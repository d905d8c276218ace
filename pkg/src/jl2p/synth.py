"""Parametric toy motions with templated descriptions.

Eight-joint skeleton, 12.5 Hz.  Bodies start at the origin facing +Z; the
body's left is +X.  Locomotion translates the root at 5 / 10 / 20 mm per
frame for slow / normal / fast; straight walks and runs keep facing +Z and
step sideways or backwards as needed, circles face along the path.  Legs
only lift vertically so the foot pair always gives a clean facing direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pose import Clip, PoseSequence, Skeleton, rotate_y, write_corpus

JOINTS = ("root", "torso", "head", "l_arm", "r_arm", "l_leg", "r_leg", "pelvis")
SKELETON = Skeleton(JOINTS, root_index=0, facing_pair=("l_leg", "r_leg"))
FPS = 12.5

# rest pose in the body frame: x = left, y = up, z = forward
REST = np.array([
    [0.0, 900.0, 0.0],     # root
    [0.0, 1250.0, 0.0],    # torso
    [0.0, 1650.0, 0.0],    # head
    [250.0, 1000.0, 0.0],  # l_arm
    [-250.0, 1000.0, 0.0],  # r_arm
    [100.0, 80.0, 0.0],    # l_leg
    [-100.0, 80.0, 0.0],   # r_leg
    [0.0, 850.0, -40.0],   # pelvis
])

ACTIONS = ("walk", "run", "wave", "kneel", "turn", "stand")
DIRECTIONS = ("forward", "backward", "left", "right", "circle")
SPEEDS = ("slow", "normal", "fast")
LOCOMOTION = ("walk", "run")
STATIC = ("wave", "kneel", "stand")

SPEED_MM = {"slow": 5.0, "normal": 10.0, "fast": 20.0}
TURN_RATE = {"slow": np.pi / 64, "normal": np.pi / 32, "fast": np.pi / 16}
STEP_SCALE = {"slow": 0.75, "normal": 1.0, "fast": 1.5}
HEADING = {"forward": (0.0, 1.0), "backward": (0.0, -1.0),
           "left": (1.0, 0.0), "right": (-1.0, 0.0)}
CIRCLE_RADIUS = 300.0
NOISE_MM = 1.0

# the eight classes the corpus grid cycles through
CLASSES = (
    ("walk", "forward"), ("walk", "left"), ("walk", "right"), ("run", "forward"),
    ("wave", None), ("kneel", None), ("turn", None), ("stand", None),
)


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class MotionSpec:
    action: str
    direction: str | None = None
    speed: str | None = None
    duration: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.action not in ACTIONS:
            raise SpecError(f"unknown action {self.action!r}")
        if self.direction is not None and self.direction not in DIRECTIONS:
            raise SpecError(f"unknown direction {self.direction!r}")
        if self.speed is not None and self.speed not in SPEEDS:
            raise SpecError(f"unknown speed {self.speed!r}")
        if self.duration < 2:
            raise SpecError(f"duration must be >= 2 frames, got {self.duration}")
        if self.action == "turn" and self.direction not in (None, "left", "right"):
            raise SpecError(f"turn needs direction left or right, got {self.direction!r}")

    @property
    def resolved_direction(self):
        if self.action in STATIC:
            return None
        if self.action == "turn":
            return self.direction or "left"
        return self.direction or "forward"

    @property
    def resolved_speed(self):
        return None if self.action in STATIC else (self.speed or "normal")

    @property
    def label(self):
        """Motion class: action plus direction for straight locomotion."""
        if self.action in LOCOMOTION:
            return f"{self.action}-{self.resolved_direction}"
        return self.action


def circle_period(spec: MotionSpec) -> int:
    """Frames needed to go once round the circle at the spec's speed."""
    return int(round(2 * np.pi * CIRCLE_RADIUS / SPEED_MM[spec.resolved_speed]))


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3 - 2 * x)


def _body_motion(spec: MotionSpec, t: np.ndarray) -> np.ndarray:
    """Body-frame joint positions ``(T, J, 3)`` before root placement."""
    T = len(t)
    body = np.repeat(REST[None], T, axis=0)
    a = spec.action
    if a in ("walk", "run", "turn"):
        speed = spec.resolved_speed
        base = {"walk": 1 / 16, "run": 1 / 10, "turn": 1 / 16}[a]
        phase = 2 * np.pi * base * STEP_SCALE[speed] * t
        arm_swing = {"walk": 150.0, "run": 250.0, "turn": 40.0}[a]
        lift = {"walk": 100.0, "run": 200.0, "turn": 50.0}[a]
        bob = {"walk": 20.0, "run": 40.0, "turn": 5.0}[a]
        body[:, 3, 2] += arm_swing * np.sin(phase)
        body[:, 4, 2] -= arm_swing * np.sin(phase)
        body[:, 5, 1] += lift * np.maximum(0.0, np.sin(phase))
        body[:, 6, 1] += lift * np.maximum(0.0, -np.sin(phase))
        body[:, [0, 1, 2, 3, 4, 7], 1] += (bob * np.cos(2 * phase))[:, None]
        if a == "run":
            body[:, [3, 4], 1] += 150.0
            body[:, [1, 2], 2] += 80.0
    elif a == "wave":
        body[:, 4] = [-300.0, 1750.0, 50.0]
        body[:, 4, 0] += 150.0 * np.sin(2 * np.pi * t / 8)
        body[:, 3, 2] += 20.0 * np.sin(2 * np.pi * t / 16)
    elif a == "kneel":
        s = _smoothstep(t / 12.0)
        body[:, [0, 1, 2, 3, 4, 7], 1] -= (400.0 * s)[:, None]
        body[:, [1, 2], 2] += (100.0 * s)[:, None]
        body[:, [3, 4], 2] += (150.0 * s)[:, None]
        body[:, [5, 6], 2] -= (150.0 * s)[:, None]
    else:  # stand
        body[:, [1, 2, 3, 4], 1] += (5.0 * np.sin(2 * np.pi * t / 24))[:, None]
    return body


def _root_path(spec: MotionSpec, t: np.ndarray):
    """Root ``(x, z)`` per frame and facing angle per frame."""
    T = len(t)
    xz = np.zeros((T, 2))
    heading = np.zeros(T)
    direction, speed = spec.resolved_direction, spec.resolved_speed
    if spec.action in LOCOMOTION:
        v = SPEED_MM[speed]
        if direction == "circle":
            w = v / CIRCLE_RADIUS
            ang = w * t
            # counter-clockwise seen from above, starting at the origin facing +Z
            xz[:, 0] = CIRCLE_RADIUS * (1 - np.cos(ang))
            xz[:, 1] = CIRCLE_RADIUS * np.sin(ang)
            heading = ang
        else:
            xz = np.outer(t * v, HEADING[direction])
    elif spec.action == "turn":
        sign = 1.0 if direction == "left" else -1.0
        heading = sign * TURN_RATE[speed] * t
    return xz, heading


def generate_motion(spec: MotionSpec) -> PoseSequence:
    t = np.arange(spec.duration, dtype=np.float64)
    body = _body_motion(spec, t)
    xz, heading = _root_path(spec, t)
    frames = body.copy()
    frames[..., [0, 2]] = rotate_y(body[..., [0, 2]], heading[:, None]) + xz[:, None]
    rng = np.random.default_rng([spec.seed, spec.duration])
    frames = frames + rng.normal(0.0, NOISE_MM, size=frames.shape)
    return PoseSequence(SKELETON, np.round(frames, 4), FPS)


_SPEED_ADV = {"slow": "slowly", "normal": "", "fast": "fast"}
_SPEED_ADV2 = {"slow": "slowly", "normal": "", "fast": "quickly"}
_DIR = {"forward": "forward", "backward": "backward", "left": "left", "right": "right",
        "circle": "in a circle"}
_DIR2 = {"forward": "ahead", "backward": "backwards", "left": "to the left",
         "right": "to the right", "circle": "around in a circle"}
_VERB = {"walk": ("walks", "walking"), "run": ("runs", "running")}


def _join(*words):
    return " ".join(w for w in words if w)


def generate_sentences(spec: MotionSpec) -> list:
    a = spec.action
    if a in LOCOMOTION:
        d, s = spec.resolved_direction, spec.resolved_speed
        verb, gerund = _VERB[a]
        return [
            _join("a person", verb, _DIR[d], _SPEED_ADV[s]),
            _join("someone", _SPEED_ADV2[s], verb, _DIR2[d]),
            _join("a human is", gerund, _DIR2[d], _SPEED_ADV2[s]),
        ]
    if a == "turn":
        d, s = spec.resolved_direction, spec.resolved_speed
        return [
            _join("a person turns", d, _SPEED_ADV[s]),
            _join("someone", _SPEED_ADV2[s], "turns around to the", d),
        ]
    return {
        "wave": ["a person waves", "someone waves with the right hand"],
        "kneel": ["a person kneels down", "someone goes down on the knees"],
        "stand": ["a person stands still", "someone is standing in place"],
    }[a]


def clip_spec(index: int, seed: int, duration: int = 32) -> MotionSpec:
    """Deterministic grid: class cycles fastest, then speed, then turn direction."""
    action, direction = CLASSES[index % len(CLASSES)]
    speed = SPEEDS[(index // len(CLASSES)) % len(SPEEDS)]
    if action == "turn":
        direction = ("left", "right")[(index // (len(CLASSES) * len(SPEEDS))) % 2]
    if action in STATIC:
        direction, speed = None, None
    return MotionSpec(action, direction, speed, duration, seed=seed * 100003 + index)


def build_corpus(n_clips: int, seed: int, path=None, duration: int = 32) -> list:
    if n_clips < len(CLASSES):
        raise SpecError(f"need at least {len(CLASSES)} clips to cover every class, "
                        f"got {n_clips}")
    clips = []
    for i in range(n_clips):
        spec = clip_spec(i, seed, duration)
        clips.append(Clip(f"synth-{seed}-{i:05d}", generate_sentences(spec),
                          generate_motion(spec),
                          {"action": spec.action, "direction": spec.resolved_direction,
                           "speed": spec.resolved_speed, "label": spec.label}))
    if path is not None:
        write_corpus(path, clips)
    return clips

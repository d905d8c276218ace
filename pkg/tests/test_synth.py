import numpy as np
import pytest

from jl2p import synth
from jl2p.metrics import trajectory
from jl2p.pose import invert, process, read_corpus
from jl2p.synth import MotionSpec, SpecError, build_corpus, generate_motion, generate_sentences


def final_displacement(spec):
    root = generate_motion(spec).root
    return root[-1, [0, 2]] - root[0, [0, 2]]


def test_stand_root_stays_within_noise():
    traj = trajectory(generate_motion(MotionSpec("stand", seed=1)))
    # per-axis noise is 1 mm; 6 sigma on the planar distance is generous
    assert np.max(np.linalg.norm(traj.points, axis=1)) < 6 * np.sqrt(2) * synth.NOISE_MM


def test_fast_is_twice_normal():
    fast = np.linalg.norm(final_displacement(MotionSpec("walk", "forward", "fast")))
    normal = np.linalg.norm(final_displacement(MotionSpec("walk", "forward", "normal")))
    assert fast / normal == pytest.approx(2.0, rel=0.02)


@pytest.mark.parametrize("action", ["walk", "run"])
@pytest.mark.parametrize("direction", ["forward", "left", "right", "backward", "circle"])
def test_speed_ordering(action, direction):
    lengths = [trajectory(generate_motion(MotionSpec(action, direction, s))).path_length
               for s in ("slow", "normal", "fast")]
    assert lengths[0] < lengths[1] < lengths[2]


@pytest.mark.parametrize("speed", ["normal", "fast"])
def test_circle_closes(speed):
    spec = MotionSpec("walk", "circle", speed)
    period = synth.circle_period(spec)
    root = generate_motion(MotionSpec("walk", "circle", speed, duration=period + 1)).root
    gap = np.linalg.norm(root[-1, [0, 2]] - root[0, [0, 2]])
    assert gap < 0.1 * 2 * np.pi * synth.CIRCLE_RADIUS


def test_left_right_reflect_across_z():
    left = final_displacement(MotionSpec("walk", "left", "normal"))
    right = final_displacement(MotionSpec("walk", "right", "normal"))
    ul, ur = left / np.linalg.norm(left), right / np.linalg.norm(right)
    assert np.allclose(ul, [-ur[0], ur[1]], atol=0.01)
    assert ul[0] > 0  # left is +X for a body facing +Z


def test_invalid_specs():
    with pytest.raises(SpecError):
        MotionSpec("fly")
    with pytest.raises(SpecError):
        MotionSpec("turn", "forward")
    with pytest.raises(SpecError):
        MotionSpec("walk", speed="warp")


def test_sentences():
    spec = MotionSpec("walk", "forward", "slow")
    sents = generate_sentences(spec)
    assert {"walks", "forward"} <= set(sents[0].split())
    assert sents == generate_sentences(MotionSpec("walk", "forward", "slow"))
    assert len(sents) >= 2 and len(set(sents)) == len(sents)


def test_generation_is_deterministic():
    spec = MotionSpec("run", "left", "fast", seed=5)
    assert np.array_equal(generate_motion(spec).frames, generate_motion(spec).frames)


def test_every_class_is_processable():
    for i in range(len(synth.CLASSES)):
        seq = generate_motion(synth.clip_spec(i, 0))
        assert np.max(np.abs(invert(process(seq)).frames - seq.frames)) < 1e-5


def test_corpus_covers_classes_and_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    clips = build_corpus(200, 7, a)
    build_corpus(200, 7, b)
    assert a.read_bytes() == b.read_bytes()
    assert {c.meta["action"] for c in clips} == set(synth.ACTIONS)
    assert len({c.meta["label"] for c in clips}) == len(synth.CLASSES)
    assert all(len(c.sentences) >= 2 for c in clips)


def test_corpus_round_trip(tmp_path):
    path = tmp_path / "c.jsonl"
    clips = build_corpus(16, 3, path)
    back = read_corpus(path)
    assert [c.id for c in back] == [c.id for c in clips]
    for x, y in zip(clips, back):
        assert x.sentences == y.sentences and x.meta == y.meta
        assert np.array_equal(x.sequence.frames, y.sequence.frames)


def test_too_few_clips():
    with pytest.raises(SpecError):
        build_corpus(3, 0)

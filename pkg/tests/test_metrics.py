import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from jl2p.metrics import (DEFAULT_SIGMAS, MetricError, ape, ape_by_part_over_time,
                          default_part_groups, evaluate_sequences, joint_errors, pck, pck_sweep,
                          trajectory, write_report)
from jl2p.pose import PoseSequence
from jl2p.synth import JOINTS, SKELETON

from conftest import brute_ape, brute_pck


def seq(frames):
    return PoseSequence(SKELETON, frames, 12.5)


def random_pair(rng, T=4):
    truth = rng.normal(0, 100, size=(T, 8, 3))
    return truth + rng.normal(0, 40, size=truth.shape), truth


class TestApe:
    def test_identity(self):
        y = np.random.default_rng(0).normal(size=(4, 8, 3))
        assert all(ape(y, y, j) == 0.0 for j in range(8))

    def test_three_four_five(self):
        y = np.zeros((6, 8, 3))
        p = y.copy()
        p[:, 2] += [3.0, 4.0, 0.0]
        assert ape(p, y, 2) == 5.0
        assert ape(p, y, 1) == 0.0

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            p, y = random_pair(rng)
            for j in range(8):
                assert abs(ape(p, y, j) - brute_ape(p, y, j)) < 1e-9

    def test_length_mismatch(self):
        with pytest.raises(MetricError):
            ape(np.zeros((3, 8, 3)), np.zeros((4, 8, 3)), 0)

    @settings(max_examples=25, deadline=None)
    @given(arrays(np.float64, (3, 8, 3), elements=st.floats(-1e3, 1e3)),
           arrays(np.float64, (3, 8, 3), elements=st.floats(-1e3, 1e3)),
           arrays(np.float64, (3,), elements=st.floats(-1e4, 1e4)))
    def test_translation_invariant(self, p, y, shift):
        a = [ape(p, y, j) for j in range(8)]
        b = [ape(p + shift, y + shift, j) for j in range(8)]
        assert np.allclose(a, b, rtol=0, atol=1e-9)


class TestPck:
    def test_zero_error(self):
        y = np.ones((2, 8, 3))
        assert pck(y, y, 35) == 1.0

    def test_counting(self):
        y = np.zeros((1, 2, 3))
        p = y.copy()
        p[0, 1, 0] = 40.0
        assert pck(p, y, 35) == 0.5

    def test_bad_sigma(self):
        with pytest.raises(MetricError):
            pck(np.zeros((1, 2, 3)), np.zeros((1, 2, 3)), 0)

    def test_matches_loop_oracle_and_is_monotone(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            p, y = random_pair(rng)
            sweep = pck_sweep(p, y)
            assert list(sweep) == list(DEFAULT_SIGMAS)
            for s, v in sweep.items():
                assert v == pytest.approx(brute_pck(p, y, s), abs=1e-12)
            vals = list(sweep.values())
            assert all(a <= b for a, b in zip(vals, vals[1:]))

    def test_limits(self):
        p, y = random_pair(np.random.default_rng(3))
        assert pck(p, y, 1e9) == 1.0
        p[0, 0] = y[0, 0]
        assert pck(p, y, 1e-12) == pytest.approx(1 / p[..., 0].size)


class TestParts:
    def test_default_groups_partition(self):
        groups = default_part_groups(JOINTS, 0)
        assert groups["Root"] == [0] and groups["Head"] == [2]
        assert groups["Arms"] == [3, 4] and groups["Legs"] == [5, 6]
        assert groups["Torso"] == [1, 7]

    def test_identical_is_zero(self):
        y = np.random.default_rng(0).normal(size=(5, 8, 3))
        curves = ape_by_part_over_time(y, y, default_part_groups(JOINTS))
        assert all(np.all(c == 0) for c in curves.values())

    def test_constant_offset_is_flat(self):
        y = np.zeros((5, 8, 3))
        curves = ape_by_part_over_time(y + [0, 3, 4], y, default_part_groups(JOINTS))
        assert all(np.allclose(c, 5.0) for c in curves.values())

    def test_joint_weighted_average_is_overall(self):
        p, y = random_pair(np.random.default_rng(4), T=6)
        groups = default_part_groups(JOINTS)
        curves = ape_by_part_over_time(p, y, groups)
        combined = sum(curves[g] * len(idx) for g, idx in groups.items()) / 8
        assert np.allclose(combined, joint_errors(p, y).mean(axis=1), atol=1e-12)

    def test_not_a_partition(self):
        y = np.zeros((2, 8, 3))
        with pytest.raises(MetricError):
            ape_by_part_over_time(y, y, {"a": [0, 1], "b": [1, 2]})


class TestTrajectory:
    def test_stationary(self):
        frames = np.tile(np.array([5.0, 900.0, -3.0]), (4, 8, 1))
        assert np.array_equal(trajectory(seq(frames)).points, np.zeros((4, 2)))

    def test_constant_velocity(self):
        frames = np.zeros((10, 8, 3))
        frames[:, :, 0] = np.arange(10.0)[:, None] + 7
        traj = trajectory(seq(frames))
        assert np.array_equal(traj.points, np.stack([np.arange(10.0), np.zeros(10)], 1))
        assert len(traj) == 10 and traj.times[1] == pytest.approx(0.08)

    def test_path_length_sums_steps(self):
        frames = np.random.default_rng(5).normal(size=(7, 8, 3))
        traj = trajectory(seq(frames))
        steps = sum(np.hypot(*(traj.points[i + 1] - traj.points[i])) for i in range(6))
        assert traj.path_length == pytest.approx(steps, abs=1e-12)


class TestReport:
    def make(self):
        rng = np.random.default_rng(6)
        pairs = [random_pair(rng, T) for T in (4, 6)]
        return evaluate_sequences([seq(p) for p, _ in pairs], [seq(y) for _, y in pairs]), pairs

    def test_aggregation(self):
        report, pairs = self.make()
        pooled = np.concatenate([joint_errors(p, y) for p, y in pairs])
        assert report.mean_ape == pytest.approx(np.mean(list(report.per_joint_ape.values())))
        assert report.per_joint_ape["head"] == pytest.approx(pooled[:, 2].mean())
        assert report.mean_ape_without_root == pytest.approx(pooled[:, 1:].mean())
        assert report.clip_count == 2
        assert len(report.ape_over_time["Root"]) == 6

    def test_files(self, tmp_path):
        report, _ = self.make()
        paths = write_report(report, tmp_path)
        rows = list(csv.reader(open(paths["pck_csv"])))
        assert rows[0] == ["sigma_mm", "pck"] and len(rows) == 6
        rows = list(csv.reader(open(paths["ape_time_csv"])))
        assert rows[0] == ["timestep_ms", "part", "ape_mm"]
        assert '"schema_version": 1' in paths["json"].read_text()

    def test_ground_truth_is_perfect(self):
        y = seq(np.random.default_rng(7).normal(size=(4, 8, 3)))
        r = evaluate_sequences([y], [y])
        assert r.mean_ape == 0.0 and set(r.pck.values()) == {1.0}

import numpy as np
import pytest

from jl2p import autodiff as ad
from jl2p.autodiff import DimensionError, Tape, Tensor
from jl2p.model import JL2PModel, ModelConfig
from jl2p.pose import process
from jl2p.synth import SKELETON, MotionSpec, generate_motion

from conftest import max_grad_error, numeric_grad, rel_err


def tiny(seed=0, F=5, K=3, h=4, H=6):
    return JL2PModel(ModelConfig(feature_dim=F, word_dim=K, latent_dim=h, sentence_hidden=H,
                                 pose_hidden=H, decoder_hidden=H, seed=seed))


class TestShapes:
    @pytest.mark.parametrize("n", [1, 8, 40])
    def test_sentence_code_length(self, n):
        m = tiny()
        assert m.encode_sentence(np.ones((n, 3))).shape == (4,)

    @pytest.mark.parametrize("t", [2, 16])
    def test_pose_code_length(self, t):
        m = tiny()
        assert m.encode_pose(np.ones((t, 5))).shape == (4,)

    def test_processed_sequence_is_accepted(self):
        seq = generate_motion(MotionSpec("walk", seed=1))
        proc = process(seq)
        m = JL2PModel(ModelConfig(feature_dim=SKELETON.feature_dim, word_dim=3, latent_dim=4,
                                  sentence_hidden=4, pose_hidden=4, decoder_hidden=4))
        assert m.encode_pose(proc).shape == (4,)

    def test_decode_shapes(self):
        m = tiny()
        assert m.decode(Tensor(np.ones(4)), 1).shape == (1, 5)
        assert m.decode(Tensor(np.ones((3, 4))), 7).shape == (3, 7, 5)

    def test_dimension_errors(self):
        m = tiny()
        with pytest.raises(DimensionError):
            m.encode_sentence(np.ones((2, 4)))
        with pytest.raises(DimensionError):
            m.encode_pose(np.ones((2, 6)))
        with pytest.raises(DimensionError):
            m.decode(Tensor(np.ones(3)), 2)

    def test_either_code_decodes(self):
        m = tiny()
        for z in (m.encode_sentence(np.ones((2, 3))), m.encode_pose(np.ones((3, 5)))):
            assert m.decode(z, 3).shape == (3, 5)


class TestBehaviour:
    def test_deterministic(self):
        x = np.random.default_rng(0).normal(size=(5, 3))
        y = np.random.default_rng(1).normal(size=(4, 5))
        a, b = tiny(3), tiny(3)
        assert a.encode_sentence(x).data.tobytes() == b.encode_sentence(x).data.tobytes()
        assert a.encode_pose(y).data.tobytes() == b.encode_pose(y).data.tobytes()
        la, lb = a.forward_cross(x, y, 4), b.forward_cross(x, y, 4)
        assert la.item() == lb.item()

    def test_residual_identity(self):
        m = tiny()
        for t in m.params["decoder"]["out"].values():
            t.data[:] = 0.0
        seed = np.arange(5.0)
        out = m.decode(Tensor(np.ones(4)), 6, seed_frame=seed).data
        assert np.array_equal(out, np.tile(seed, (6, 1)))

    def test_zero_seed_by_default(self):
        m = tiny()
        for t in m.params["decoder"]["out"].values():
            t.data[:] = 0.0
        assert np.array_equal(m.decode(Tensor(np.ones(4)), 3).data, np.zeros((3, 5)))

    def test_loss_zero_when_output_equals_target(self):
        m = tiny()
        for t in m.params["decoder"]["out"].values():
            t.data[:] = 0.0
        assert m.forward_cross(np.ones((2, 3)), np.zeros((3, 5)), 3).item() == 0.0
        assert m.forward_auto(np.zeros((3, 5)), np.zeros((3, 5)), 3).item() == 0.0

    def test_cross_loss_is_composition(self):
        m = tiny(1)
        x, y = np.ones((3, 3)), np.random.default_rng(2).normal(size=(4, 5))
        manual = ad.smooth_l1(m.decode(m.encode_sentence(x), 4), y).item()
        assert m.forward_cross(x, y, 4).item() == manual

    def test_joint_loss_is_sum(self):
        m = tiny(1)
        x, y = np.ones((3, 3)), np.random.default_rng(2).normal(size=(4, 5))
        lc, lu = m.forward_cross(x, y, 4), m.forward_auto(y, y, 4)
        manual_u = ad.smooth_l1(m.decode(m.encode_pose(y), 4), y).item()
        assert lu.item() == manual_u
        assert (lc + lu).item() == pytest.approx(lc.item() + manual_u, abs=0)

    def test_batched_matches_single(self):
        m = tiny(2)
        rng = np.random.default_rng(3)
        sents = [rng.normal(size=(n, 3)) for n in (2, 5, 3)]
        batch = m.encode_sentence(sents).data
        for i, s in enumerate(sents):
            assert np.allclose(batch[i], m.encode_sentence(s).data, atol=1e-12)

    def test_normalization(self):
        m = tiny()
        feats = [np.random.default_rng(0).normal(3.0, 2.0, size=(50, 5))]
        feats[0][:, 4] = 7.0
        m.fit_normalization(feats)
        z = m.to_model_space(feats[0])
        assert np.allclose(z[:, :4].mean(axis=0), 0.0) and np.allclose(z[:, :4].std(axis=0), 1.0)
        assert np.allclose(m.from_model_space(z), feats[0])


class TestGradients:
    def test_sentence_code_norm(self):
        m = tiny(4)
        x = np.random.default_rng(0).normal(size=(3, 3))

        def f():
            z = m.encode_sentence(x)
            return ad.sum_(ad.mul(z, z))

        params = list(m.named_parameters(["sentence_encoder"]).values())
        assert max_grad_error(f, params) < 1e-3

    def test_decode_wrt_z(self):
        m = tiny(5)
        z = Tensor(np.random.default_rng(1).normal(size=4), requires_grad=True)
        w = np.random.default_rng(2).normal(size=(2, 5))
        assert max_grad_error(lambda: ad.sum_(ad.mul(m.decode(z, 2), w)), [z]) < 1e-3

    def test_joint_loss_all_params(self):
        m = tiny(6)
        rng = np.random.default_rng(7)
        x, y = rng.normal(size=(3, 3)), rng.normal(size=(2, 5))

        def f():
            return ad.add(m.forward_cross(x, y, 2), m.forward_auto(y, y, 2))

        assert max_grad_error(f, list(m.named_parameters().values())) < 1e-3


@pytest.mark.parametrize("path", ["cross", "auto"])
def test_overfit_single_pair(path):
    m = tiny(0, F=5, K=3, h=4, H=16)
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=(4, 3)), rng.normal(size=(2, 5))
    params = m.named_parameters()
    state = ad.OptimizerState("adam", lr=1e-2)

    def loss():
        if path == "cross":
            return m.forward_cross(x, y, 2)
        return m.forward_auto(y, y, 2)

    first = loss().item()
    for _ in range(200):
        tape = Tape()
        with tape:
            lo = loss()
        ad.backward(lo, tape)
        for p in params.values():
            if p.grad is None:
                p.grad = np.zeros_like(p.data)
        ad.optimizer_step(params, state)
    assert loss().item() <= 0.1 * first


def test_checkpoint_round_trip(tmp_path):
    m = tiny(9)
    m.feature_mean = np.arange(5.0)
    m.feature_std = np.full(5, 2.0)
    path = tmp_path / "m.json"
    m.save(path, layout={"x": 1})
    back, header = JL2PModel.load(path)
    assert header["layout"] == {"x": 1}
    for k, t in m.named_parameters().items():
        assert back.named_parameters()[k].data.tobytes() == t.data.tobytes()
    assert np.array_equal(back.feature_std, m.feature_std)
    x = np.ones((2, 3))
    assert np.array_equal(back.decode(back.encode_sentence(x), 3).data,
                          m.decode(m.encode_sentence(x), 3).data)


def test_generate_returns_raw_units():
    m = JL2PModel(ModelConfig(feature_dim=SKELETON.feature_dim, word_dim=3, latent_dim=4,
                              sentence_hidden=4, pose_hidden=4, decoder_hidden=4))
    proc = m.generate(np.ones((2, 3)), 5, SKELETON, 12.5)
    assert proc.features.shape == (5, SKELETON.feature_dim)


def test_fd_oracle_agrees_with_known_gradient():
    t = Tensor(np.array([1.0, -2.0]))
    assert rel_err(numeric_grad(lambda: float(np.sum(np.tanh(t.data))), t),
                   1 - np.tanh(t.data) ** 2) < 1e-6

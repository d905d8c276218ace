"""Sentence encoder, pose encoder and residual pose decoder around a shared latent space.

The networks work in *model space*: pose features standardised per dimension
with statistics fitted on the training split.  ``to_model_space`` and
``from_model_space`` convert; the statistics travel with the checkpoint.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import DimensionError, Tensor
from .pose import ProcessedSequence, Skeleton
from .text import TokenSequence

GROUPS = ("sentence_encoder", "pose_encoder", "decoder")


@dataclass
class ModelConfig:
    feature_dim: int
    word_dim: int = 64
    latent_dim: int = 32
    sentence_hidden: int = 128
    pose_hidden: int = 128
    decoder_hidden: int = 128
    seed: int = 0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if k != "seed" and int(v) < 1:
                raise ValueError(f"{k} must be >= 1, got {v}")


class JL2PModel:
    def __init__(self, config: ModelConfig):
        self.config = c = config
        rng = np.random.default_rng(c.seed)
        self.params = {
            "sentence_encoder": {
                "lstm": ad.init_lstm(rng, c.word_dim, c.sentence_hidden),
                "proj": ad.init_linear(rng, c.sentence_hidden, c.latent_dim),
            },
            "pose_encoder": {
                "gru": ad.init_gru(rng, c.feature_dim, c.pose_hidden),
                "proj": ad.init_linear(rng, c.pose_hidden, c.latent_dim),
            },
            "decoder": {
                "init": ad.init_linear(rng, c.latent_dim, c.decoder_hidden),
                "gru": ad.init_gru(rng, c.feature_dim, c.decoder_hidden),
                "out": ad.init_linear(rng, c.decoder_hidden, c.feature_dim),
            },
        }
        self.feature_mean = np.zeros(c.feature_dim)
        self.feature_std = np.ones(c.feature_dim)

    # -- parameters -------------------------------------------------------

    def parameter_groups(self):
        """``{group: {flat_name: Tensor}}`` with names like ``decoder.gru.W_x``."""
        return {g: {f"{g}.{layer}.{k}": t
                    for layer, ps in self.params[g].items() for k, t in ps.items()}
                for g in GROUPS}

    def named_parameters(self, groups=GROUPS):
        named = self.parameter_groups()
        return {k: v for g in groups for k, v in named[g].items()}

    def load_arrays(self, arrays):
        named = self.named_parameters()
        if set(arrays) != set(named):
            raise ValueError("checkpoint parameters do not match the model: "
                             f"missing {sorted(set(named) - set(arrays))}, "
                             f"unexpected {sorted(set(arrays) - set(named))}")
        for k, t in named.items():
            if arrays[k].shape != t.shape:
                raise DimensionError(f"{k}: checkpoint shape {arrays[k].shape} != {t.shape}")
            t.data = np.array(arrays[k], dtype=np.float64)

    # -- normalisation ----------------------------------------------------

    def fit_normalization(self, feature_arrays):
        stacked = np.concatenate(list(feature_arrays), axis=0)
        self.feature_mean = stacked.mean(axis=0)
        std = stacked.std(axis=0)
        self.feature_std = np.where(std < 1e-8, 1.0, std)

    def to_model_space(self, features):
        return (np.asarray(features) - self.feature_mean) / self.feature_std

    def from_model_space(self, features):
        return np.asarray(features) * self.feature_std + self.feature_mean

    # -- encoders ---------------------------------------------------------

    def encode_sentence(self, x) -> Tensor:
        """Latent code(s) for one sentence or a list of them.

        ``x`` is a TokenSequence / ``(N, K)`` array, giving ``(h,)``, or a list
        of those, giving ``(B, h)``.  Sentences of different lengths share a
        batch; padded steps leave the LSTM state untouched.
        """
        single = not isinstance(x, (list, tuple))
        seqs = [x] if single else list(x)
        arrs = [np.asarray(s.vectors if isinstance(s, TokenSequence) else s, dtype=np.float64)
                for s in seqs]
        K = self.config.word_dim
        for a in arrs:
            if a.ndim != 2 or a.shape[1] != K or len(a) < 1:
                raise DimensionError(f"sentence encoder expects (N>=1, {K}) word vectors, "
                                     f"got {a.shape}")
        B = len(arrs)
        lengths = np.array([len(a) for a in arrs])
        N = int(lengths.max())
        padded = np.zeros((N, B, K))
        for b, a in enumerate(arrs):
            padded[:len(a), b] = a
        p = self.params["sentence_encoder"]
        H = self.config.sentence_hidden
        h = Tensor(np.zeros((B, H)))
        c = Tensor(np.zeros((B, H)))
        ragged = bool((lengths != N).any())
        for i in range(N):
            h_new, c_new = ad.lstm_cell(Tensor(padded[i]), (h, c), p["lstm"])
            if ragged and (lengths <= i).any():
                keep = (lengths > i).astype(np.float64)[:, None]
                h = ad.add(ad.mul(h_new, keep), ad.mul(h, 1.0 - keep))
                c = ad.add(ad.mul(c_new, keep), ad.mul(c, 1.0 - keep))
            else:
                h, c = h_new, c_new
        z = ad.linear(h, p["proj"])
        return ad.reshape(z, (self.config.latent_dim,)) if single else z

    def encode_pose(self, y) -> Tensor:
        """Latent code for a pose sequence.

        ``y``: ProcessedSequence (raw features, normalised here), a ``(T, F)``
        model-space array giving ``(h,)``, or ``(B, T, F)`` giving ``(B, h)``.
        """
        if isinstance(y, ProcessedSequence):
            arr = self.to_model_space(y.features)
        else:
            arr = np.asarray(y, dtype=np.float64)
        single = arr.ndim == 2
        if single:
            arr = arr[None]
        F = self.config.feature_dim
        if arr.ndim != 3 or arr.shape[2] != F or arr.shape[1] < 1:
            raise DimensionError(f"pose encoder expects (T>=1, {F}) features, got {arr.shape}")
        p = self.params["pose_encoder"]
        h = Tensor(np.zeros((arr.shape[0], self.config.pose_hidden)))
        for t in range(arr.shape[1]):
            h = ad.gru_cell(Tensor(arr[:, t]), h, p["gru"])
        z = ad.linear(h, p["proj"])
        return ad.reshape(z, (self.config.latent_dim,)) if single else z

    # -- decoder ----------------------------------------------------------

    def decode(self, z: Tensor, t_steps: int, seed_frame=None) -> Tensor:
        """Autoregressively emit ``t_steps`` model-space frames from latent ``z``.

        Each step feeds the previous output back in and adds the network's
        predicted delta to it.  ``seed_frame`` is the first input, zeros
        (the training mean pose) by default.
        """
        if t_steps < 1:
            raise ValueError(f"t_steps must be >= 1, got {t_steps}")
        z = ad.as_tensor(z)
        single = z.data.ndim == 1
        zb = ad.reshape(z, (1, z.shape[0])) if single else z
        if zb.shape[1] != self.config.latent_dim:
            raise DimensionError(f"latent code has width {zb.shape[1]}, "
                                 f"expected {self.config.latent_dim}")
        B, F = zb.shape[0], self.config.feature_dim
        p = self.params["decoder"]
        h = ad.tanh(ad.linear(zb, p["init"]))
        if seed_frame is None:
            prev = Tensor(np.zeros((B, F)))
        else:
            seed = np.asarray(seed_frame, dtype=np.float64)
            if seed.shape[-1] != F:
                raise DimensionError(f"seed frame has width {seed.shape[-1]}, expected {F}")
            prev = Tensor(np.broadcast_to(seed, (B, F)).copy())
        frames = []
        for _ in range(t_steps):
            h = ad.gru_cell(prev, h, p["gru"])
            prev = ad.add(prev, ad.linear(h, p["out"]))
            frames.append(prev)
        out = ad.stack(frames, axis=1)
        return ad.reshape(out, (t_steps, F)) if single else out

    # -- losses -----------------------------------------------------------

    @staticmethod
    def _targets(y_target, t):
        arr = np.asarray(y_target, dtype=np.float64)
        if arr.shape[-2] < t:
            raise ValueError(f"target has {arr.shape[-2]} frames, need at least {t}")
        return arr[..., :t, :]

    def forward_cross(self, x, y_target, t, loss_fn=ad.smooth_l1) -> Tensor:
        """Cross-modal loss: decode the sentence code, compare to the first ``t`` frames."""
        target = self._targets(y_target, t)
        return loss_fn(self.decode(self.encode_sentence(x), t), target)

    def forward_auto(self, y_in, y_target, t, loss_fn=ad.smooth_l1) -> Tensor:
        """Autoencoder loss: encode the first ``t`` input frames, decode, compare."""
        target = self._targets(y_target, t)
        y_in = np.asarray(y_in, dtype=np.float64)[..., :t, :]
        return loss_fn(self.decode(self.encode_pose(y_in), t), target)

    # trainer protocol: lists of pairs with .tokens and .target (model space)

    def cross_loss(self, pairs, t, loss_fn):
        target = np.stack([p.target[:t] for p in pairs])
        return loss_fn(self.decode(self.encode_sentence([p.tokens for p in pairs]), t), target)

    def auto_loss(self, pairs, t, loss_fn):
        target = np.stack([p.target[:t] for p in pairs])
        return loss_fn(self.decode(self.encode_pose(target), t), target)

    # -- inference --------------------------------------------------------

    def generate(self, tokens, t_steps, skeleton: Skeleton, fps, initial_root=(0.0, 0.0, 0.0)):
        """Raw-unit ProcessedSequence generated from a sentence (no tape needed)."""
        out = self.decode(self.encode_sentence(tokens), t_steps).data
        return ProcessedSequence(skeleton, self.from_model_space(out), fps, tuple(initial_root))

    def generate_batch(self, token_seqs, t_steps):
        """``(B, t_steps, F)`` raw-unit features for a batch of sentences."""
        out = self.decode(self.encode_sentence(list(token_seqs)), t_steps).data
        return self.from_model_space(out)

    # -- persistence ------------------------------------------------------

    def checkpoint_header(self, layout=None, extra=None):
        header = {
            "model_config": asdict(self.config),
            "normalization": {"mean": self.feature_mean.tolist(),
                              "std": self.feature_std.tolist()},
        }
        if layout is not None:
            header["layout"] = layout
        if extra:
            header.update(extra)
        return header

    def save(self, path, layout=None, extra=None):
        ad.save_checkpoint(path, self.named_parameters(), self.checkpoint_header(layout, extra))

    @classmethod
    def load(cls, path):
        arrays, header = ad.load_checkpoint(path)
        model = cls(ModelConfig(**header["model_config"]))
        model.load_arrays(arrays)
        norm = header.get("normalization")
        if norm:
            model.feature_mean = np.asarray(norm["mean"], dtype=np.float64)
            model.feature_std = np.asarray(norm["std"], dtype=np.float64)
        return model, header


def layout_for(skeleton: Skeleton, word_dim: int):
    return {**skeleton.layout(), "feature_dim": skeleton.feature_dim, "word_dim": word_dim}

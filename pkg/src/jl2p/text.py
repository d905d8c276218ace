"""Tokenisation and frozen word-vector lookup."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_PUNCT = re.compile(r"[^\w\s]", re.UNICODE)


class EmptySentenceError(ValueError):
    pass


class UnknownTokenError(KeyError):
    pass


class EmbeddingParseError(ValueError):
    pass


def tokenize(sentence: str) -> list:
    """Lowercase, drop punctuation, split on whitespace."""
    tokens = _PUNCT.sub(" ", sentence.lower()).split()
    if not tokens:
        raise EmptySentenceError(f"no words in sentence {sentence!r}")
    return tokens


def hash_vector(token: str, dim: int) -> np.ndarray:
    """Deterministic unit vector derived from SHA-256 of the token's UTF-8 bytes.

    Depends only on hashlib, so it is identical across runs, platforms and
    numpy versions.
    """
    need = dim * 8
    buf = b""
    counter = 0
    seed = token.encode("utf-8")
    while len(buf) < need:
        buf += hashlib.sha256(seed + counter.to_bytes(4, "little")).digest()
        counter += 1
    ints = np.frombuffer(buf[:need], dtype="<u8")
    # top 53 bits -> uniform in [-1, 1)
    v = (ints >> np.uint64(11)).astype(np.float64) / float(1 << 53) * 2.0 - 1.0
    n = np.linalg.norm(v)
    if n == 0.0:
        v[0], n = 1.0, 1.0
    return v / n


@dataclass
class WordEmbeddingTable:
    dim: int
    vectors: dict = field(default_factory=dict)
    oov: str = "hash"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"embedding dimension must be >= 1, got {self.dim}")
        if self.oov not in ("hash", "error"):
            raise ValueError(f"unknown OOV policy {self.oov!r}")
        for w, v in self.vectors.items():
            if len(v) != self.dim:
                raise ValueError(f"vector for {w!r} has length {len(v)}, expected {self.dim}")

    def lookup(self, token: str) -> np.ndarray:
        v = self.vectors.get(token)
        if v is not None:
            return np.asarray(v, dtype=np.float64)
        if self.oov == "error":
            raise UnknownTokenError(f"unknown token {token!r}")
        return hash_vector(token, self.dim)


@dataclass
class TokenSequence:
    tokens: list
    vectors: np.ndarray  # (N, K)

    def __post_init__(self):
        if not self.tokens or len(self.tokens) != len(self.vectors):
            raise ValueError("token sequence needs >= 1 token and one vector per token")

    def __len__(self):
        return len(self.tokens)


def embed(tokens, table: WordEmbeddingTable) -> TokenSequence:
    tokens = list(tokens)
    if not tokens:
        raise EmptySentenceError("cannot embed an empty token list")
    return TokenSequence(tokens, np.stack([table.lookup(t) for t in tokens]))


def embed_sentence(sentence: str, table: WordEmbeddingTable) -> TokenSequence:
    return embed(tokenize(sentence), table)


def load_embeddings(path, oov="hash") -> WordEmbeddingTable:
    """Read ``word v1 ... vK`` lines; ``#`` lines and blank lines are skipped."""
    vectors = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            word, *nums = line.split(" ")
            try:
                vec = np.array([float(x) for x in nums if x], dtype=np.float64)
            except ValueError as e:
                raise EmbeddingParseError(f"{path}:{lineno}: {e}") from e
            if dim is None:
                dim = len(vec)
                if dim == 0:
                    raise EmbeddingParseError(f"{path}:{lineno}: no vector values")
            elif len(vec) != dim:
                raise EmbeddingParseError(
                    f"{path}:{lineno}: expected {dim} values, got {len(vec)}")
            if word in vectors:
                raise EmbeddingParseError(f"{path}:{lineno}: duplicate word {word!r}")
            vectors[word] = vec
    if dim is None:
        raise EmbeddingParseError(f"{path}: no embeddings found")
    return WordEmbeddingTable(dim, vectors, oov)


def save_embeddings(path, table: WordEmbeddingTable):
    lines = [" ".join([w] + [repr(float(x)) for x in v]) for w, v in table.vectors.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

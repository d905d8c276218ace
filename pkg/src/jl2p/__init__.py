"""Joint language-to-pose embedding: encoders, residual pose decoder, curriculum trainer."""

from .model import JL2PModel, ModelConfig
from .pose import PoseSequence, ProcessedSequence, Skeleton, invert, process
from .text import WordEmbeddingTable, embed, tokenize
from .trainer import TrainConfig, train

__version__ = "0.1.0"

__all__ = ["JL2PModel", "ModelConfig", "PoseSequence", "ProcessedSequence", "Skeleton",
           "invert", "process", "WordEmbeddingTable", "embed", "tokenize", "TrainConfig",
           "train"]

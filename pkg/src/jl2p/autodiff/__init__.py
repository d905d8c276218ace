"""Small reverse-mode differentiation engine over numpy float64 arrays."""

from .cells import gru_cell, init_gru, init_linear, init_lstm, linear, lstm_cell
from .checkpoint import (FORMAT_VERSION, CheckpointError, dump_checkpoint,
                         load_checkpoint, save_checkpoint)
from .losses import LOSSES, l2_loss, smooth_l1
from .optim import OptimizerState, clip_grad_norm, optimizer_step
from .tensor import (ContractError, DimensionError, Tape, Tensor, active_tape, add,
                     as_tensor, backward, concat, matmul, mean, mul, reshape, scale,
                     sigmoid, slice_, stack, sub, sum_, tanh)

__all__ = [
    "Tape", "Tensor", "ContractError", "DimensionError", "active_tape", "as_tensor",
    "backward", "matmul", "add", "sub", "mul", "scale", "sigmoid", "tanh", "concat",
    "slice_", "reshape", "stack", "sum_", "mean", "smooth_l1", "l2_loss", "LOSSES",
    "gru_cell", "lstm_cell", "linear", "init_gru", "init_lstm", "init_linear",
    "OptimizerState", "optimizer_step", "clip_grad_norm", "FORMAT_VERSION",
    "CheckpointError", "dump_checkpoint", "save_checkpoint", "load_checkpoint",
]

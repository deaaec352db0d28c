from .data import BlobSpec, Dataset, IdxFormatError, load_idx, synthetic_blobs, write_idx
from .net import MicroNet, NetworkSpec, evaluate, forward_backward, loss_only
from .rng import XorShift64Star
from .train import TrainRecord, TrainState, new_state, num_batches, train_epoch

__all__ = [
    "BlobSpec",
    "Dataset",
    "IdxFormatError",
    "MicroNet",
    "NetworkSpec",
    "TrainRecord",
    "TrainState",
    "XorShift64Star",
    "evaluate",
    "forward_backward",
    "load_idx",
    "loss_only",
    "new_state",
    "num_batches",
    "synthetic_blobs",
    "train_epoch",
    "write_idx",
]

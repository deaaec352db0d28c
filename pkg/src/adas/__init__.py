"""AdaS: per-block learning rates from the knowledge gain of conv weights."""

from .lowrank import EvbmfResult, SingularSpectrum, evbmf, singular_values
from .metrics import LayerMetrics, knowledge_gain, layer_metrics, mapping_condition
from .optim import AdaSDriven, FixedLR, StepDecay, VelocityBuffer, momentum_step, schedule_rate
from .scheduler import AdaSConfig, AdaSState, apply_gains, epoch_update, get_lr, init_state
from .tensor import Tensor4, read_at4, unfold_mode3, unfold_mode4, write_at4
from .theory import BoundReport, lr_lower_bound, quadratic_D, raw_knowledge_gain, theory_check

__version__ = "0.1.0"

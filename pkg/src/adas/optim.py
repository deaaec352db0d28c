"""Heavy-ball SGD steps and the learning-rate schedules that feed them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scheduler import AdaSState, get_lr


class VelocityBuffer:
    """Zero-initialised velocities, one array per parameter."""

    def __init__(self, params):
        self.values = [np.zeros_like(p, dtype=np.float64) for p in params]

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


def momentum_step(param: np.ndarray, grad: np.ndarray, vel: np.ndarray, eta: float, momentum: float):
    """``v <- m*v - eta*g; theta <- theta + v``, in place. Returns (param, vel)."""
    if param.shape != grad.shape or param.shape != vel.shape:
        raise ValueError(f"shape mismatch: param {param.shape}, grad {grad.shape}, vel {vel.shape}")
    if eta < 0:
        raise ValueError(f"eta must be >= 0, got {eta}")
    if not 0.0 <= momentum < 1.0:
        raise ValueError(f"momentum must lie in [0, 1), got {momentum}")
    if not np.all(np.isfinite(grad)):
        bad = int(np.size(grad) - np.count_nonzero(np.isfinite(grad)))
        raise FloatingPointError(f"{bad} non-finite gradient entries (shape {grad.shape})")
    vel *= momentum
    vel -= eta * grad
    param += vel
    return param, vel


@dataclass(frozen=True)
class FixedLR:
    rate: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError(f"rate must be >= 0, got {self.rate}")


@dataclass(frozen=True)
class StepDecay:
    initial: float
    factor: float = 0.5
    period: int = 25

    def __post_init__(self):
        if not self.initial > 0:
            raise ValueError(f"initial rate must be positive, got {self.initial}")
        if not 0 < self.factor <= 1:
            raise ValueError(f"factor must lie in (0, 1], got {self.factor}")
        if self.period < 1:
            raise ValueError(f"period must be >= 1, got {self.period}")


@dataclass(frozen=True)
class AdaSDriven:
    pass


LrSchedule = FixedLR | StepDecay | AdaSDriven


def schedule_rate(s: LrSchedule, epoch: int, block: int, adas: AdaSState | None = None) -> float:
    """Rate for a 0-based training epoch and block."""
    if isinstance(s, AdaSDriven):
        if adas is None:
            raise ValueError("AdaS-driven schedule needs an AdaSState")
        return get_lr(adas, block)
    if adas is not None:
        raise ValueError(f"{type(s).__name__} does not take an AdaSState")
    if isinstance(s, FixedLR):
        return s.rate
    if isinstance(s, StepDecay):
        return s.initial * s.factor ** (epoch // s.period)
    raise TypeError(f"unknown schedule {s!r}")

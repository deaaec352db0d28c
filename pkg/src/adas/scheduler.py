"""Per-block AdaS learning rates driven by the epoch-to-epoch change in knowledge gain."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .metrics import LayerMetrics, layer_metrics

DEFAULT_ETA_MIN = 1e-5


@dataclass(frozen=True)
class AdaSConfig:
    beta: float = 0.8
    zeta: float = 1.0
    eta_init: float = 5e-3
    eta_min: float = DEFAULT_ETA_MIN
    momentum: float = 0.9

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")
        if self.zeta < 0:
            raise ValueError(f"zeta must be >= 0, got {self.zeta}")
        if not self.eta_init > 0:
            raise ValueError(f"eta_init must be positive, got {self.eta_init}")
        if not self.eta_min > 0:
            raise ValueError(f"eta_min must be positive, got {self.eta_min}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must lie in [0, 1), got {self.momentum}")


@dataclass(frozen=True)
class AdaSState:
    epoch: int
    lr: tuple[float, ...]
    prev_gain: tuple[float, ...]
    metrics_log: tuple[tuple[LayerMetrics, ...], ...] = field(default=(), repr=False)

    @property
    def num_blocks(self) -> int:
        return len(self.lr)


def next_rate(prev_lr: float, gain: float, prev_gain: float, cfg: AdaSConfig) -> float:
    """One block's step: beta-weighted history plus zeta times the gain change, floored."""
    raw = cfg.beta * prev_lr + cfg.zeta * (gain - prev_gain)
    return max(raw, cfg.eta_min)


def init_state(cfg: AdaSConfig, blocks) -> AdaSState:
    blocks = list(blocks)
    if not blocks:
        raise ValueError("AdaS needs at least one conv block")
    metrics = tuple(layer_metrics(b, p=1) for b in blocks)
    return AdaSState(
        epoch=0,
        lr=(cfg.eta_init,) * len(blocks),
        prev_gain=tuple(m.g_avg for m in metrics),
        metrics_log=(metrics,),
    )


def apply_gains(state: AdaSState, cfg: AdaSConfig, metrics) -> AdaSState:
    """Advance the schedule given this epoch's per-block metrics."""
    metrics = tuple(metrics)
    if len(metrics) != state.num_blocks:
        raise ValueError(f"got {len(metrics)} blocks, state tracks {state.num_blocks}")
    gains = tuple(m.g_avg for m in metrics)
    lr = tuple(next_rate(eta, g, g0, cfg) for eta, g, g0 in zip(state.lr, gains, state.prev_gain))
    return replace(
        state,
        epoch=state.epoch + 1,
        lr=lr,
        prev_gain=gains,
        metrics_log=state.metrics_log + (metrics,),
    )


def epoch_update(state: AdaSState, cfg: AdaSConfig, blocks) -> AdaSState:
    blocks = list(blocks)
    if len(blocks) != state.num_blocks:
        raise ValueError(f"got {len(blocks)} blocks, state tracks {state.num_blocks}")
    return apply_gains(state, cfg, [layer_metrics(b, p=1) for b in blocks])


def get_lr(state: AdaSState, block: int) -> float:
    if not 0 <= block < state.num_blocks:
        raise IndexError(f"block {block} out of range for {state.num_blocks} blocks")
    return state.lr[block]

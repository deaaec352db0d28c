"""Epoch loop: shuffled mini-batches, per-block heavy-ball SGD, epoch-end metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..metrics import LayerMetrics, layer_metrics
from ..optim import AdaSDriven, LrSchedule, VelocityBuffer, momentum_step, schedule_rate
from ..scheduler import AdaSConfig, AdaSState, epoch_update, init_state
from .data import Dataset
from .net import MicroNet, evaluate, forward_backward
from .rng import XorShift64Star

DEFAULT_BATCH_SIZE = 128


@dataclass(frozen=True)
class TrainRecord:
    epoch: int
    lr: tuple[float, ...]  # per-block rates used during this epoch
    train_loss: float
    test_accuracy: float
    metrics: tuple[LayerMetrics, ...]  # end-of-epoch weights


@dataclass
class TrainState:
    velocity: VelocityBuffer
    rng: XorShift64Star
    epoch: int = 0
    adas: AdaSState | None = None
    history: list[TrainRecord] = field(default_factory=list)


def new_state(net: MicroNet, seed: int, schedule: AdaSConfig | LrSchedule) -> TrainState:
    """Fresh velocities and shuffler; an AdaS schedule also records the initial gains."""
    adas = init_state(schedule, net.conv_weights()) if isinstance(schedule, AdaSConfig) else None
    return TrainState(VelocityBuffer(net.parameters()), XorShift64Star(seed), adas=adas)


def block_rates(schedule, state: TrainState, num_blocks: int) -> tuple[float, ...]:
    if isinstance(schedule, AdaSConfig):
        return tuple(schedule_rate(AdaSDriven(), state.epoch, ell, state.adas) for ell in range(num_blocks))
    return tuple(schedule_rate(schedule, state.epoch, ell) for ell in range(num_blocks))


def num_batches(n: int, batch_size: int) -> int:
    return math.ceil(n / batch_size)


def train_epoch(
    net: MicroNet,
    dataset: Dataset,
    schedule: AdaSConfig | LrSchedule,
    state: TrainState,
    *,
    test: Dataset | None = None,
    batch_size: int = DEFAULT_BATCH_SIZE,
    momentum: float = 0.9,
) -> TrainRecord:
    """Run one epoch and append its record to ``state.history``.

    With an ``AdaSConfig`` the momentum comes from the config and the AdaS
    state is advanced from the end-of-epoch conv weights.  Otherwise
    ``momentum`` is used and the metrics are only logged.
    """
    if batch_size > len(dataset):
        raise ValueError(f"batch size {batch_size} exceeds dataset size {len(dataset)}")
    if isinstance(schedule, AdaSConfig):
        momentum = schedule.momentum
        if state.adas is None:
            raise ValueError("AdaS schedule needs a state created with new_state")
    rates = block_rates(schedule, state, net.num_blocks)
    params = net.parameters()
    param_rates = [rates[ell] for ell in net.block_of]

    order = np.asarray(state.rng.permutation(len(dataset)), dtype=np.int64)
    total = 0.0
    for k in range(num_batches(len(dataset), batch_size)):
        idx = order[k * batch_size : (k + 1) * batch_size]
        loss, grads = forward_backward(net, dataset.inputs(idx), dataset.labels[idx])
        total += loss * len(idx)
        for p, g, v, eta in zip(params, grads, state.velocity.values, param_rates):
            momentum_step(p, g, v, eta, momentum)

    blocks = net.conv_weights()
    if isinstance(schedule, AdaSConfig):
        state.adas = epoch_update(state.adas, schedule, blocks)
        metrics = state.adas.metrics_log[-1]
    else:
        metrics = tuple(layer_metrics(b, p=1) for b in blocks)
    state.epoch += 1
    record = TrainRecord(
        epoch=state.epoch,
        lr=rates,
        train_loss=total / len(dataset),
        test_accuracy=evaluate(net, test) if test is not None and len(test) else float("nan"),
        metrics=metrics,
    )
    state.history.append(record)
    return record

"""Micro CNN: a stack of conv blocks followed by a dense softmax classifier."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..tensor import Tensor4
from .layers import Conv2D, Dense, Flatten, MaxPool2, ReLU, softmax_cross_entropy


@dataclass(frozen=True)
class NetworkSpec:
    """Conv blocks are conv3x3(stride 1, pad 1) + ReLU, optionally followed by maxpool(2)."""

    input_shape: tuple[int, int, int] = (16, 16, 1)
    conv_channels: tuple[int, ...] = (8, 16, 32)
    pool: tuple[bool, ...] = (True, True, False)
    classes: int = 10

    def __post_init__(self):
        if not self.conv_channels:
            raise ValueError("need at least one conv block")
        if len(self.pool) != len(self.conv_channels):
            raise ValueError("pool flags must match conv blocks one to one")
        if self.classes < 2:
            raise ValueError("need at least two classes")
        self.feature_shapes()

    def feature_shapes(self) -> list[tuple[int, int, int]]:
        """Activation shape after each conv block."""
        h, w, _ = self.input_shape
        shapes = []
        for cout, pooled in zip(self.conv_channels, self.pool):
            if pooled:
                if h % 2 or w % 2:
                    raise ValueError(f"cannot pool a {h}x{w} feature map")
                h, w = h // 2, w // 2
            shapes.append((h, w, cout))
        return shapes


class MicroNet:
    def __init__(self, spec: NetworkSpec, seed: int = 0):
        self.spec = spec
        rng = np.random.default_rng(seed)
        self.layers = []
        self.block_of = []  # block index per parameter, aligned with parameters()
        self.convs: list[Conv2D] = []
        cin = spec.input_shape[2]
        for ell, (cout, pooled) in enumerate(zip(spec.conv_channels, spec.pool)):
            std = np.sqrt(2.0 / (9 * cin))
            conv = Conv2D(rng.normal(0.0, std, size=(3, 3, cin, cout)), np.zeros(cout))
            self.convs.append(conv)
            self.layers += [conv, ReLU()]
            self.block_of += [ell, ell]
            if pooled:
                self.layers.append(MaxPool2())
            cin = cout
        fan_in = int(np.prod(spec.feature_shapes()[-1]))
        dense = Dense(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, spec.classes)), np.zeros(spec.classes))
        self.layers += [Flatten(), dense]
        # the classifier has no conv block of its own and follows the last one
        self.block_of += [len(self.convs) - 1] * 2

        shape = spec.input_shape
        for layer in self.layers:
            shape = layer.output_shape(shape)

    @property
    def num_blocks(self) -> int:
        return len(self.convs)

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params]

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def conv_weights(self) -> list[Tensor4]:
        return [Tensor4(c.weight) for c in self.convs]

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, dlogits: np.ndarray) -> list[np.ndarray]:
        grads = []
        d = dlogits
        for layer in reversed(self.layers):
            if layer is self.layers[0]:
                # the input gradient of the first layer is never used
                d, g = layer.backward(d, need_dx=False)
            else:
                d, g = layer.backward(d)
            grads = g + grads
        return grads


def forward_backward(net: MicroNet, x: np.ndarray, labels: np.ndarray) -> tuple[float, list[np.ndarray]]:
    """Mean cross-entropy over the batch and gradients aligned with ``net.parameters()``."""
    if len(x) == 0:
        raise ValueError("empty batch")
    if tuple(x.shape[1:]) != tuple(net.spec.input_shape) or len(x) != len(labels):
        raise ValueError(f"batch {x.shape} / {len(labels)} labels does not fit input {net.spec.input_shape}")
    logits = net.forward(x)
    loss, dlogits = softmax_cross_entropy(logits, labels)
    return loss, net.backward(dlogits)


def loss_only(net: MicroNet, x: np.ndarray, labels: np.ndarray) -> float:
    return softmax_cross_entropy(net.forward(x), labels)[0]


def evaluate(net: MicroNet, dataset, batch_size: int = 1000) -> float:
    """Argmax accuracy over the whole dataset."""
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    correct = 0
    for start in range(0, len(dataset), batch_size):
        idx = np.arange(start, min(start + batch_size, len(dataset)))
        pred = np.argmax(net.forward(dataset.inputs(idx)), axis=1)
        correct += int(np.sum(pred == dataset.labels[idx]))
    return correct / len(dataset)

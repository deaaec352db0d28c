"""Layers with hand-written backward passes. Activations are NHWC float64."""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv_output_size(n: int, kernel: int, stride: int, pad: int) -> int:
    span = n + 2 * pad - kernel
    if span < 0 or span % stride:
        raise ValueError(f"conv does not tile: in={n} kernel={kernel} stride={stride} pad={pad}")
    return span // stride + 1


class Conv2D:
    """Cross-correlation with weights laid out (kh, kw, in_channels, out_channels)."""

    def __init__(self, weight: np.ndarray, bias: np.ndarray, stride: int = 1, pad: int = 1):
        self.weight = weight
        self.bias = bias
        self.stride = stride
        self.pad = pad
        self._cache = None

    @property
    def params(self):
        return [self.weight, self.bias]

    def output_shape(self, in_shape):
        h, w, _ = in_shape
        kh, kw, _, cout = self.weight.shape
        return (
            conv_output_size(h, kh, self.stride, self.pad),
            conv_output_size(w, kw, self.stride, self.pad),
            cout,
        )

    def forward(self, x: np.ndarray) -> np.ndarray:
        kh, kw, cin, cout = self.weight.shape
        p, s = self.pad, self.stride
        xp = np.pad(x, ((0, 0), (p, p), (p, p), (0, 0)))
        win = sliding_window_view(xp, (kh, kw), axis=(1, 2))[:, ::s, ::s]
        b, ho, wo = win.shape[:3]
        # (B, Ho, Wo, C, kh, kw) -> rows ordered (kh, kw, C) to match the weight layout
        cols = win.transpose(0, 1, 2, 4, 5, 3).reshape(b * ho * wo, kh * kw * cin)
        out = cols @ self.weight.reshape(-1, cout) + self.bias
        self._cache = (x.shape, xp.shape, cols, (b, ho, wo))
        return out.reshape(b, ho, wo, cout)

    def backward(self, dout: np.ndarray, need_dx: bool = True):
        x_shape, xp_shape, cols, (b, ho, wo) = self._cache
        kh, kw, cin, cout = self.weight.shape
        p, s = self.pad, self.stride
        d2 = dout.reshape(-1, cout)
        dw = (cols.T @ d2).reshape(self.weight.shape)
        db = d2.sum(axis=0)
        if not need_dx:
            return None, [dw, db]
        dcols = (d2 @ self.weight.reshape(-1, cout).T).reshape(b, ho, wo, kh, kw, cin)
        dxp = np.zeros(xp_shape)
        for i in range(kh):
            for j in range(kw):
                dxp[:, i : i + s * ho : s, j : j + s * wo : s, :] += dcols[:, :, :, i, j, :]
        dx = dxp[:, p : xp_shape[1] - p, p : xp_shape[2] - p, :]
        return dx, [dw, db]


class ReLU:
    params: list = []

    def output_shape(self, in_shape):
        return in_shape

    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dout):
        return np.where(self._mask, dout, 0.0), []


class MaxPool2:
    """2x2 max pooling, stride 2; the gradient goes to the first maximum in each window."""

    params: list = []

    def output_shape(self, in_shape):
        h, w, c = in_shape
        if h % 2 or w % 2:
            raise ValueError(f"maxpool(2) needs even spatial dims, got {h}x{w}")
        return h // 2, w // 2, c

    def forward(self, x):
        b, h, w, c = x.shape
        win = x.reshape(b, h // 2, 2, w // 2, 2, c).transpose(0, 1, 3, 5, 2, 4).reshape(b, h // 2, w // 2, c, 4)
        self._idx = np.argmax(win, axis=-1)
        self._shape = x.shape
        return np.take_along_axis(win, self._idx[..., None], axis=-1)[..., 0]

    def backward(self, dout):
        b, h, w, c = self._shape
        d = np.zeros((b, h // 2, w // 2, c, 4))
        np.put_along_axis(d, self._idx[..., None], dout[..., None], axis=-1)
        dx = d.reshape(b, h // 2, w // 2, c, 2, 2).transpose(0, 1, 4, 2, 5, 3).reshape(b, h, w, c)
        return dx, []


class Flatten:
    params: list = []

    def output_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def forward(self, x):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._shape), []


class Dense:
    def __init__(self, weight: np.ndarray, bias: np.ndarray):
        self.weight = weight
        self.bias = bias

    @property
    def params(self):
        return [self.weight, self.bias]

    def output_shape(self, in_shape):
        (n,) = in_shape
        if n != self.weight.shape[0]:
            raise ValueError(f"dense expects {self.weight.shape[0]} inputs, got {n}")
        return (self.weight.shape[1],)

    def forward(self, x):
        self._x = x
        return x @ self.weight + self.bias

    def backward(self, dout):
        return dout @ self.weight.T, [self._x.T @ dout, dout.sum(axis=0)]


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient with respect to the logits."""
    z = logits - logits.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=1))
    n = len(labels)
    rows = np.arange(n)
    loss = float(np.mean(logsum - z[rows, labels]))
    probs = np.exp(z - logsum[:, None])
    probs[rows, labels] -= 1.0
    return loss, probs / n

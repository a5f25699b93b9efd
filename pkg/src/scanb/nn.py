"""Small layer library: parameter containers, dense and conv layers, LSTM cell."""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .optim import Parameter
from .tensor import Tensor


class Module:
    """Container whose parameters() walks attributes recursively in definition order."""

    def parameters(self) -> list[Parameter]:
        out: list[Parameter] = []
        for value in self.__dict__.values():
            if isinstance(value, Parameter):
                out.append(value)
            elif isinstance(value, Module):
                out.extend(value.parameters())
            elif isinstance(value, (list, tuple)):
                for item in value:
                    if isinstance(item, Module):
                        out.extend(item.parameters())
                    elif isinstance(item, Parameter):
                        out.append(item)
        return out

    def param_dict(self) -> dict[str, Parameter]:
        d = {}
        for p in self.parameters():
            if p.name in d:
                raise ValueError(f"duplicate parameter name {p.name}")
            d[p.name] = p
        return d


def he_init(rng: np.random.Generator, shape: tuple, fan_in: int) -> np.ndarray:
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)


def glorot_init(rng: np.random.Generator, shape: tuple, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Linear(Module):
    def __init__(self, rng: np.random.Generator, n_in: int, n_out: int, name: str):
        self.w = Parameter(glorot_init(rng, (n_in, n_out), n_in, n_out), f"{name}.w")
        self.b = Parameter(np.zeros(n_out), f"{name}.b")

    def __call__(self, x: Tensor) -> Tensor:
        return T.matmul(x, self.w) + self.b


class Conv2d(Module):
    def __init__(self, rng: np.random.Generator, c_in: int, c_out: int, name: str,
                 kernel: int = 3, stride: int = 1, padding: int = 1):
        fan_in = c_in * kernel * kernel
        self.w = Parameter(he_init(rng, (c_out, c_in, kernel, kernel), fan_in), f"{name}.w")
        self.b = Parameter(np.zeros(c_out), f"{name}.b")
        self.stride = stride
        self.padding = padding

    def __call__(self, x: Tensor) -> Tensor:
        return T.conv2d(x, self.w, self.b, stride=self.stride, padding=self.padding)


class LSTMCell(Module):
    """Single LSTM cell; gate order (input, forget, cell, output), forget bias +1."""

    def __init__(self, rng: np.random.Generator, n_in: int, n_hidden: int, name: str):
        self.n_hidden = n_hidden
        self.wx = Parameter(glorot_init(rng, (n_in, 4 * n_hidden), n_in, n_hidden), f"{name}.wx")
        self.wh = Parameter(glorot_init(rng, (n_hidden, 4 * n_hidden), n_hidden, n_hidden), f"{name}.wh")
        bias = np.zeros(4 * n_hidden)
        bias[n_hidden : 2 * n_hidden] = 1.0
        self.b = Parameter(bias, f"{name}.b")

    def __call__(self, x: Tensor, h: Tensor, c: Tensor) -> tuple[Tensor, Tensor]:
        nh = self.n_hidden
        z = T.matmul(x, self.wx) + T.matmul(h, self.wh) + self.b
        i = T.sigmoid(z[:, 0 * nh : 1 * nh])
        f = T.sigmoid(z[:, 1 * nh : 2 * nh])
        g = T.tanh(z[:, 2 * nh : 3 * nh])
        o = T.sigmoid(z[:, 3 * nh : 4 * nh])
        c_new = f * c + i * g
        h_new = o * T.tanh(c_new)
        return h_new, c_new

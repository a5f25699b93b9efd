"""Trainable parameters, the Adam optimizer, and a finite-difference gradient oracle."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import tensor as T
from .tensor import Tensor


class Parameter(Tensor):
    """A named trainable tensor; gradients accumulate additively across a tape."""

    __slots__ = ("name", "trainable")

    def __init__(self, data, name: str, trainable: bool = True):
        super().__init__(np.array(data, dtype=np.float64), requires_grad=trainable)
        self.name = name
        self.trainable = trainable

    def __repr__(self) -> str:
        return f"Parameter({self.name}, shape={self.shape})"


def zero_grads(params: Sequence[Parameter]) -> None:
    for p in params:
        p.zero_grad()


class Adam:
    """Bias-corrected adaptive-moment update; the library's only optimizer."""

    def __init__(self, params: Sequence[Parameter], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]
        self.warnings: list[str] = []

    def step(self) -> None:
        """Apply one update from accumulated grads; parameters without a grad are skipped."""
        self.step_count += 1
        t = self.step_count
        for i, p in enumerate(self.params):
            if not p.trainable:
                continue
            if p.grad is None:
                self.warnings.append(f"step {t}: no gradient for {p.name}, skipped")
                continue
            g = p.grad
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * (g * g)
            m_hat = self.m[i] / (1.0 - self.beta1**t)
            v_hat = self.v[i] / (1.0 - self.beta2**t)
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def zero_grad(self) -> None:
        zero_grads(self.params)


def finite_diff_check(
    f: Callable[[], Tensor],
    params: Sequence[Parameter],
    h: float = 1e-5,
    samples_per_param: int = 3,
    seed: int = 0,
) -> float:
    """Max relative error between tape gradients and central differences.

    `f` must rebuild the scalar loss from the current parameter values and be
    deterministic; determinism is verified by double evaluation. Sampled
    coordinates per parameter are the largest-|grad| entry plus random draws.
    Relative error is |analytic - numeric| / (|analytic| + 1e-8).
    """
    with T.no_grad():
        v1 = float(f().data)
        v2 = float(f().data)
    if v1 != v2:
        raise RuntimeError(f"finite_diff_check: f is not deterministic ({v1} != {v2})")

    zero_grads(params)
    loss = f()
    T.backward(loss)

    rng = np.random.default_rng(seed)
    worst = 0.0
    for p in params:
        if p.grad is None:
            raise RuntimeError(f"finite_diff_check: no gradient reached {p.name}")
        flat_grad = p.grad.ravel()
        n = flat_grad.size
        idxs = {int(np.argmax(np.abs(flat_grad)))}
        idxs.update(int(i) for i in rng.integers(0, n, size=min(samples_per_param, n)))
        flat_data = p.data.ravel()
        for idx in sorted(idxs):
            orig = flat_data[idx]
            with T.no_grad():
                flat_data[idx] = orig + h
                f_plus = float(f().data)
                flat_data[idx] = orig - h
                f_minus = float(f().data)
            flat_data[idx] = orig
            numeric = (f_plus - f_minus) / (2.0 * h)
            analytic = flat_grad[idx]
            err = abs(analytic - numeric) / (abs(analytic) + 1e-8)
            worst = max(worst, err)
    zero_grads(params)
    return worst

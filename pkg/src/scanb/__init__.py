"""scanb: desk-scale few-shot imitation learning testbed.

A numpy-based library with four layers: a float64 autodiff core, a
deterministic tabletop simulator for two compound manipulation tasks,
demonstration-conditioned policy networks, and a training/evaluation
harness driven by declarative TOML configs (CLI: `scanb`).
"""

from .tensor import Tensor, backward, concat, conv2d, matmul, no_grad, softmax_rows
from .optim import Adam, Parameter, finite_diff_check

__version__ = "0.1.0"

__all__ = [
    "Tensor",
    "Parameter",
    "Adam",
    "backward",
    "concat",
    "conv2d",
    "matmul",
    "no_grad",
    "softmax_rows",
    "finite_diff_check",
    "__version__",
]

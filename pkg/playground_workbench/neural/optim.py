"""
Neural Core: Adam
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from ..core.errors import NonFiniteLossError, ShapeError
from .layers import Grads, Module

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: Dict[str, np.ndarray], grads: Grads, state: AdamState) -> AdamState:
    """
    One bias-corrected Adam update, applied in place to every parameter with a gradient.

    Raises:
        ShapeError: A gradient's shape differs from its parameter's
    """
    for name, grad in grads.items():
        if name in params and params[name].shape != np.shape(grad):
            raise ShapeError(f"gradient '{name}' has shape {np.shape(grad)}, parameter {params[name].shape}")

    state.t += 1
    correction1 = 1.0 - state.beta1 ** state.t
    correction2 = 1.0 - state.beta2 ** state.t
    for name, param in params.items():
        grad = grads.get(name)
        if grad is None:
            continue
        m = state.m.get(name)
        if m is None or m.dtype != param.dtype:
            m = state.m[name] = np.zeros_like(param)
            state.v[name] = np.zeros_like(param)
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * grad * grad
        param -= (state.lr * (m / correction1) / (np.sqrt(v / correction2) + state.eps)).astype(param.dtype)
    return state


class Adam:
    """Adam bound to a module's trainable parameters; each step bumps the module version."""

    def __init__(self, module: Module, lr: float = 0.001, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.module = module
        self.state = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps)

    def step(self, grads: Grads, loss: Optional[float] = None) -> None:
        if loss is not None and not np.isfinite(loss):
            raise NonFiniteLossError(f"loss became {loss}")
        for name, grad in grads.items():
            if not np.all(np.isfinite(grad)):
                logger.error(f"Non-finite gradient in '{name}'")
                raise NonFiniteLossError(f"gradient '{name}' is not finite")
        adam_step(self.module.named_parameters(trainable_only=True), grads, self.state)
        self.module.bump_version()

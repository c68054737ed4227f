"""
Neural Core: Finite-Difference Gradient Verification

Compares a module's reverse-mode gradients with central differences of a
random linear projection of its output.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .layers import Module

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-5
DEFAULT_TOLERANCE = 1e-4
_ERROR_FLOOR = 1e-4


@dataclass
class GradCheckReport:
    passed: bool
    worst_error: float
    worst_entry: str
    checked: int
    errors: Dict[str, float] = field(default_factory=dict)


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), _ERROR_FLOOR)


def _entries(size: int, limit: Optional[int], rng: np.random.Generator) -> np.ndarray:
    if limit is None or size <= limit:
        return np.arange(size)
    return rng.choice(size, size=limit, replace=False)


def grad_check(module: Module, inputs: Sequence[Any], tolerance: float = DEFAULT_TOLERANCE,
               step: float = DEFAULT_STEP, max_entries: Optional[int] = 40,
               rng: Optional[np.random.Generator] = None,
               forward: Optional[Callable[..., Tuple[np.ndarray, Any]]] = None,
               backward: Optional[Callable[[Any, np.ndarray], Tuple[Any, Dict[str, np.ndarray]]]] = None,
               ) -> GradCheckReport:
    """
    Verify every parameter gradient (and float input gradient) of a module.

    The module is switched to 64-bit first. `forward(*inputs) -> (y, tape)` and
    `backward(tape, dy) -> (dinputs, grads)` default to the module's own methods.

    Args:
        module: Network under test
        inputs: Positional forward inputs; float arrays are checked too
        tolerance: Largest admissible relative error
        step: Central-difference step h
        max_entries: Entries sampled per tensor (None checks all of them)
        rng: Generator for the projection and the entry sampling

    Returns:
        GradCheckReport with the worst relative error seen
    """
    module.set_precision(np.float64)
    rng = rng if rng is not None else np.random.default_rng(0)
    forward = forward or module.forward
    backward = backward or module.backward
    inputs = [np.array(x, dtype=np.float64) if _is_float(x) else x for x in inputs]

    y, tape = forward(*inputs)
    projection = rng.standard_normal(np.shape(y))
    dinputs, grads = backward(tape, projection)
    if not isinstance(dinputs, (tuple, list)):
        dinputs = (dinputs,)

    def loss() -> float:
        out, _ = forward(*inputs)
        return float(np.sum(projection * out))

    errors: Dict[str, float] = {}
    checked = 0

    def compare(name: str, tensor: np.ndarray, analytic: np.ndarray) -> None:
        nonlocal checked
        worst = 0.0
        flat, flat_grad = tensor.reshape(-1), np.asarray(analytic).reshape(-1)
        for index in _entries(flat.size, max_entries, rng):
            original = flat[index]
            flat[index] = original + step
            up = loss()
            flat[index] = original - step
            down = loss()
            flat[index] = original
            numeric = (up - down) / (2 * step)
            worst = max(worst, relative_error(float(flat_grad[index]), numeric))
            checked += 1
        errors[name] = worst

    for name, param in module.named_parameters().items():
        compare(name, param, grads.get(name, np.zeros_like(param)))
    for position, (x, dx) in enumerate(zip(inputs, dinputs)):
        if dx is not None and isinstance(x, np.ndarray) and x.dtype == np.float64:
            compare(f"input[{position}]", x, dx)

    worst_entry = max(errors, key=errors.get) if errors else ""
    worst_error = errors.get(worst_entry, 0.0)
    report = GradCheckReport(passed=worst_error < tolerance, worst_error=worst_error,
                             worst_entry=worst_entry, checked=checked, errors=errors)
    logger.info(f"Gradient check {type(module).__name__}: worst {worst_error:.2e} at '{worst_entry}' "
                f"({checked} entries, {'pass' if report.passed else 'FAIL'})")
    return report


def _is_float(x: Any) -> bool:
    return isinstance(x, np.ndarray) and np.issubdtype(x.dtype, np.floating)

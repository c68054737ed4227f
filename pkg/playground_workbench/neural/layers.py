"""
Neural Core: Modules and Dense Layers

Every network is a tree of Modules holding named numpy parameters. A forward
pass returns its output together with a Tape of intermediates; `backward`
consumes the tape and returns the input gradient plus a flat dict of
parameter gradients keyed like `named_parameters()`.

Tapes remember the parameter version they were recorded under. Optimiser
steps bump the version, so replaying an old tape raises StaleTapeError.
"""

import copy
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from ..core.errors import ShapeError, StaleTapeError

logger = logging.getLogger(__name__)

Grads = Dict[str, np.ndarray]

ACTIVATIONS = ("identity", "relu", "tanh", "sigmoid")


@dataclass
class Tape:
    owner: int
    version: int
    data: Dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, key: str) -> Any:
        return self.data[key]


def activate(name: str, x: np.ndarray) -> np.ndarray:
    if name == "identity":
        return x
    if name == "relu":
        return np.maximum(x, 0)
    if name == "tanh":
        return np.tanh(x)
    if name == "sigmoid":
        return expit(x)
    raise ValueError(f"unknown activation '{name}'")


def activation_grad(name: str, y: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """Gradient w.r.t. the pre-activation, written in terms of the output y."""
    if name == "identity":
        return dy
    if name == "relu":
        return dy * (y > 0)
    if name == "tanh":
        return dy * (1.0 - y * y)
    if name == "sigmoid":
        return dy * y * (1.0 - y)
    raise ValueError(f"unknown activation '{name}'")


def prefixed(prefix: str, grads: Grads) -> Grads:
    return {f"{prefix}.{name}": value for name, value in grads.items()}


def accumulate(total: Grads, grads: Grads) -> Grads:
    """Sum gradients into `total` (in place) and return it."""
    for name, value in grads.items():
        if name in total:
            total[name] = total[name] + value
        else:
            total[name] = value
    return total


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, dtype=np.float32) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(dtype)


class Module:
    """Base class: named parameters, child modules, version and precision."""

    def __init__(self, dtype=np.float32):
        self._params: Dict[str, np.ndarray] = {}
        self._children: Dict[str, "Module"] = {}
        self.dtype = np.dtype(dtype)
        self.version = 0
        self.frozen = False

    def add_param(self, name: str, value: np.ndarray) -> np.ndarray:
        self._params[name] = np.ascontiguousarray(value, dtype=self.dtype)
        return self._params[name]

    def add_child(self, name: str, module: "Module") -> "Module":
        self._children[name] = module
        return module

    def param(self, name: str) -> np.ndarray:
        return self._params[name]

    def child(self, name: str) -> "Module":
        return self._children[name]

    def named_parameters(self, trainable_only: bool = False) -> Dict[str, np.ndarray]:
        """Flat `child.sub.name -> array` view (arrays are the live parameters)."""
        if trainable_only and self.frozen:
            return {}
        out = dict(self._params)
        for child_name, module in self._children.items():
            out.update(prefixed(child_name, module.named_parameters(trainable_only)))
        return out

    def modules(self) -> Iterator["Module"]:
        yield self
        for module in self._children.values():
            yield from module.modules()

    def bump_version(self) -> None:
        for module in self.modules():
            module.version += 1

    def set_precision(self, dtype) -> "Module":
        """Cast every parameter (recursively) to float32 or float64."""
        dtype = np.dtype(dtype)
        for module in self.modules():
            module.dtype = dtype
            for name, value in module._params.items():
                module._params[name] = value.astype(dtype)
            module.version += 1
        return self

    def load_parameters(self, values: Dict[str, np.ndarray]) -> None:
        """Copy values into the live parameters; names and shapes must match exactly."""
        current = self.named_parameters()
        if set(values) != set(current):
            missing = sorted(set(current) - set(values))
            extra = sorted(set(values) - set(current))
            raise ShapeError(f"parameter names differ: missing {missing[:5]}, unexpected {extra[:5]}")
        for name, value in values.items():
            if current[name].shape != np.shape(value):
                raise ShapeError(f"'{name}' has shape {current[name].shape}, got {np.shape(value)}")
            current[name][...] = value
        self.bump_version()

    def _record(self, **data: Any) -> Tape:
        return Tape(owner=id(self), version=self.version, data=data)

    def _check(self, tape: Tape) -> None:
        if tape.owner != id(self):
            raise StaleTapeError(f"tape belongs to another {type(self).__name__}")
        if tape.version != self.version:
            raise StaleTapeError(
                f"tape recorded at version {tape.version}, parameters are at version {self.version}"
            )

    def _input(self, x: np.ndarray, width: int) -> np.ndarray:
        x = np.asarray(x, dtype=self.dtype)
        if x.shape[-1] != width:
            raise ShapeError(f"{type(self).__name__} expects width {width}, got shape {x.shape}")
        return x


class Dense(Module):
    """Affine map followed by an elementwise activation; any leading batch axes."""

    def __init__(self, in_features: int, out_features: int, activation: str = "identity",
                 rng: Optional[np.random.Generator] = None, dtype=np.float32, zero_init: bool = False):
        super().__init__(dtype)
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation '{activation}'")
        self.in_features = in_features
        self.out_features = out_features
        self.activation = activation
        rng = rng if rng is not None else np.random.default_rng(0)
        weights = (np.zeros((in_features, out_features)) if zero_init
                   else glorot_uniform(rng, in_features, out_features))
        self.add_param("W", weights)
        self.add_param("b", np.zeros(out_features))

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, Tape]:
        x = self._input(x, self.in_features)
        y = activate(self.activation, x @ self._params["W"] + self._params["b"])
        return y, self._record(x=x, y=y)

    def backward(self, tape: Tape, dy: np.ndarray) -> Tuple[np.ndarray, Grads]:
        self._check(tape)
        x, y = tape["x"], tape["y"]
        dz = activation_grad(self.activation, y, np.asarray(dy, dtype=self.dtype))
        x2 = x.reshape(-1, self.in_features)
        dz2 = dz.reshape(-1, self.out_features)
        grads = {"W": x2.T @ dz2, "b": dz2.sum(axis=0)}
        dx = dz @ self._params["W"].T
        return dx, grads


class MLP(Module):
    """Stack of Dense layers: hidden layers share one activation, the last has its own."""

    def __init__(self, sizes: Sequence[int], hidden_activation: str = "relu",
                 output_activation: str = "identity", rng: Optional[np.random.Generator] = None,
                 dtype=np.float32, zero_last: bool = False):
        super().__init__(dtype)
        if len(sizes) < 2:
            raise ShapeError("an MLP needs at least input and output sizes")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.sizes = tuple(int(s) for s in sizes)
        self.layers: List[Dense] = []
        for i, (fan_in, fan_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            last = i == len(self.sizes) - 2
            layer = Dense(fan_in, fan_out, output_activation if last else hidden_activation,
                          rng=rng, dtype=dtype, zero_init=zero_last and last)
            self.layers.append(self.add_child(str(i), layer))

    @property
    def in_features(self) -> int:
        return self.sizes[0]

    @property
    def out_features(self) -> int:
        return self.sizes[-1]

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, Tape]:
        tapes = []
        for layer in self.layers:
            x, tape = layer.forward(x)
            tapes.append(tape)
        return x, self._record(layers=tapes)

    def backward(self, tape: Tape, dy: np.ndarray) -> Tuple[np.ndarray, Grads]:
        self._check(tape)
        grads: Grads = {}
        for i in reversed(range(len(self.layers))):
            dy, layer_grads = self.layers[i].backward(tape["layers"][i], dy)
            grads.update(prefixed(str(i), layer_grads))
        return dy, grads


def clone(module: Module) -> Module:
    """Independent deep copy (used for target networks)."""
    twin = copy.deepcopy(module)
    for m in twin.modules():
        m.version = 0
    return twin


def soft_update(target: Module, source: Module, tau: float) -> None:
    """target <- (1 - tau) * target + tau * source, parameter by parameter."""
    source_params = source.named_parameters()
    for name, value in target.named_parameters().items():
        value *= (1.0 - tau)
        value += tau * source_params[name]
    target.bump_version()

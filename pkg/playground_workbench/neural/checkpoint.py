"""
Neural Core: Checkpoint Archives

Named-tensor archives on `numpy.savez` with a JSON header entry. Loading is
strict: the archive must hold exactly the module's parameter names, with the
same shapes.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .. import __version__
from ..core.errors import SchemaVersionError, ShapeError
from .layers import Module

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
_HEADER_KEY = "__header__"


def save_checkpoint(path, tensors: Dict[str, np.ndarray], meta: Optional[Dict[str, Any]] = None) -> Path:
    """Write named tensors plus a metadata block."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {"format_version": FORMAT_VERSION, "code_version": __version__, "meta": meta or {}}
    arrays = {name: np.asarray(value) for name, value in tensors.items()}
    if _HEADER_KEY in arrays:
        raise ShapeError(f"'{_HEADER_KEY}' is a reserved tensor name")
    with open(path, "wb") as f:
        np.savez(f, **arrays, **{_HEADER_KEY: np.array(json.dumps(header, sort_keys=True))})
    logger.info(f"Checkpoint saved: {path} ({len(arrays)} tensors)")
    return path


def read_checkpoint(path) -> Tuple[Dict[str, np.ndarray], Dict[str, Any]]:
    """Return (tensors, meta) of an archive."""
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as archive:
            header = json.loads(str(archive[_HEADER_KEY]))
            tensors = {name: archive[name] for name in archive.files if name != _HEADER_KEY}
    except (OSError, KeyError, ValueError) as e:
        logger.error(f"Cannot read checkpoint {path}: {e}")
        raise
    if header.get("format_version") != FORMAT_VERSION:
        raise SchemaVersionError(f"{path}: checkpoint format {header.get('format_version')}, expected {FORMAT_VERSION}")
    return tensors, header.get("meta", {})


def module_tensors(module: Module, prefix: str = "") -> Dict[str, np.ndarray]:
    params = module.named_parameters()
    return {f"{prefix}{name}": value.copy() for name, value in params.items()}


def load_into(module: Module, tensors: Dict[str, np.ndarray], prefix: str = "") -> None:
    """Strict load of the `prefix`-ed tensors into a module."""
    selected = {name[len(prefix):]: value for name, value in tensors.items() if name.startswith(prefix)}
    module.load_parameters(selected)


def load_checkpoint(path, module: Module) -> Dict[str, Any]:
    """Load a single-module archive; returns its metadata."""
    tensors, meta = read_checkpoint(path)
    load_into(module, tensors)
    logger.info(f"Checkpoint loaded: {path}")
    return meta

"""
Neural Core
Numpy layers with taped reverse-mode gradients, LSTM language model, Adam,
finite-difference checks and checkpoint archives
"""

from .checkpoint import load_checkpoint, load_into, module_tensors, read_checkpoint, save_checkpoint
from .gradcheck import GradCheckReport, grad_check
from .losses import binary_cross_entropy, mean_squared_error
from .layers import MLP, Dense, Module, Tape, accumulate, clone, prefixed, soft_update
from .lstm import LSTM, Embedding, LanguageModel
from .optim import Adam, AdamState, adam_step

__all__ = ['load_checkpoint', 'load_into', 'module_tensors', 'read_checkpoint', 'save_checkpoint',
           'GradCheckReport', 'grad_check', 'MLP', 'Dense', 'Module', 'Tape', 'accumulate',
           'clone', 'prefixed', 'soft_update', 'LSTM', 'Embedding', 'LanguageModel', 'Adam',
           'AdamState', 'adam_step', 'binary_cross_entropy', 'mean_squared_error']

"""
Core module initialization
"""

from .config import RunConfig, DEFAULT_SETTINGS, default_data_root
from .errors import WorkbenchError
from .logging_config import setup_logging
from .seeding import derive_seed, make_rng
from .utils import WorkbenchReport, export_to_json, read_records, write_records

__all__ = ['RunConfig', 'DEFAULT_SETTINGS', 'default_data_root', 'WorkbenchError',
           'setup_logging', 'derive_seed', 'make_rng', 'WorkbenchReport',
           'export_to_json', 'read_records', 'write_records']

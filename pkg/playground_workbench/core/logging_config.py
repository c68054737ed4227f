"""
Logging configuration for the Playground Workbench
"""

import copy
import logging
import logging.config
from pathlib import Path
from typing import Optional

LOGGER_NAME = "playground_workbench"

LOGGING_CONFIG = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'standard': {
            'format': '%(asctime)s [%(levelname)s] %(name)s: %(message)s',
            'datefmt': '%Y-%m-%d %H:%M:%S'
        },
        'detailed': {
            'format': '%(asctime)s [%(levelname)s] %(name)s:%(lineno)d: %(message)s',
            'datefmt': '%Y-%m-%d %H:%M:%S'
        },
        'console': {
            'format': '%(name)s: %(message)s'
        }
    },
    'handlers': {
        'console': {
            'class': 'rich.logging.RichHandler',
            'level': 'INFO',
            'formatter': 'console',
            'show_path': False
        },
        'file': {
            'class': 'logging.handlers.RotatingFileHandler',
            'level': 'DEBUG',
            'formatter': 'detailed',
            'filename': 'workbench.log',
            'maxBytes': 10485760,  # 10MB
            'backupCount': 5
        },
        'error_file': {
            'class': 'logging.handlers.RotatingFileHandler',
            'level': 'ERROR',
            'formatter': 'detailed',
            'filename': 'workbench_errors.log',
            'maxBytes': 10485760,  # 10MB
            'backupCount': 5
        }
    },
    'loggers': {
        LOGGER_NAME: {
            'level': 'DEBUG',
            'handlers': ['console', 'file', 'error_file'],
            'propagate': False
        }
    },
    'root': {
        'level': 'WARNING',
        'handlers': ['console']
    }
}


def setup_logging(log_dir: str = 'logs', level: str = 'INFO',
                  config_dict: Optional[dict] = None) -> logging.Logger:
    """
    Configure workbench logging.

    Args:
        log_dir: Directory receiving the rotating log files
        level: Console level name (DEBUG, INFO, WARNING, ERROR)
        config_dict: Optional custom logging configuration

    Returns:
        The package logger
    """
    config = copy.deepcopy(config_dict if config_dict is not None else LOGGING_CONFIG)

    logs_dir = Path(log_dir)
    logs_dir.mkdir(parents=True, exist_ok=True)

    for handler_config in config['handlers'].values():
        if 'filename' in handler_config:
            handler_config['filename'] = str(logs_dir / Path(handler_config['filename']).name)
    if 'console' in config['handlers']:
        config['handlers']['console']['level'] = level

    logging.config.dictConfig(config)

    logger = logging.getLogger(LOGGER_NAME)
    logger.debug(f"Workbench logging initialized in {logs_dir}")
    return logger

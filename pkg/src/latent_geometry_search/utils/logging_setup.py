import logging
import sys
import os
from datetime import datetime
from typing import Any, Dict, Optional


class ContextFilter(logging.Filter):
    """
    A logging filter that injects contextual information (command, run) into log records.
    """
    def __init__(self):
        super().__init__()
        self.command = 'general'
        self.run = ''

    def filter(self, record):
        record.command = self.command
        record.run = self.run
        return True

# Module-level instance of the filter
context_filter = ContextFilter()

def set_log_context(command: str, run: str = ''):
    """Sets the global logging context."""
    context_filter.command = command
    context_filter.run = run

def clear_log_context():
    """Clears the global logging context."""
    context_filter.command = 'general'
    context_filter.run = ''

def setup_logging(logging_config: Optional[Dict[str, Any]] = None):
    """
    Configures the root logger to write to standard error and, unless disabled,
    to a timestamped log file.

    logging_config is the `logging` section of config.json: level, dir, file.
    """
    logging_config = logging_config or {}
    log_format = '%(asctime)s - %(levelname)s - [%(command)s - %(run)s] - %(message)s'

    log_level_str = str(logging_config.get('level', 'INFO')).upper()
    log_level = getattr(logging, log_level_str, logging.INFO)

    # Get the root logger
    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)

    # Remove any existing handlers
    if root_logger.hasHandlers():
        root_logger.handlers.clear()

    formatter = logging.Formatter(log_format)

    # stdout carries command results, so log lines go to stderr
    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.addFilter(context_filter)
    stream_handler.setFormatter(formatter)
    root_logger.addHandler(stream_handler)

    log_filename = None
    if logging_config.get('file', True):
        output_dir = logging_config.get('dir', 'logs')
        os.makedirs(output_dir, exist_ok=True)
        timestamp = datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
        log_filename = os.path.join(output_dir, f"latent_geometry_search_{timestamp}.log")

        file_handler = logging.FileHandler(log_filename)
        file_handler.addFilter(context_filter)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    logger = logging.getLogger(__name__)
    if log_filename:
        logger.info("Logging configured. Writing to stderr and log file: %s", log_filename)
    else:
        logger.info("Logging configured. Writing to stderr only.")

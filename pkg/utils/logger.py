import logging
import os
from utils.config import Config


def setup_logger(level=None, log_file=None):
    """Configure and return a logger for the application"""
    log_file = log_file or Config.LOG_FILE
    level = level or Config.LOG_LEVEL

    # Ensure log directory exists
    log_dir = os.path.dirname(log_file)
    if log_dir and not os.path.exists(log_dir):
        os.makedirs(log_dir)

    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_file, mode='w'),
            logging.StreamHandler()
        ],
        force=True
    )

    return logging.getLogger(Config.APP_NAME)


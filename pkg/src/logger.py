import logging
import os
import sys
from datetime import datetime

LOG_DIR_ENV = "SEPKIT_LOG_DIR"
DEFAULT_LOG_FOLDER = "logs"

_handlers = []


class StderrHandler(logging.StreamHandler):
    """Writes to whatever ``sys.stderr`` is when a record is emitted."""

    def __init__(self):
        super().__init__(sys.stderr)

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value):
        pass


def setup_logger(log_folder=None, verbose=False):
    log_folder = log_folder or os.environ.get(LOG_DIR_ENV) or DEFAULT_LOG_FOLDER
    os.makedirs(log_folder, exist_ok=True)

    timestamp = datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
    log_file = os.path.join(log_folder, f"log_{timestamp}.log")

    logger = logging.getLogger()
    logger.setLevel(logging.DEBUG)

    # a second call replaces, not duplicates, our handlers
    for handler in _handlers:
        logger.removeHandler(handler)
        handler.close()
    _handlers.clear()

    # Disable logging of pool worker start/stop
    logging.getLogger("multiprocessing").setLevel(logging.WARNING)

    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )

    file_handler = logging.FileHandler(log_file)
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(formatter)

    # stderr: stdout is reserved for data and summaries
    stream_handler = StderrHandler()
    stream_handler.setLevel(logging.DEBUG if verbose else logging.INFO)
    stream_handler.setFormatter(formatter)

    logger.addHandler(file_handler)
    logger.addHandler(stream_handler)
    _handlers.extend([file_handler, stream_handler])

    return logger

import io
import logging

from src.logger import StderrHandler, setup_logger


def test_stream_handler_follows_current_stderr(tmp_path, monkeypatch):
    setup_logger(tmp_path)
    buffer = io.StringIO()
    monkeypatch.setattr("sys.stderr", buffer)
    logging.getLogger("Logger Test").info("written after stderr was swapped")
    assert "written after stderr was swapped" in buffer.getvalue()


def test_setup_logger_replaces_its_handlers(tmp_path):
    setup_logger(tmp_path)
    setup_logger(tmp_path, verbose=True)
    root = logging.getLogger()
    assert sum(isinstance(h, StderrHandler) for h in root.handlers) == 1
    assert sum(isinstance(h, logging.FileHandler) for h in root.handlers) == 1
    assert len(list(tmp_path.glob("log_*.log"))) >= 1

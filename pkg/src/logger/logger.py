import logging
import os
import time
from contextlib import contextmanager
from threading import Lock
from typing import Iterator, List, Optional, Tuple

from src.logger.format import format_duration


class MyLogger:
    """
    Process-wide logger that nests messages inside named actions.

    ``start(action)`` opens a block, every message logged until the matching
    ``close(action)`` is indented one level deeper, and closing the block logs
    its wall-clock duration. Only one instance exists per process; later
    constructions return the first one, whatever name they pass.
    """
    _instance = None
    _lock = Lock()

    def __new__(cls, name: str = 'LoRaReplication', level: int = logging.INFO):
        if cls._instance is None:
            with cls._lock:
                if cls._instance is None:  # Double-checked locking
                    cls._instance = super(MyLogger, cls).__new__(cls)
                    cls._instance._initialize_logger(name, level)
        return cls._instance

    def _initialize_logger(self, name: str, level: int):
        """
        :param name: Name of the underlying ``logging`` logger.
        :param level: Initial logging level.
        """
        self.actions: List[Tuple[str, float]] = []
        self.sep = ' - '
        self.spacer = '   '
        self._actions_lock = Lock()

        self.logger = logging.getLogger(name)
        self.logger.setLevel(level)
        self.formatter = logging.Formatter(
            f'%(asctime)s{self.sep}%(name)s{self.sep}%(levelname)s: %(message)s'
        )

        if not self.logger.handlers:
            handler = logging.StreamHandler()
            handler.setLevel(level)
            handler.setFormatter(self.formatter)
            self.logger.addHandler(handler)

    def _indent_message(self, level_msg: str, message: str) -> str:
        """
        Pad the message so bodies line up across levels, then indent by the action depth.

        :param level_msg: Level name of the record ('INFO', 'DEBUG', ...).
        :param message: Original log message.
        :return: Indented message.
        """
        prefix_length = len('2024-12-04 10:01:34,252') + 2 * len(self.sep) + len(self.logger.name) + len(': ')
        pad = len('CRITICAL') - len(level_msg)
        level = self.spacer * len(self.actions)
        continuation = '\n' + ' ' * (prefix_length + len('CRITICAL')) + level
        return ' ' * pad + level + str(message).replace('\n', continuation)

    def start(self, action: str):
        """
        Open an action block.

        :param action: Description of the action.
        """
        self.info(f"{action} {{")
        with self._actions_lock:
            self.actions.append((action, time.time()))

    def close(self, action: str) -> Tuple[Optional[str], Optional[float]]:
        """
        Close the most recent action block and log its duration.

        :param action: Description the block was opened with.
        :return: The closed action and its duration in seconds, or (None, None) on mismatch.
        """
        with self._actions_lock:
            if not self.actions:
                closed = None
            else:
                closed = self.actions.pop()

        if closed is None:
            self.warning(f"No action to close (asked to close '{action}').")
            return None, None

        opened_action, start_time = closed
        if opened_action != action:
            self.warning(f"Action mismatch: closing '{action}' but the most recent action is '{opened_action}'.")

        duration = time.time() - start_time
        self.info(f"}} ({format_duration(duration)})")
        return opened_action, duration

    @contextmanager
    def action(self, action: str) -> Iterator[None]:
        """Context-manager form of a ``start``/``close`` pair."""
        self.start(action)
        try:
            yield
        finally:
            self.close(action)

    def debug(self, msg, *args, **kwargs):
        self.logger.debug(self._indent_message('DEBUG', msg), *args, **kwargs)

    def info(self, msg, *args, **kwargs):
        self.logger.info(self._indent_message('INFO', msg), *args, **kwargs)

    def warning(self, msg, *args, **kwargs):
        self.logger.warning(self._indent_message('WARNING', msg), *args, **kwargs)

    def error(self, msg, *args, **kwargs):
        self.logger.error(self._indent_message('ERROR', msg), *args, **kwargs)

    def critical(self, msg, *args, **kwargs):
        self.logger.critical(self._indent_message('CRITICAL', msg), *args, **kwargs)

    def setLevel(self, level):
        self.logger.setLevel(level)
        for handler in self.logger.handlers:
            handler.setLevel(level)

    def set_log_file(self, log_file: str):
        """
        Add a file handler writing to ``log_file``; a second call with the same path is a no-op.

        :param log_file: Path to the log file.
        """
        os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)

        for handler in self.logger.handlers:
            if isinstance(handler, logging.FileHandler) and \
                    os.path.abspath(handler.baseFilename) == os.path.abspath(log_file):
                self.debug(f"File handler for {log_file} already exists.")
                return

        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(self.logger.level)
        file_handler.setFormatter(self.formatter)
        self.logger.addHandler(file_handler)
        self.info(f"Logging to {log_file}")

"""
Logging setup and progress reporting.

Console output uses the short ``LEVEL - message`` format; the optional log
file records timestamps and logger names. Search and round progress goes
through ProgressLogger with a ``[Progress]`` prefix.
"""

import logging
import time
from pathlib import Path
from typing import Optional, Union


CONSOLE_FORMAT = '%(levelname)s - %(message)s'
FILE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: Union[int, str] = logging.INFO,
                  log_file: Optional[Union[str, Path]] = None) -> logging.Logger:
    """
    Configure the package logger.

    Args:
        level: Console level
        log_file: Optional file receiving DEBUG and above

    Returns:
        The ``emdapprox`` logger
    """
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.INFO

    logger = logging.getLogger("emdapprox")
    logger.setLevel(logging.DEBUG)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    logger.addHandler(console_handler)

    if log_file is not None:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_path)
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT))
        logger.addHandler(file_handler)

    logger.propagate = False
    return logger


class ProgressLogger:
    """
    Dedicated logger for progress tracking with [Progress] prefix.

    Tracks the threshold search over t and the rounds of each solver run.
    """

    def __init__(self, logger: logging.Logger, round_every: int = 50):
        self.logger = logger
        self.round_every = max(1, round_every)
        self.search_start_time = None
        self.run_start_time = None

        self.total_runs = 0
        self.total_rounds = 0

    def start_search(self, t_lo: float, t_hi: float, num_thresholds: int):
        """Start search timing and log the bracket."""
        self.search_start_time = time.perf_counter()
        self.logger.info(f"[Progress] Search bracket [{t_lo:.6g}, {t_hi:.6g}], {num_thresholds} thresholds")

    def start_run(self, k: int, t: float):
        """Start timing one solver run at threshold index k."""
        self.run_start_time = time.perf_counter()
        self.total_runs += 1
        self.logger.info(f"[Progress] Start run k={k}, t={t:.6g}")

    def log_round(self, round_num: int, total_rounds: int, level: Optional[int], gap: float):
        """Log every round_every-th round."""
        self.total_rounds += 1
        if round_num == 1 or round_num % self.round_every == 0 or round_num == total_rounds:
            level_text = "none" if level is None else str(level)
            self.logger.debug(f"[Progress] Round {round_num}/{total_rounds}, level {level_text}, gap {gap:.6g}")

    def end_run(self, k: int, status: str, rounds: int):
        """End run timing and log its outcome."""
        if self.run_start_time:
            run_time = time.perf_counter() - self.run_start_time
            self.logger.info(f"[Progress] End run k={k}: {status} after {rounds} rounds ({run_time:.2f}s)")

    def end_search(self, t_star: float):
        """End search timing and log the result."""
        if self.search_start_time:
            total_time = time.perf_counter() - self.search_start_time
            self.logger.info(f"[Progress] Search result t*={t_star:.6g}")
            self.logger.info(f"[Progress] Runs: {self.total_runs}, rounds: {self.total_rounds}")
            self.logger.info(f"[Progress] Total search time: {total_time:.2f}s")

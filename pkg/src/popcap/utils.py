"""
Utilitaires divers pour popcap
"""

import logging
import sys
from typing import Optional

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(debug: bool = False, level: Optional[str] = None) -> None:
    """Configure le système de logging

    Les logs partent sur stderr : stdout est réservé aux documents JSON.
    """
    if debug:
        log_level = logging.DEBUG
    else:
        log_level = getattr(logging, str(level or "WARNING").upper(), logging.WARNING)

    logging.basicConfig(
        level=log_level,
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


def chunk_ranges(total: int, parts: int):
    """Découpe ``range(total)`` en au plus ``parts`` intervalles contigus"""
    parts = max(1, min(parts, total)) if total else 1
    step, extra = divmod(total, parts)
    start = 0
    for i in range(parts):
        stop = start + step + (1 if i < extra else 0)
        yield start, stop
        start = stop

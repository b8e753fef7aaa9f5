"""
Shared stage plumbing: timing, status recording and mode naming.
"""

import logging
import time
from contextlib import contextmanager
from datetime import datetime
from typing import Any, Dict, Iterator, Optional

from semgraft.errors import SemgraftError

logger = logging.getLogger(__name__)


@contextmanager
def run_stage(name: str, report: Dict[str, Any], timestamps: Optional[Dict[str, Any]] = None) -> Iterator[None]:
    """
    Record start/end/duration of a stage in `timestamps` and its status in
    `report`. SemgraftErrors are recorded as a failed status and re-raised.
    """
    tag = name.upper()
    timestamps = timestamps if timestamps is not None else {}
    stage_start = time.time()
    timestamps[f"{name}_start"] = datetime.now().isoformat()
    logger.info("[%s] starting", tag)
    try:
        yield
    except SemgraftError as e:
        report["status"] = "failed"
        report["error"] = str(e)
        logger.error("[%s] failed: %s", tag, e)
        raise
    else:
        report.setdefault("status", "ok")
    finally:
        timestamps[f"{name}_end"] = datetime.now().isoformat()
        timestamps[f"{name}_duration"] = time.time() - stage_start
    logger.info("[%s] completed in %.2fs", tag, timestamps[f"{name}_duration"])


def mode_slug(mode: str) -> str:
    """File-name form of a label mode: samt+sem -> samt_sem."""
    return mode.replace("+", "_")

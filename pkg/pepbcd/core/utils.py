import logging
from rich.logging import RichHandler

from pepbcd.config import settings
from pepbcd.core.errors import ConstructionError


def setup_logger(name: str = "pepbcd"):
    """
    Configures a Rich-based logger for the application.
    """
    logging.basicConfig(
        level=settings.LOG_LEVEL,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=True)]
    )
    return logging.getLogger(name)

logger = setup_logger()


def parse_float_list(text: str) -> list[float]:
    """
    Parses a comma separated list such as "1,4" or "0.5, 1, 2".
    """
    if text is None or not str(text).strip():
        return []
    try:
        return [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError as e:
        raise ConstructionError(f"Expected comma separated numbers, got '{text}'") from e


def parse_int_list(text: str) -> list[int]:
    """
    Parses "1,2,1,2" into [1, 2, 1, 2].
    """
    values = parse_float_list(text)
    if any(v != int(v) for v in values):
        raise ConstructionError(f"Expected comma separated integers, got '{text}'")
    return [int(v) for v in values]


def parse_range(text: str) -> list[float]:
    """
    Parses a sweep range. Accepts "1..6" (inclusive integer range),
    "0.1:2.0:0.05" (start:stop:step, stop included) or a plain list "1,2,4".
    """
    text = str(text).strip()
    if ".." not in text and ":" not in text:
        return parse_float_list(text)
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return [float(v) for v in range(int(lo), int(hi) + 1)]
        parts = [float(tok) for tok in text.split(":")]
    except ValueError as e:
        raise ConstructionError(f"Cannot read range '{text}': {e}") from e
    if len(parts) != 3 or parts[2] <= 0:
        raise ConstructionError(f"Range '{text}' must look like start:stop:step with step > 0")
    start, stop, step = parts
    count = int(round((stop - start) / step))
    return [round(start + i * step, 12) for i in range(count + 1)]

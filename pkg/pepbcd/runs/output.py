import json
import math
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from pepbcd.config import settings
from pepbcd.core.utils import logger

REPORT_DIR = settings.DATA_DIR / "reports"


def output_path(out: Optional[str], default_name: str, suffix: str) -> Path:
    """`out` with the given suffix, or data/reports/<default_name><suffix>."""
    path = Path(out) if out else REPORT_DIR / default_name
    if path.suffix in (".csv", ".json"):
        path = path.with_suffix("")
    path = path.with_name(path.name + suffix)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def write_json(doc, path: Path) -> Path:
    path.write_text(json.dumps(_jsonable(doc), indent=2) + "\n")
    logger.info(f"Wrote {path}")
    return path


def write_table(df: pd.DataFrame, out: Optional[str], default_name: str, fmt: str = "csv") -> Path:
    path = output_path(out, default_name, f".{fmt}")
    if fmt == "json":
        df.to_json(path, orient="records", indent=2)
    else:
        df.to_csv(path, index=False)
    logger.info(f"Wrote {len(df)} rows to {path}")
    return path

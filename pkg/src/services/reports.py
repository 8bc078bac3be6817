"""Report writers and provenance records.

Reports are byte-stable: JSON keys are sorted, floats in CSV files use repr,
and nothing depends on wall-clock time.
"""

import csv
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Optional

from .. import __version__
from ..config import get_settings
from .models import Provenance

logger = logging.getLogger(__name__)

HASH_LENGTH = 16


def canonical_json(payload: Any) -> str:
    """Compact, key-sorted JSON used for hashing."""
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def config_hash(payload: Any) -> str:
    """First 16 hex digits of the sha256 of the canonical JSON."""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()[:HASH_LENGTH]


def build_provenance(
    config: dict,
    convention: str,
    ladder: list[tuple[float, int]],
    tolerance: Optional[float] = None,
) -> Provenance:
    """Provenance record for a run configuration."""
    settings = get_settings()
    return Provenance(
        config_hash=config_hash(config),
        version=__version__,
        convention=convention,
        tolerances={
            "bound": settings.bound_tolerance if tolerance is None else tolerance,
            "hermiticity": settings.hermiticity_tolerance,
            "eigen_residual": settings.eigen_residual_tolerance,
            "quad_epsabs": settings.quad_epsabs,
            "quad_epsrel": settings.quad_epsrel,
        },
        ladder=[(float(theta), int(n)) for theta, n in ladder],
    )


def write_json(path: Path, payload: Any) -> Path:
    """Write a JSON report with sorted keys and a trailing newline."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True))
        f.write("\n")
    logger.debug(f"Wrote {path}")
    return path


def _cell(value: Any) -> str:
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows_csv(path: Path, header: list[str], rows: Iterable[Iterable[Any]]) -> Path:
    """Write a CSV table; floats are written with repr."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    logger.debug(f"Wrote {path}")
    return path

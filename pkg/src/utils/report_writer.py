"""Write result tables as CSV or JSON."""
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Mapping

import numpy as np

from src.constants import CSV_FLOAT_FORMAT

logger = logging.getLogger(__name__)

FORMATS = ('csv', 'json')


def format_number(value: Any) -> str:
    """Round-trip text for one table cell."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return CSV_FLOAT_FORMAT % float(value)


def _as_columns(columns: Mapping[str, Any]) -> Dict[str, np.ndarray]:
    arrays = {name: np.atleast_1d(np.asarray(values)) for name, values in columns.items()}
    lengths = {values.shape[0] for values in arrays.values()}
    if len(lengths) > 1:
        raise ValueError(f"columns have different lengths: {sorted(lengths)}")
    return arrays


def generate_csv(columns: Mapping[str, Any]) -> str:
    """Header row plus one comma-separated row per entry."""
    arrays = _as_columns(columns)
    headers = list(arrays)
    rows = [','.join(headers)]
    n_rows = next(iter(arrays.values())).shape[0] if arrays else 0
    for index in range(n_rows):
        rows.append(','.join(format_number(arrays[name][index]) for name in headers))
    return '\n'.join(rows) + '\n'


def _json_safe(values: np.ndarray) -> List[Any]:
    return [None if isinstance(v, float) and not math.isfinite(v) else v for v in values.tolist()]


def generate_json(columns: Mapping[str, Any], metadata: Mapping[str, Any]) -> str:
    """One object: resolved config and run metadata, then column arrays (NaN as null)."""
    arrays = _as_columns(columns)
    document = dict(metadata)
    document['columns'] = {name: _json_safe(values) for name, values in arrays.items()}
    return json.dumps(document, indent=2, default=str) + '\n'


def write_table(path: str, columns: Mapping[str, Any], fmt: str = 'csv',
                metadata: Mapping[str, Any] = None) -> Path:
    """
    Write a result table to disk, creating parent directories.

    Args:
        path: Output file path
        columns: Column name to 1-D values, all of equal length
        fmt: 'csv' or 'json'
        metadata: Extra top-level fields for JSON output

    Returns:
        Path: The file written
    """
    if fmt not in FORMATS:
        raise ValueError(f"Unknown output format '{fmt}' (expected one of {FORMATS})")
    text = generate_csv(columns) if fmt == 'csv' else generate_json(columns, metadata or {})
    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)
    logger.info(f"Wrote {output_path}")
    return output_path

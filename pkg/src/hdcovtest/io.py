"""CSV ingestion and JSON result documents."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .exceptions import DataFormatError
from .homtest import TestResult

__all__ = [
    "read_group_csv",
    "write_group_csv",
    "file_sha256",
    "result_record",
    "build_document",
    "write_result_json",
    "read_result_json",
]


def read_group_csv(path, header: bool = False) -> np.ndarray:
    """Read one group as an ``n x p`` matrix (rows are samples).

    Parameters
    ----------
    path : path-like
        UTF-8, comma-delimited file; LF or CRLF line endings.
    header : bool
        Skip the first row.

    Raises
    ------
    DataFormatError
        On ragged rows, non-numeric or non-finite cells, or fewer than two rows.
    """
    path = Path(path)
    rows: list[list[float]] = []
    width = None
    with path.open(newline="", encoding="utf-8-sig") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if header and lineno == 1:
                continue
            if not record or all(not c.strip() for c in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise DataFormatError(
                    f"{path}: line {lineno} has {len(record)} fields, expected {width}",
                    path=str(path),
                    line=lineno,
                )
            try:
                values = [float(c) for c in record]
            except ValueError:
                raise DataFormatError(
                    f"{path}: line {lineno} has a non-numeric cell", path=str(path), line=lineno
                ) from None
            if not all(math.isfinite(v) for v in values):
                raise DataFormatError(
                    f"{path}: line {lineno} has a non-finite cell", path=str(path), line=lineno
                )
            rows.append(values)
    if len(rows) < 2:
        raise DataFormatError(f"{path}: need at least 2 sample rows, found {len(rows)}", path=str(path))
    return np.array(rows, dtype=float)


def write_group_csv(X, path=None) -> str:
    """Write a sample matrix as CSV with round-trip float precision.

    Returns the CSV text; also writes it to ``path`` when given.
    """
    X = np.asarray(X, dtype=float)
    text = "".join(",".join(repr(float(v)) for v in row) + "\n" for row in X)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def result_record(res: TestResult) -> dict:
    """Flatten a :class:`TestResult` into the JSON result schema."""
    return {
        "label": res.label,
        "statistic": res.statistic,
        "rho": res.scale_factor,
        "scaled": res.scaled_statistic,
        "df": res.df,
        "p_value": res.p_value,
        "region": list(res.region) if res.region is not None else None,
        "reject": res.reject,
        "group_quadforms": list(res.group_quadforms),
        "pooled": res.pooled,
    }


def build_document(
    inputs: Sequence,
    config: dict,
    results: Iterable[dict],
    warnings: Iterable[str] = (),
    **extra,
) -> dict:
    """Assemble a result document with a fixed field order.

    ``inputs`` are file paths; each is fingerprinted by SHA-256.
    """
    doc = {
        "version": __version__,
        "inputs": [{"path": str(p), "sha256": file_sha256(p)} for p in inputs],
        "config": dict(config),
        "results": list(results),
        "warnings": list(warnings),
    }
    doc.update(extra)
    doc["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    return doc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def write_result_json(doc: dict, path) -> None:
    """Write ``doc`` as JSON; floats use shortest round-trip repr."""
    text = json.dumps(_jsonable(doc), indent=2, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def read_result_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))

# src/utils/io_utils.py
"""
File and parsing helpers for hierstab
Atomic artifact writes, JSON/CSV emission and range expressions
"""

from pathlib import Path
from typing import Any, Dict, List, Sequence, Union
import json
import os
import tempfile

import numpy as np
import pandas as pd
from pydantic import BaseModel

from ..core.exceptions import DomainError


def parse_range(expr: Union[str, int, float]) -> List[Union[int, float]]:
    """
    Parse ``a``, ``a..b`` (inclusive) or ``a..b/step``

    Args:
        expr: Range expression

    Returns:
        List: Expanded values; integers when every part is an integer
    """
    if not isinstance(expr, str):
        return [expr]
    text = expr.strip()
    if ".." not in text:
        return [int(text)] if _is_int(text) else [float(text)]

    start_text, rest = text.split("..", 1)
    if "/" in rest:
        end_text, step_text = rest.split("/", 1)
    else:
        end_text, step_text = rest, "1"
    integral = all(_is_int(part) for part in (start_text, end_text, step_text))
    start, end, step = float(start_text), float(end_text), float(step_text)
    if step <= 0 or end < start:
        raise DomainError(f"invalid range expression: {expr}")

    count = int(round((end - start) / step)) + 1
    values = [start + k * step for k in range(count) if start + k * step <= end + 1e-12]
    if integral:
        return [int(round(v)) for v in values]
    return [round(v, 12) for v in values]


def _is_int(text: str) -> bool:
    try:
        int(text)
        return True
    except ValueError:
        return False


def to_jsonable(obj: Any) -> Any:
    """Convert reports, numpy values and paths into plain JSON types"""
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json")
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    return obj


def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    """
    Write text through a temporary file in the same directory, then rename

    Args:
        path: Destination file
        text (str): Content

    Returns:
        Path: Destination path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def render_json(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), ensure_ascii=False, indent=2, sort_keys=False) + "\n"


def render_csv(rows: Sequence[Dict[str, Any]], columns: Sequence[str] = None) -> str:
    """CSV with header, '.' decimals, no thousands separators and LF endings"""
    frame = pd.DataFrame(list(rows), columns=list(columns) if columns else None)
    return frame.to_csv(index=False, lineterminator="\n", float_format=None)


__all__ = ['parse_range', 'to_jsonable', 'atomic_write_text', 'render_json', 'render_csv']

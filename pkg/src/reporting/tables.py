"""
Writers for the data files the CLI produces.

CSV files use ``,`` as separator, ``.`` as decimal mark, a header row and LF line
endings; floats are printed with ten significant digits so reruns compare equal
byte for byte.
"""
import json
import os
from typing import Any, Dict, List

import pandas as pd

CSV_FLOAT_FORMAT = "%.10g"


def _ensure_parent(filepath: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(filepath)), exist_ok=True)


def records_frame(records: List[Dict[str, Any]], columns: List[str]) -> pd.DataFrame:
    """DataFrame with exactly ``columns`` in that order; missing values become empty cells."""
    return pd.DataFrame.from_records(records, columns=columns)


def write_csv(frame: pd.DataFrame, filepath: str) -> str:
    """
    Write ``frame`` as CSV.

    :param frame: Table to write; the index is dropped.
    :param filepath: Destination, parent directories are created.
    :return: The path written.
    """
    _ensure_parent(filepath)
    frame.to_csv(filepath, index=False, sep=",", decimal=".", lineterminator="\n",
                 float_format=CSV_FLOAT_FORMAT)
    return filepath


def canonical_json(document: Any) -> str:
    """Sorted-key, two-space-indented JSON text with a trailing newline."""
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def write_json(document: Any, filepath: str) -> str:
    _ensure_parent(filepath)
    with open(filepath, "w", encoding="utf-8", newline="\n") as f:
        f.write(canonical_json(document))
    return filepath


def write_text(text: str, filepath: str) -> str:
    _ensure_parent(filepath)
    with open(filepath, "w", encoding="utf-8", newline="\n") as f:
        f.write(text if text.endswith("\n") else text + "\n")
    return filepath

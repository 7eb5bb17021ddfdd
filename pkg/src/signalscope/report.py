"""Document serialization module for signalscope.

Turns protocol results into JSON or CSV text and writes it to stdout or a
file. Reals carry 12 significant digits, switching to lowercase scientific
notation below 1e-4, so identical inputs always give byte-identical output.
"""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any
from typing import Dict
from typing import Iterable
from typing import List
from typing import Optional
from typing import Sequence

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"

SWEEP_COLUMNS = [
    "kind",
    "s",
    "epsilon",
    "theta_prime",
    "fidelity",
    "optimal_fidelity",
    "entropy_before",
    "entropy_after",
    "delta",
    "signaling",
    "feasible",
]


def format_real(value: float) -> str:
    """12 significant digits; scientific notation when |value| < 1e-4."""
    value = float(value)
    if value == 0.0:
        return "0"
    return f"{value:.12g}"


def _json_value(value: Any) -> Any:
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, (int, float)):
        return float(format_real(value)) if isinstance(value, float) else value
    if hasattr(value, "item"):
        return _json_value(value.item())
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    raise TypeError(f"Cannot serialize {type(value).__name__} into a document")


def _csv_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_real(value)
    return str(value)


def new_document(command: str, **fields: Any) -> Dict[str, Any]:
    """Document skeleton carrying the schema version and entropy unit."""
    document: Dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "entropy_unit": "bits",
    }
    document.update(fields)
    return document


def to_json(document: Dict[str, Any]) -> str:
    """Serialize a document as indented JSON with formatted reals."""
    return json.dumps(_json_value(document), indent=2) + "\n"


def to_csv(columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> str:
    """Serialize rows as CSV with a mandatory header, in the given column order."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_value(row.get(column)) for column in columns])
    return buffer.getvalue()


def parse_csv(text: str) -> List[Dict[str, str]]:
    """Read CSV text produced by to_csv back into string-valued rows."""
    return list(csv.DictReader(io.StringIO(text)))


def emit(text: str, output_path: Optional[str] = None) -> None:
    """Write a document to output_path, or to stdout when no path is given."""
    if output_path is None:
        print(text, end="")
        return
    path = Path(output_path)
    path.write_text(text)
    logger.info(f"Wrote document to {path}")

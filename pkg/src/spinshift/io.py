"""CSV and JSON emission with a provenance header, and the matching reader.

CSV dialect: comma separator, '.' decimal point, LF line endings, floats
written with ``repr`` (shortest round-trip form). Leading lines starting
with '#' carry ``key: value`` provenance and are skipped on re-ingest.
"""

import csv
import io as _io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__


def provenance(command, config_hash, extra=None):
    info = {"tool": "spinshift", "version": __version__, "command": command,
            "config_sha256": config_hash}
    if extra:
        info.update(extra)
    return info


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v) + 0.0  # drop the sign of -0.0
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def format_csv(columns, rows, header=None):
    buf = _io.StringIO()
    for k, v in (header or {}).items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, delimiter=",", lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, columns, rows, header=None):
    text = format_csv(columns, rows, header)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, newline="\n")
    return text


def _parse_cell(s):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(path_or_text):
    """Return (header dict, column names, list of rows) from an emitted CSV."""
    text = path_or_text
    if not (isinstance(text, str) and "\n" in text):
        text = Path(path_or_text).read_text()
    header, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(":")
            header[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    rows = [[_parse_cell(c) for c in row] for row in reader]
    return header, columns, rows


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def format_json(payload, header=None):
    doc = {"provenance": header or {}}
    doc.update(_jsonable(payload))
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def write_json(path, payload, header=None):
    text = format_json(payload, header)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, newline="\n")
    return text

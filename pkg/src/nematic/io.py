"""Bit-stable text output: CSV tables, JSON documents and field snapshots.

Every float is written with 17 significant digits (``%.17g``), which
round-trips IEEE doubles exactly; non-finite values are spelled ``inf``,
``-inf`` and ``nan`` (as strings in JSON). Line endings are LF.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import DomainError
from .fields import AxiQField, ExteriorGrid, PsiField


def fmt(x) -> str:
    """Format one scalar cell."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return "%.17g" % x
    return str(x)


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _json_value(v, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json_value(x, indent, level + 1)}" for k, x in v.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        v = list(v)
        if not v:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple, np.ndarray)) for x in v):
            return "[" + ", ".join(_json_value(x, indent, level + 1) for x in v) + "]"
        return "[\n" + ",\n".join(pad + _json_value(x, indent, level + 1) for x in v) + "\n" + end + "]"
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        s = fmt(v)
        return s if math.isfinite(float(v)) else json.dumps(s)
    return json.dumps(str(v))


def json_text(doc, indent: int = 2) -> str:
    """Deterministic JSON: insertion-ordered keys, ``%.17g`` floats, trailing LF."""
    return _json_value(doc, indent, 0) + "\n"


def parse_float(text: str) -> float:
    """Inverse of :func:`fmt` for floats (accepts ``inf`` and ``infinity``)."""
    t = str(text).strip().lower()
    if t in ("inf", "+inf", "infinity", "+infinity"):
        return math.inf
    if t in ("-inf", "-infinity"):
        return -math.inf
    return float(t)


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


# ---------------------------------------------------------------------------
# field snapshots

FIELD_COLUMNS = ("r", "phi", "m_rr", "m_tt", "m_rz")
PSI_COLUMNS = ("rho", "z", "psi")


def field_csv(F: AxiQField, g: ExteriorGrid) -> str:
    """Snapshot with one row per node, rows ordered by ``r`` then ``phi``."""
    F.check_shape(g)
    R, P = np.meshgrid(g.r, g.phi, indexing="ij")
    data = np.column_stack([R.ravel(), P.ravel(), F.m.reshape(-1, 3)])
    return csv_text(FIELD_COLUMNS, data.tolist())


def read_field_csv(source, g: ExteriorGrid) -> AxiQField:
    """Restore a snapshot written by :func:`field_csv` onto ``g``."""
    text = Path(source).read_text(encoding="utf-8") if not hasattr(source, "read") else source.read()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != FIELD_COLUMNS:
        raise DomainError(f"snapshot header must be {','.join(FIELD_COLUMNS)}")
    data = np.array([[parse_float(x) for x in row] for row in rows[1:]], dtype=float)
    if data.shape != (g.n_s * g.n_phi, 5):
        raise DomainError(f"snapshot has {len(data)} rows, grid needs {g.n_s * g.n_phi}")
    R = data[:, 0].reshape(g.shape)
    P = data[:, 1].reshape(g.shape)
    if not (np.allclose(R, g.r[:, None], rtol=1e-12) and np.allclose(P, g.phi[None, :], atol=1e-12)):
        raise DomainError("snapshot node positions do not match the grid")
    return AxiQField(data[:, 2:].reshape(g.shape + (3,)))


def psi_csv(F: PsiField, g: ExteriorGrid) -> str:
    F.check_shape(g)
    data = np.column_stack([g.rho.ravel(), g.z.ravel(), F.psi.ravel()])
    return csv_text(PSI_COLUMNS, data.tolist())

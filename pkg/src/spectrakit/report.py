"""CSV and JSON report emission.

Every report starts with the canonical JSON echo of the run configuration
(a ``# config:`` comment line in CSV, a ``config`` field in JSON), so a
report file is self-describing and reproducible.  Numbers are written with
12 significant digits; missing diagnostics are empty cells.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .spectra import DIAGNOSTIC_COLUMNS, SpectrumEstimate

BASE_COLUMNS = ("omega", "kind", "classification") + DIAGNOSTIC_COLUMNS
SEMIGROUP_COLUMNS = ("system_id", "x_id") + BASE_COLUMNS


@dataclass
class RunConfig:
    """Parsed command-line configuration (echoed into every report header)."""

    command: str
    func: str | None = None
    matrix: str | None = None
    spectrum: str | None = None
    grid: str | None = None
    a_ladder: str | None = None
    s_grid: list | None = None
    tol: dict = field(default_factory=dict)
    suite: str | None = None
    out: str | None = None
    threads: int = 1
    format: str = "csv"
    seed: int = 0

    def to_json(self) -> str:
        """Canonical echo; the thread count is left out so reports do not depend on it."""
        d = asdict(self)
        d.pop("threads")
        d.pop("out")
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls(**json.loads(text))


def fmt(v) -> str:
    """Deterministic text for a number; ``nan``/``None`` become empty cells."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    x = float(v)
    if math.isnan(x):
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.12g}"
    return "0" if s == "-0" else s


def omega_decimals(step: float) -> int:
    """Fewest decimals (at most 12) that write every multiple of ``step`` exactly."""
    for d in range(13):
        x = step * 10 ** d
        if abs(x - round(x)) <= 1e-9 * max(1.0, x):
            return d
    return 12


def fmt_omega(w: float, decimals: int) -> str:
    s = f"{w:.{decimals}f}"
    return s[1:] if s.startswith("-") and float(s) == 0.0 else s


def estimate_rows(est: SpectrumEstimate, prefix: dict | None = None) -> list:
    """One dict per grid node with the CSV columns (strings).

    ``omega`` is written with the decimals implied by the grid step
    (``1.00`` on a 0.05 grid).
    """
    rows = []
    pts = est.grid.points
    dec = max(omega_decimals(est.grid.step), omega_decimals(abs(est.grid.omega_min)))
    for i, w in enumerate(pts):
        row = dict(prefix or {})
        row["omega"] = fmt_omega(float(w), dec)
        row["kind"] = est.kind
        row["classification"] = est.classification[i]
        for c in DIAGNOSTIC_COLUMNS:
            arr = est.diagnostics.get(c)
            row[c] = "" if arr is None else fmt(arr[i])
        rows.append(row)
    return rows


def write_csv(rows: list, config: RunConfig, columns=BASE_COLUMNS) -> str:
    buf = io.StringIO()
    buf.write(f"# config: {config.to_json()}\n")
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({c: r.get(c, "") for c in columns})
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, complex):
        return [_jsonable(v.real), _jsonable(v.imag)]
    if isinstance(v, (float, np.floating)):
        x = float(v)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.12g}")
    return v


def write_json(payload: dict, config: RunConfig) -> str:
    obj = {"config": json.loads(config.to_json())}
    obj.update(_jsonable(payload))
    return json.dumps(obj, indent=1, sort_keys=False) + "\n"


def estimate_payload(est: SpectrumEstimate) -> dict:
    """JSON body for one estimate: parameters plus per-node rows and flags."""
    rows = estimate_rows(est)
    for r, fl in zip(rows, est.flags or [()] * len(rows)):
        r["flags"] = list(fl)
    return {"kind": est.kind, "grid": est.grid.to_dict(), "params": est.params,
            "counts": {c: est.count(c) for c in ("Regular", "Singular", "Undecided")},
            "points": rows}


__all__ = ["RunConfig", "BASE_COLUMNS", "SEMIGROUP_COLUMNS", "fmt", "fmt_omega", "omega_decimals", "estimate_rows", "write_csv",
           "write_json", "estimate_payload"]

"""Run reports: JSON for the structured record, CSV for tables."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .bounds import BoundCheckReport, ScalingFit

VERDICTS = ("pass", "fail", "reported")


def fmt(x) -> str:
    """Floats with 12 significant digits; everything else via str."""
    if isinstance(x, bool) or x is None:
        return "" if x is None else str(x).lower()
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _clean(x):
    # JSON has no inf/nan
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return _clean(x.item())
    return x


@dataclass
class ClaimResult:
    id: str
    verdict: str
    rows: list = field(default_factory=list)  # dicts with claim, lambda, lhs, rhs, margin, pass
    fit: dict | None = None
    notes: dict = field(default_factory=dict)

    @classmethod
    def from_checks(cls, claim: str, checks: list[BoundCheckReport], fit: ScalingFit | None = None,
                    asserted: bool = True, notes: dict | None = None) -> "ClaimResult":
        rows = []
        for c in checks:
            row = {"claim": c.claim}
            row.update(c.row())
            rows.append(_clean(row))
        if asserted:
            verdict = "pass" if all(c.passed for c in checks) else "fail"
        else:
            verdict = "reported"
        fit_d = None if fit is None else _clean({"slope": fit.slope, "stderr": fit.stderr})
        return cls(claim, verdict, rows, fit_d, _clean(notes or {}))

    def to_dict(self) -> dict:
        return {"id": self.id, "verdict": self.verdict, "rows": self.rows,
                "fit": self.fit, "notes": self.notes}


@dataclass
class Report:
    meta: dict
    claims: list[ClaimResult]

    @property
    def ok(self) -> bool:
        return all(c.verdict != "fail" for c in self.claims)

    def to_dict(self) -> dict:
        return {"meta": _clean(self.meta), "claims": [c.to_dict() for c in self.claims]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Report":
        d = json.loads(text)
        claims = [ClaimResult(c["id"], c["verdict"], c["rows"], c["fit"], c.get("notes", {}))
                  for c in d["claims"]]
        return cls(d["meta"], claims)

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = [out / "report.json"]
        written[0].write_text(self.to_json(), encoding="utf-8", newline="\n")
        for c in self.claims:
            path = out / f"{c.id}.csv"
            path.write_text(rows_csv(c.rows), encoding="utf-8", newline="\n")
            written.append(path)
        return written


ROW_COLUMNS = ("claim", "lambda", "lhs", "rhs", "margin", "pass")


def table_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def rows_csv(rows: list[dict]) -> str:
    return table_csv(ROW_COLUMNS, ([r.get(k) for k in ROW_COLUMNS] for r in rows))

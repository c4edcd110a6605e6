"""
Reports, their JSON and CSV forms, and pinned ratio baselines.
"""
import json
import logging
from math import inf, isfinite, isnan, nan
from pathlib import Path
from typing import Any, NamedTuple

import pandas as pd

from ..data_structures import CheckResult

__all__ = (
    "BASELINE_RTOL",
    "Report",
    "inequality_ratio",
    "recompute_ratio",
    "report_frame",
    "write_reports",
    "load_baselines",
    "save_baselines",
    "compare_baseline",
)

logger = logging.getLogger(__name__)

BASELINE_RTOL = 0.05


class Report(NamedTuple):
    """
    Result of a harness run.

    Parameters
    ----------
    name : str
        What was run: a suite name or a scenario name.
    checks : tuple[CheckResult, ...], default: ()
        Every executed check.
    quantities : dict[str, float] | None, default: None
        Computed values; for inequalities `lhs`, `k_constant`, `b_cbmo`,
        `f_herz`, `rhs` and `ratio`.
    diagnostics : dict[str, Any] | None, default: None
        Error estimates, truncation diagnostics and budgets.
    status : str, default: "ok"
        "ok", "degenerate" or "flagged".
    digest : str, default: ""
        Digest of the scenario, if any.

    Attributes
    ----------
    name : str
        What was run.
    checks : tuple[CheckResult, ...]
        Every executed check.
    quantities : dict[str, float] | None
        Computed values.
    diagnostics : dict[str, Any] | None
        Error estimates, truncation diagnostics and budgets.
    status : str
        "ok", "degenerate" or "flagged".
    digest : str
        Digest of the scenario, if any.
    passed : bool
        Whether every check passed.

    Methods
    -------
    to_dict:
        JSON-ready form; non-finite numbers become `null`.
    count:
        Return number of occurrences of value.
    index:
        Return first index of value.
    """
    name: str
    checks: tuple[CheckResult, ...] = ()
    quantities: dict[str, float] | None = None
    diagnostics: dict[str, Any] | None = None
    status: str = "ok"
    digest: str = ""

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "name": self.name,
                "digest": self.digest,
                "status": self.status,
                "passed": self.passed,
                "quantities": self.quantities or {},
                "diagnostics": self.diagnostics or {},
                "checks": [check._asdict() for check in self.checks],
            }
        )


def _jsonable(value):
    match value:
        case float() if not isfinite(value):
            return None
        case dict():
            return {str(key): _jsonable(item) for key, item in value.items()}
        case list() | tuple():
            return [_jsonable(item) for item in value]

    if hasattr(value, "item"):
        return _jsonable(value.item())
    return value

def inequality_ratio(lhs: float, k_constant: float, b_cbmo: float, f_herz: float) -> tuple[float, float, str]:
    """
    `(rhs, ratio, status)` of `lhs <= K ||b|| ||f||`.

    A vanishing constant or `||f||` leaves `0/0`: the ratio is NaN and the
    status "degenerate". Otherwise a vanishing left side gives ratio 0.
    """
    rhs = k_constant * b_cbmo * f_herz
    if k_constant == 0 or f_herz == 0:
        return rhs, nan, "degenerate"
    if lhs == 0:
        return rhs, 0.0, "ok"
    if rhs == 0:
        return rhs, inf, "ok"
    return rhs, lhs / rhs, "ok"

def recompute_ratio(quantities: dict[str, float]) -> float:
    """
    The ratio from the four stored quantities.
    """
    return inequality_ratio(
        quantities["lhs"], quantities["k_constant"], quantities["b_cbmo"], quantities["f_herz"]
    )[1]

def report_frame(reports: list[Report]) -> pd.DataFrame:
    """
    One row per check; report quantities are repeated on each row.
    """
    rows = []
    for report in reports:
        shared = {"report": report.name, "digest": report.digest, "status": report.status}
        shared |= {f"q_{key}": value for key, value in (report.quantities or {}).items()}
        if not report.checks:
            rows.append(shared)
        for check in report.checks:
            rows.append(shared | check._asdict())

    return pd.DataFrame(rows)

def write_reports(reports: list[Report], path: str | Path | None, fmt: str="json"):
    """
    Write reports as one JSON document or a flat CSV; `path=None` prints them.
    """
    if fmt == "csv":
        text = report_frame(reports).to_csv(index=False)
    elif fmt == "json":
        payload = [report.to_dict() for report in reports]
        text = json.dumps(payload[0] if len(payload) == 1 else payload, indent=2, sort_keys=True)
    else:
        raise ValueError(f"unknown report format {fmt!r}")

    if path is None:
        print(text)
    else:
        Path(path).write_text(text + ("" if text.endswith("\n") else "\n"), encoding="utf-8")
        logger.info("report written to %s", path)

def load_baselines(path: str | Path) -> dict[str, dict]:
    """
    Pinned ratios keyed by scenario digest; a missing file is an empty table.
    """
    path = Path(path)
    if not path.exists():
        return {}

    with path.open("r", encoding="utf-8") as handle:
        return json.load(handle)

def save_baselines(path: str | Path, baselines: dict[str, dict]):
    Path(path).write_text(json.dumps(baselines, indent=2, sort_keys=True) + "\n", encoding="utf-8")

def compare_baseline(report: Report, baselines: dict[str, dict], rtol: float=BASELINE_RTOL) -> CheckResult:
    """
    Compare a report's ratio with its pinned baseline, pinning it on first sight.

    `baselines` is updated in place when a new ratio is pinned. Degenerate
    ratios are never pinned.
    """
    ratio = report.quantities["ratio"]
    if isnan(ratio):
        return CheckResult("baseline", True, nan, rtol, "degenerate ratio, not pinned")

    entry = baselines.get(report.digest)
    if entry is None:
        baselines[report.digest] = {"name": report.name, "ratio": ratio}
        logger.info("pinned baseline ratio %.6g for %r", ratio, report.name)
        return CheckResult("baseline", True, 0.0, rtol, "pinned")

    pinned = entry["ratio"]
    if pinned == 0:
        residual = abs(ratio)
    else:
        residual = abs(ratio - pinned) / abs(pinned)

    logger.info("baseline %r: ratio %.6g vs pinned %.6g", report.name, ratio, pinned)
    return CheckResult("baseline", residual <= rtol, residual, rtol, f"pinned {pinned:.6g}")

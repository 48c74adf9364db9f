"""CSV reports: one metadata comment, a fixed header, 17-significant-digit numbers."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Sequence

HEADER = ("experiment", "param_json", "member", "scale", "input_norm", "output_norm",
          "ratio", "slope", "residual")


@dataclass(frozen=True)
class ReportRow:
    member: str
    scale: float
    input_norm: float
    output_norm: float
    ratio: float | None = None
    slope: float | None = None
    residual: float | None = None

    def __post_init__(self) -> None:
        if self.ratio is None:
            if not self.input_norm > 0:
                raise ValueError(f"row {self.member}@{self.scale}: input norm must be positive")
            object.__setattr__(self, "ratio", self.output_norm / self.input_norm)
        for name in ("scale", "input_norm", "output_norm", "ratio"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"row {self.member}@{self.scale}: {name} is not finite")


@dataclass
class ExperimentReport:
    """Rows of one experiment plus its parameters and summary statistics.

    ``params`` and ``stats`` are serialized together into the ``param_json``
    column; rows are kept sorted by (member order of first appearance, scale).
    """

    experiment_id: str
    params: dict = field(default_factory=dict)
    rows: list[ReportRow] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    grid: tuple[int, int, float] | None = None
    seed: int | None = None

    def add(self, row: ReportRow) -> None:
        self.rows.append(row)

    def sort(self) -> None:
        order = {}
        for r in self.rows:
            order.setdefault(r.member, len(order))
        self.rows.sort(key=lambda r: (order[r.member], r.scale))

    def member_rows(self, member: str) -> list[ReportRow]:
        return [r for r in self.rows if r.member == member]

    def members(self) -> list[str]:
        return list(dict.fromkeys(r.member for r in self.rows))

    def param_json(self) -> str:
        payload = dict(self.params)
        if self.stats:
            payload["stats"] = self.stats
        return json.dumps(_jsonable(payload), sort_keys=True, separators=(",", ":"))


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(f"{v:.17g}")
    if isinstance(v, (bool, int, str)) or v is None:
        return v
    if hasattr(v, "numerator") and hasattr(v, "denominator"):
        return str(v)
    if hasattr(v, "item"):
        return _jsonable(v.item())
    return str(v)


def fmt(v: float | None) -> str:
    return "" if v is None else f"{v:.17g}"


def _num(s: str) -> float | None:
    return None if s == "" else float(s)


def render(reports: Sequence[ExperimentReport], timestamp: str | None = None) -> str:
    from tfmult import __version__

    first = reports[0] if reports else ExperimentReport("empty")
    g = first.grid
    grid = "" if g is None else f"{g[0]},{g[1]},{g[2]:.17g}"
    ts = timestamp or datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    buf = io.StringIO()
    buf.write(f"# seed={'' if first.seed is None else first.seed} grid={grid} version={__version__} timestamp={ts}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for rep in reports:
        rep.sort()
        pj = rep.param_json()
        for r in rep.rows:
            w.writerow([rep.experiment_id, pj, r.member, fmt(r.scale), fmt(r.input_norm),
                        fmt(r.output_norm), fmt(r.ratio), fmt(r.slope), fmt(r.residual)])
    return buf.getvalue()


def write_report(report: ExperimentReport | Sequence[ExperimentReport], path: str | os.PathLike) -> None:
    reports = [report] if isinstance(report, ExperimentReport) else list(report)
    text = render(reports)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def parse_metadata(line: str) -> dict[str, str]:
    if not line.startswith("#"):
        raise ValueError("missing metadata comment line")
    out = {}
    for tok in line[1:].split():
        k, _, v = tok.partition("=")
        out[k] = v
    return out


def parse_text(text: str) -> tuple[dict[str, str], list[ExperimentReport]]:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty report")
    meta = parse_metadata(lines[0])
    reader = csv.reader(lines[1:])
    header = next(reader)
    if tuple(header) != HEADER:
        raise ValueError(f"unexpected header {header}")
    reports: list[ExperimentReport] = []
    key = None
    for rec in reader:
        exp, pj, member, *nums = rec
        if (exp, pj) != key:
            payload = json.loads(pj)
            stats = payload.pop("stats", {})
            reports.append(ExperimentReport(exp, payload, [], stats))
            key = (exp, pj)
        scale, inp, out, ratio, slope, resid = (_num(s) for s in nums)
        reports[-1].rows.append(ReportRow(member, scale, inp, out, ratio, slope, resid))
    return meta, reports


def parse_report(path: str | os.PathLike) -> tuple[dict[str, str], list[ExperimentReport]]:
    with open(path, encoding="utf-8") as fh:
        return parse_text(fh.read())


def strip_timestamp(text: str) -> str:
    first, _, rest = text.partition("\n")
    kept = " ".join(t for t in first.split(" ") if not t.startswith("timestamp="))
    return kept + "\n" + rest


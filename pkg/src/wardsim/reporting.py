"""Result tables, comparison at tolerance, and chart-ready data series.

Rendering is pure: the same inputs produce byte-identical text. The human
table shows "mean (sd)" cells rounded for reading; the machine CSV keeps
full precision (shortest round-trip float form) and is the format consumed
by the diff command. Chart series are plain (x, y[, err]) data with labels;
drawing them is someone else's job (the CLI report path or the web UI).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

from .experiment import ResultSet

# display decimals for "mean (sd)" cells; sd always gets 2
_DEFAULT_DECIMALS = 1
_KPI_DECIMALS = {"bed_utilization": 2}

MACHINE_HEADER = ["kpi", "scenario", "mean", "sd"]


@dataclass
class ResultsTable:
    """Rectangular KPI x scenario grid of (mean, sd) cells."""

    kpis: list[str]
    scenarios: list[str]
    cells: dict[tuple[str, str], tuple[float, float]]

    def __post_init__(self):
        for kpi in self.kpis:
            for scenario in self.scenarios:
                if (kpi, scenario) not in self.cells:
                    raise ValueError(f"missing cell ({kpi!r}, {scenario!r})")

    @classmethod
    def from_result_set(cls, results: ResultSet) -> "ResultsTable":
        if not results.scenarios:
            raise ValueError("result set has no scenarios")
        kpis = list(results.scenarios[0].summary.kpi_means)
        scenarios = [s.label for s in results.scenarios]
        cells = {}
        for s in results.scenarios:
            for kpi in kpis:
                cells[(kpi, s.label)] = (s.summary.kpi_means[kpi], s.summary.kpi_sds[kpi])
        return cls(kpis, scenarios, cells)


def format_cell(mean: float, sd: float, decimals: int = _DEFAULT_DECIMALS) -> str:
    return f"{mean:.{decimals}f} ({sd:.2f})"


def _cell_decimals(kpi: str) -> int:
    return _KPI_DECIMALS.get(kpi, _DEFAULT_DECIMALS)


def render_table(table: ResultsTable, fmt: str = "csv") -> str:
    """Render the human-readable "mean (sd)" table as CSV or markdown."""
    if not table.kpis or not table.scenarios:
        raise ValueError("cannot render an empty table")
    rows = []
    for kpi in table.kpis:
        decimals = _cell_decimals(kpi)
        rows.append([kpi] + [format_cell(*table.cells[(kpi, s)], decimals) for s in table.scenarios])
    header = ["kpi"] + list(table.scenarios)
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return out.getvalue()
    if fmt == "markdown" or fmt == "md":
        lines = ["| " + " | ".join(header) + " |",
                 "| " + " | ".join("---" for _ in header) + " |"]
        for row in rows:
            lines.append("| " + " | ".join(row) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}; expected 'csv' or 'markdown'")


def render_machine_csv(table: ResultsTable) -> str:
    """Full-precision long-format CSV: kpi,scenario,mean,sd."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(MACHINE_HEADER)
    for kpi in table.kpis:
        for scenario in table.scenarios:
            mean, sd = table.cells[(kpi, scenario)]
            writer.writerow([kpi, scenario, repr(float(mean)), repr(float(sd))])
    return out.getvalue()


def parse_machine_csv(text: str) -> ResultsTable:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != MACHINE_HEADER:
        raise ValueError(f"unexpected header {header!r}; expected {MACHINE_HEADER}")
    kpis: list[str] = []
    scenarios: list[str] = []
    cells = {}
    for row in reader:
        if not row:
            continue
        kpi, scenario, mean, sd = row
        if kpi not in kpis:
            kpis.append(kpi)
        if scenario not in scenarios:
            scenarios.append(scenario)
        cells[(kpi, scenario)] = (float(mean), float(sd))
    return ResultsTable(kpis, scenarios, cells)


@dataclass
class CellDiff:
    kpi: str
    scenario: str
    mean_a: float
    mean_b: float
    rel_diff: float
    within: bool


@dataclass
class MatchReport:
    passed: bool
    tolerance: float
    max_rel_diff: float
    cells: list[CellDiff]

    def failures(self) -> list[CellDiff]:
        return [c for c in self.cells if not c.within]


def compare_results(a: ResultsTable, b: ResultsTable, tolerance: float = 0.05) -> MatchReport:
    """Per-cell relative difference of means; pass iff all within tolerance.

    Relative difference uses max(|a|, |b|) as denominator so the outcome is
    symmetric in the argument order. Zero-vs-zero passes; zero-vs-nonzero
    falls back to an absolute threshold of 1e-9.
    """
    if a.kpis != b.kpis or a.scenarios != b.scenarios:
        raise ValueError(
            f"table shapes differ: {len(a.kpis)}x{len(a.scenarios)} KPIs {a.kpis} / scenarios "
            f"{a.scenarios} vs {len(b.kpis)}x{len(b.scenarios)} KPIs {b.kpis} / scenarios {b.scenarios}"
        )
    cells = []
    max_rel = 0.0
    for kpi in a.kpis:
        for scenario in a.scenarios:
            mean_a = a.cells[(kpi, scenario)][0]
            mean_b = b.cells[(kpi, scenario)][0]
            denominator = max(abs(mean_a), abs(mean_b))
            if denominator == 0.0:
                rel = 0.0
                within = True
            elif mean_a == 0.0 or mean_b == 0.0:
                rel = 1.0
                within = denominator <= 1e-9
            else:
                rel = abs(mean_a - mean_b) / denominator
                within = rel <= tolerance
            max_rel = max(max_rel, rel)
            cells.append(CellDiff(kpi, scenario, mean_a, mean_b, rel, within))
    return MatchReport(all(c.within for c in cells), tolerance, max_rel, cells)


@dataclass
class ChartSeries:
    """One drawable series: bars or a line, with optional error values."""

    name: str
    kind: str  # "bar" or "line"
    x: list
    y: list[float]
    err: Optional[list[float]] = None
    x_label: str = ""
    y_label: str = ""
    title: str = ""


def available_series(results: ResultSet) -> list[str]:
    names = []
    first = results.scenarios[0]
    if results.param is None:
        for unit in first.occupancy:
            names.append(f"occupancy_pmf:{unit}")
        for unit in first.delay:
            names.append(f"delay_curve:{unit}")
    else:
        for kpi in first.summary.kpi_means:
            names.append(f"kpi_vs_{results.param}:{kpi}")
    return names


def chart_series(results: ResultSet, name: str) -> ChartSeries:
    """Build the named series from a result set; unknown names are rejected."""
    if name not in available_series(results):
        raise KeyError(f"unknown series {name!r}; available: {available_series(results)}")
    kind, _, detail = name.partition(":")
    first = results.scenarios[0]
    if kind == "occupancy_pmf":
        pmf = first.occupancy[detail].pmf()
        xs = sorted(pmf)
        return ChartSeries(
            name, "bar", xs, [pmf[k] for k in xs],
            x_label=f"patients in {detail}", y_label="probability",
            title=f"Occupancy distribution: {detail}",
        )
    if kind == "delay_curve":
        curve = first.delay[detail]
        return ChartSeries(
            name, "line", list(curve.capacities), list(curve.probabilities),
            x_label="capacity (beds)", y_label="p(delay)",
            title=f"Probability of delay vs capacity: {detail}",
        )
    # kpi_vs_<param>
    kpi = detail
    xs = [s.value for s in results.scenarios]
    ys = [s.summary.kpi_means[kpi] for s in results.scenarios]
    errs = [s.summary.kpi_sds[kpi] for s in results.scenarios]
    return ChartSeries(
        name, "line", xs, ys, errs,
        x_label=results.param or "scenario", y_label=kpi,
        title=f"{kpi} vs {results.param}",
    )


def all_series(results: ResultSet) -> list[ChartSeries]:
    return [chart_series(results, name) for name in available_series(results)]

"""
Sweep tables: the long CSV, paired fixed / bur tables and trend summaries.
"""
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from jinja2 import Environment, FileSystemLoader, select_autoescape
from openpyxl import Workbook
from openpyxl.styles import Alignment, Font

from primitives.lattice import PrimitiveMode
from .runner import BenchmarkRecord

logger = logging.getLogger(__name__)

CSV_HEADER = ["scenario", "mode", "m_prim_deg", "t_init_ms", "n_init", "t_final_ms", "n_final", "c_rad", "status"]

# Metric name, record attribute, display format.
PAIRED_METRICS = (
    ("t_init [ms]", "t_init_ms", "{:.1f}"),
    ("n_init", "n_init", "{:.0f}"),
    ("t_final [ms]", "t_final_ms", "{:.1f}"),
    ("n_final", "n_final", "{:.0f}"),
    ("c [rad]", "c_rad", "{:.2f}"),
)


def _format_count(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else f"{value:.1f}"


def record_row(record: BenchmarkRecord) -> List[str]:
    """CSV cells of one record; absent values are empty."""
    def opt(value, fmt):
        return "" if value is None else fmt(value)

    return [
        record.scenario,
        record.mode.value,
        f"{record.m_prim_deg:g}",
        opt(record.t_init_ms, lambda v: f"{v:.3f}"),
        opt(record.n_init, _format_count),
        opt(record.t_final_ms, lambda v: f"{v:.3f}"),
        opt(record.n_final, _format_count),
        opt(record.c_rad, lambda v: f"{v:.9f}"),
        record.status,
    ]


def write_csv(records: Iterable[BenchmarkRecord], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as csvfile:
        writer = csv.writer(csvfile)
        writer.writerow(CSV_HEADER)
        for record in records:
            writer.writerow(record_row(record))
    logger.info("Wrote %s", path)
    return path


def read_csv(path: Union[str, Path]) -> List[BenchmarkRecord]:
    """
    Load records written by write_csv.

    Raises:
        ValueError: the header does not match
    """
    def opt(value: str) -> Optional[float]:
        return float(value) if value != "" else None

    with open(path, "r", newline="", encoding="utf-8") as csvfile:
        reader = csv.DictReader(csvfile)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"'{path}' is not a sweep CSV (header {reader.fieldnames})")
        return [
            BenchmarkRecord(
                scenario=row["scenario"],
                mode=PrimitiveMode(row["mode"]),
                m_prim_deg=float(row["m_prim_deg"]),
                status=row["status"],
                t_init_ms=opt(row["t_init_ms"]),
                n_init=opt(row["n_init"]),
                t_final_ms=opt(row["t_final_ms"]),
                n_final=opt(row["n_final"]),
                c_rad=opt(row["c_rad"]),
            )
            for row in reader
        ]


@dataclass(frozen=True)
class PairedCell:
    fixed: Optional[float]
    bur: Optional[float]
    fmt: str = "{}"

    @property
    def better(self) -> Optional[PrimitiveMode]:
        """The lower of the two values; None on ties or a missing value."""
        if self.fixed is None or self.bur is None:
            return None
        fixed, bur = self.fmt.format(self.fixed), self.fmt.format(self.bur)
        if fixed == bur:
            return None
        return PrimitiveMode.FIXED if self.fixed < self.bur else PrimitiveMode.BUR

    def text(self, mode: PrimitiveMode) -> str:
        value = self.fixed if mode == PrimitiveMode.FIXED else self.bur
        return "-" if value is None else self.fmt.format(value)


@dataclass
class PairedRow:
    m_prim_deg: float
    cells: List[PairedCell] = field(default_factory=list)


def _by_key(records: Iterable[BenchmarkRecord]) -> Dict[Tuple[str, float, PrimitiveMode], BenchmarkRecord]:
    return {(r.scenario, r.m_prim_deg, r.mode): r for r in records}


def scenario_names(records: Iterable[BenchmarkRecord]) -> List[str]:
    return list(dict.fromkeys(r.scenario for r in records))


def paired_table(records: Sequence[BenchmarkRecord], scenario: str,
                 exclude_unsolved: bool = False) -> List[PairedRow]:
    """
    One row per m_prim with fixed / bur values for every metric.

    With ``exclude_unsolved``, rows where neither method found a solution are dropped.
    """
    index = _by_key(records)
    m_values = sorted({r.m_prim_deg for r in records if r.scenario == scenario})
    rows = []
    for m in m_values:
        fixed = index.get((scenario, m, PrimitiveMode.FIXED))
        bur = index.get((scenario, m, PrimitiveMode.BUR))
        if exclude_unsolved and not any(r is not None and r.solved for r in (fixed, bur)):
            continue
        row = PairedRow(m_prim_deg=m)
        for _, attr, fmt in PAIRED_METRICS:
            row.cells.append(PairedCell(
                fixed=getattr(fixed, attr) if fixed else None,
                bur=getattr(bur, attr) if bur else None,
                fmt=fmt,
            ))
        rows.append(row)
    return rows


@dataclass(frozen=True)
class Reduction:
    """Percent fewer expansions and less time of BUR relative to FIXED."""
    m_prim_deg: float
    n_init_pct: Optional[float]
    t_init_pct: Optional[float]


def _reduction_pct(fixed: Optional[float], bur: Optional[float]) -> Optional[float]:
    if fixed is None or bur is None or fixed <= 0:
        return None
    return 100.0 * (fixed - bur) / fixed


def reduction_summary(records: Sequence[BenchmarkRecord]) -> Dict[str, List[Reduction]]:
    """Per scenario, the initial-search reductions for every m_prim."""
    index = _by_key(records)
    summary: Dict[str, List[Reduction]] = {}
    for scenario in scenario_names(records):
        reductions = []
        for m in sorted({r.m_prim_deg for r in records if r.scenario == scenario}):
            fixed = index.get((scenario, m, PrimitiveMode.FIXED))
            bur = index.get((scenario, m, PrimitiveMode.BUR))
            if fixed is None or bur is None:
                continue
            reductions.append(Reduction(
                m_prim_deg=m,
                n_init_pct=_reduction_pct(fixed.n_init, bur.n_init),
                t_init_pct=_reduction_pct(fixed.t_init_ms, bur.t_init_ms),
            ))
        summary[scenario] = reductions
    return summary


def max_reduction(reductions: Sequence[Reduction], attr: str) -> Optional[float]:
    values = [getattr(r, attr) for r in reductions if getattr(r, attr) is not None]
    return max(values) if values else None


@dataclass(frozen=True)
class Sensitivity:
    """Ratios of expansion counts at the finest over the coarsest m_prim."""
    scenario: str
    mode: PrimitiveMode
    m_min_deg: float
    m_max_deg: float
    n_init_ratio: Optional[float]
    n_final_ratio: Optional[float]


def _ratio(num: Optional[float], den: Optional[float]) -> Optional[float]:
    if num is None or den is None or den <= 0:
        return None
    return num / den


def resolution_sensitivity(records: Sequence[BenchmarkRecord]) -> List[Sensitivity]:
    """Per (scenario, mode), n(min m_prim) / n(max m_prim) for n_init and n_final."""
    index = _by_key(records)
    out = []
    for scenario in scenario_names(records):
        m_values = sorted({r.m_prim_deg for r in records if r.scenario == scenario})
        if len(m_values) < 2:
            continue
        lo, hi = m_values[0], m_values[-1]
        for mode in (PrimitiveMode.FIXED, PrimitiveMode.BUR):
            fine, coarse = index.get((scenario, lo, mode)), index.get((scenario, hi, mode))
            if fine is None or coarse is None:
                continue
            out.append(Sensitivity(
                scenario=scenario,
                mode=mode,
                m_min_deg=lo,
                m_max_deg=hi,
                n_init_ratio=_ratio(fine.n_init, coarse.n_init),
                n_final_ratio=_ratio(fine.n_final, coarse.n_final),
            ))
    return out


def _environment(templates_dir: Union[str, Path]) -> Environment:
    env = Environment(
        loader=FileSystemLoader(str(templates_dir)),
        autoescape=select_autoescape(["html", "xml"]),
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    env.filters["pct"] = lambda v: "-" if v is None else f"{v:.0f}%"
    env.filters["ratio"] = lambda v: "-" if v is None else f"{v:.2f}"
    return env


def render_paired_markdown(records: Sequence[BenchmarkRecord], templates_dir: Union[str, Path],
                           exclude_unsolved: bool = False) -> str:
    """Markdown document with one paired table per scenario plus the trend summaries."""
    reductions = reduction_summary(records)
    scenarios = [
        {
            "name": name,
            "rows": paired_table(records, name, exclude_unsolved),
            "reductions": reductions.get(name, []),
            "max_n_init_pct": max_reduction(reductions.get(name, []), "n_init_pct"),
            "max_t_init_pct": max_reduction(reductions.get(name, []), "t_init_pct"),
        }
        for name in scenario_names(records)
    ]
    template = _environment(templates_dir).get_template("paired_table.md.j2")
    return template.render(
        metrics=[name for name, _, _ in PAIRED_METRICS],
        scenarios=scenarios,
        sensitivity=resolution_sensitivity(records),
        FIXED=PrimitiveMode.FIXED,
        BUR=PrimitiveMode.BUR,
    )


def write_paired_markdown(records: Sequence[BenchmarkRecord], path: Union[str, Path],
                          templates_dir: Union[str, Path], exclude_unsolved: bool = False) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_paired_markdown(records, templates_dir, exclude_unsolved), encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


def write_paired_xlsx(records: Sequence[BenchmarkRecord], path: Union[str, Path],
                      exclude_unsolved: bool = False) -> Path:
    """One sheet per scenario; the better value of each pair is bold."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    wb = Workbook()
    wb.remove(wb.active)
    bold = Font(bold=True)
    center = Alignment(horizontal="center")
    for name in scenario_names(records):
        ws = wb.create_sheet(title=name[:31])
        ws.append(["m_prim [deg]"] + [label for label, _, _ in PAIRED_METRICS for _ in range(2)])
        ws.append([""] + ["fixed", "bur"] * len(PAIRED_METRICS))
        for col in range(len(PAIRED_METRICS)):
            ws.merge_cells(start_row=1, start_column=2 + 2 * col, end_row=1, end_column=3 + 2 * col)
            ws.cell(row=1, column=2 + 2 * col).alignment = center
        for row in paired_table(records, name, exclude_unsolved):
            values: List = [row.m_prim_deg]
            for cell in row.cells:
                values.extend([cell.fixed, cell.bur])
            ws.append(values)
            for col, cell in enumerate(row.cells):
                if cell.better == PrimitiveMode.FIXED:
                    ws.cell(row=ws.max_row, column=2 + 2 * col).font = bold
                elif cell.better == PrimitiveMode.BUR:
                    ws.cell(row=ws.max_row, column=3 + 2 * col).font = bold
    if not wb.sheetnames:
        wb.create_sheet(title="empty")
    wb.save(path)
    logger.info("Wrote %s", path)
    return path


def sensitivity_lines(records: Sequence[BenchmarkRecord]) -> List[str]:
    """Plain-text summary of the resolution ratios, one line per (scenario, mode)."""
    lines = []
    for s in resolution_sensitivity(records):
        n_final = "-" if s.n_final_ratio is None else f"{s.n_final_ratio:.2f}"
        n_init = "-" if s.n_init_ratio is None else f"{s.n_init_ratio:.2f}"
        lines.append(
            f"{s.scenario} {s.mode.value}: n_final({s.m_min_deg:g})/n_final({s.m_max_deg:g}) = {n_final}, "
            f"n_init ratio = {n_init}"
        )
    return lines

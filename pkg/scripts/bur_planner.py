#!/usr/bin/env python3
"""
Bur Planner - command-line entry point

Plans single queries, runs primitive-length sweeps, renders stored runs and
checks scenario files. Angles cross this boundary in degrees; everything
behind it works in radians and meters.
"""
import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

# Add the scripts directory to the Python path
script_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, script_dir)

from bench.run_store import load_run, save_run, tool_version, write_manifest
from bench.runner import MODES, SweepSpec, run_sweep
from bench.svg_renderer import SvgRenderer
from bench.tables import read_csv, scenario_names, sensitivity_lines, write_csv, write_paired_markdown, \
    write_paired_xlsx
from config import Config, configure_logging, get_config
from planner.ara_star import ara_star
from planner.params import InconsPolicy, PlannerParams
from planner.problem import InvalidQueryError, PlanningProblem
from primitives.lattice import PrimitiveMode
from robot.chain import RobotModelError
from workspace.scenario import Scenario, ScenarioError, ScenarioParseError, load_scenario

EXIT_OK = 0
EXIT_NO_SOLUTION = 1
EXIT_USAGE = 2
EXIT_INVALID_SCENARIO = 3
EXIT_IO = 4

COMMANDS = ("plan", "bench", "plot", "validate")


class CliUsageError(ValueError):
    """A flag value that parsed but cannot be used."""


def parse_mprim(text: str) -> List[float]:
    """
    Primitive lengths in degrees from "8", "4,6,8" or the inclusive range "4-12".

    Raises:
        CliUsageError: malformed or non-positive values
    """
    text = text.strip()
    try:
        if "-" in text and "," not in text:
            lo, hi = (int(part) for part in text.split("-", 1))
            if lo > hi:
                raise CliUsageError(f"--mprim-deg range {text!r} is empty")
            values = [float(v) for v in range(lo, hi + 1)]
        else:
            values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        if isinstance(e, CliUsageError):
            raise
        raise CliUsageError(f"--mprim-deg expects a number, a comma list or a range like 4-12, got {text!r}") from e
    if not values or any(not v > 0 for v in values):
        raise CliUsageError(f"--mprim-deg values must be positive, got {text!r}")
    return values


def parse_snap_radius(text: Optional[str]) -> Optional[float]:
    """Snap gate in radians; 'unbounded' gives infinity, None keeps the default."""
    if text is None:
        return None
    if text.strip().lower() == "unbounded":
        return math.inf
    try:
        value = float(text)
    except ValueError as e:
        raise CliUsageError(f"--snap-radius-deg expects degrees or 'unbounded', got {text!r}") from e
    if value < 0:
        raise CliUsageError(f"--snap-radius-deg must be non-negative, got {value}")
    return math.radians(value)


@dataclass
class CliConfig:
    """Parsed and validated command line. Angles already converted where noted."""
    command: str
    scenarios: List[Path] = field(default_factory=list)
    modes: List[PrimitiveMode] = field(default_factory=lambda: [PrimitiveMode.BUR])
    m_prim_deg: List[float] = field(default_factory=lambda: [4.0])
    epsilon: Optional[float] = None
    delta_epsilon: Optional[float] = None
    t_plan: Optional[float] = None
    t_repair: Optional[float] = None
    d_crit: Optional[float] = None
    snap_radius: Optional[float] = None  # radians
    repetitions: int = 1
    out: Optional[Path] = None
    csv: Optional[Path] = None
    table: Optional[Path] = None
    xlsx: Optional[Path] = None
    serial: bool = False
    workers: Optional[int] = None
    literal_incons: bool = False
    intermediate_nodes: bool = False
    endpoint_only: bool = False
    max_expansions: Optional[int] = None
    record_expansions: bool = False
    exclude_unsolved: bool = False
    dump_config: bool = False
    svg: bool = False
    run: Optional[Path] = None
    metrics: Optional[Path] = None
    cspace: bool = False
    resolution_deg: Optional[float] = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "CliConfig":
        def get(name, default=None):
            return getattr(args, name, default)

        mode_flag = get("mode") or ("both" if args.command == "bench" else "bur")
        modes = list(MODES) if mode_flag == "both" else [PrimitiveMode(mode_flag.upper())]
        snap = parse_snap_radius(get("snap_radius_deg"))
        if get("ungated_snap"):
            snap = math.inf
        cfg = cls(
            command=args.command,
            scenarios=[Path(p) for p in (get("scenario") or [])],
            modes=modes,
            m_prim_deg=parse_mprim(get("mprim_deg") or ("4-12" if args.command == "bench" else "4")),
            epsilon=get("eps"),
            delta_epsilon=get("deps"),
            t_plan=get("tplan_s"),
            t_repair=get("trepair_s"),
            d_crit=get("dcrit_m"),
            snap_radius=snap,
            repetitions=1 if get("reps") is None else get("reps"),
            out=Path(args.out) if get("out") else None,
            csv=Path(args.csv) if get("csv") else None,
            table=Path(args.table) if get("table") else None,
            xlsx=Path(args.xlsx) if get("xlsx") else None,
            serial=bool(get("serial", False)),
            workers=get("workers"),
            literal_incons=bool(get("literal_incons", False)),
            intermediate_nodes=bool(get("intermediate_nodes", False)),
            endpoint_only=bool(get("endpoint_only", False)),
            max_expansions=get("max_expansions"),
            record_expansions=bool(get("record_expansions", False)),
            exclude_unsolved=bool(get("exclude_unsolved", False)),
            dump_config=bool(get("dump_config", False)),
            svg=bool(get("svg", False)),
            run=Path(args.run) if get("run") else None,
            metrics=Path(args.metrics) if get("metrics") else None,
            cspace=bool(get("cspace", False)),
            resolution_deg=get("resolution_deg"),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        """
        Raises:
            CliUsageError: on the first unusable value
        """
        if self.command not in COMMANDS:
            raise CliUsageError(f"unknown command {self.command!r}")
        if self.epsilon is not None and not self.epsilon >= 1.0:
            raise CliUsageError(f"--eps must be at least 1, got {self.epsilon}")
        for flag, value in (("--deps", self.delta_epsilon), ("--tplan-s", self.t_plan),
                            ("--trepair-s", self.t_repair), ("--dcrit-m", self.d_crit),
                            ("--resolution-deg", self.resolution_deg)):
            if value is not None and not value > 0:
                raise CliUsageError(f"{flag} must be positive, got {value}")
        if self.repetitions < 1:
            raise CliUsageError(f"--reps must be at least 1, got {self.repetitions}")
        if self.workers is not None and self.workers < 1:
            raise CliUsageError(f"--workers must be at least 1, got {self.workers}")
        if self.max_expansions is not None and self.max_expansions < 0:
            raise CliUsageError(f"--max-expansions must be non-negative, got {self.max_expansions}")
        if self.command in ("plan", "validate") and len(self.scenarios) != 1:
            raise CliUsageError(f"{self.command} needs exactly one --scenario")
        if self.command == "plan" and len(self.m_prim_deg) != 1:
            raise CliUsageError("plan takes a single --mprim-deg value")
        if self.command == "plan" and len(self.modes) != 1:
            raise CliUsageError("plan takes --mode fixed or --mode bur")
        if self.command == "plot" and self.run is None and self.metrics is None:
            raise CliUsageError("plot needs --run or --metrics")

    def overrides(self) -> Dict[str, Any]:
        """Keyword overrides for PlannerParams.for_dof."""
        return {
            "epsilon_init": self.epsilon,
            "delta_epsilon": self.delta_epsilon,
            "t_plan": self.t_plan,
            "t_repair": self.t_repair,
            "d_crit": self.d_crit,
            "snap_radius": self.snap_radius,
            "intermediate_nodes": self.intermediate_nodes or None,
            "first_step": False if self.endpoint_only else None,
            "incons_policy": InconsPolicy.LITERAL if self.literal_incons else None,
            "max_expansions": self.max_expansions,
            "record_expansions": self.record_expansions or None,
        }

    def planner_params(self, dof: int, m_prim_deg: float, mode: PrimitiveMode) -> PlannerParams:
        try:
            return PlannerParams.for_dof(dof, math.radians(m_prim_deg), mode, **self.overrides())
        except ValueError as e:
            raise CliUsageError(str(e)) from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bur_planner",
        description="Anytime lattice planning for planar manipulators with fixed or bur motion primitives.",
    )
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Logging level (default: BURPLAN_LOG_LEVEL or INFO)")
    sub = parser.add_subparsers(dest="command", required=True)

    planner = argparse.ArgumentParser(add_help=False)
    planner.add_argument("--mprim-deg", help="Primitive length in degrees: 8, 4,6,8 or 4-12")
    planner.add_argument("--eps", type=float, help="Initial inflation factor")
    planner.add_argument("--deps", type=float, help="Inflation decrement per iteration (default 0.5)")
    planner.add_argument("--tplan-s", type=float, help="Budget for the first solution in seconds")
    planner.add_argument("--trepair-s", type=float, help="Improvement budget in seconds")
    planner.add_argument("--dcrit-m", type=float, help="Clearance below which burs fall back (default 0.03)")
    planner.add_argument("--snap-radius-deg", help="Goal connection gate in degrees, or 'unbounded'")
    planner.add_argument("--ungated-snap", action="store_true", help="Same as --snap-radius-deg unbounded")
    planner.add_argument("--literal-incons", action="store_true",
                         help="Use the literal INCONS branch instead of the standard one")
    planner.add_argument("--intermediate-nodes", action="store_true",
                         help="Emit every lattice node along a bur spine")
    planner.add_argument("--endpoint-only", action="store_true",
                         help="Emit only the endpoint of each bur spine")
    planner.add_argument("--max-expansions", type=int, help="Deterministic expansion budget")
    planner.add_argument("--dump-config", action="store_true",
                         help="Print the effective parameters as JSON and exit")
    planner.add_argument("--out", help="Output directory (default: BURPLAN_OUTPUT_DIR)")

    plan = sub.add_parser("plan", parents=[planner], help="Plan one query")
    plan.add_argument("--scenario", action="append", required=True, help="Scenario YAML file")
    plan.add_argument("--mode", choices=["fixed", "bur"], default="bur")
    plan.add_argument("--record-expansions", action="store_true",
                      help="Store every expansion and its successors in the run file")
    plan.add_argument("--svg", action="store_true", help="Also render the workspace figure")

    bench = sub.add_parser("bench", parents=[planner], help="Sweep primitive lengths over scenarios")
    bench.add_argument("--scenario", action="append",
                       help="Scenario YAML file; repeat for several (default: the shipped suite)")
    bench.add_argument("--mode", choices=["fixed", "bur", "both"], default="both")
    bench.add_argument("--reps", type=int, default=1, help="Repetitions per cell")
    bench.add_argument("--serial", action="store_true", help="Run cells one after another in this process")
    bench.add_argument("--workers", type=int, help="Parallel cells (default: BURPLAN_WORKERS)")
    bench.add_argument("--csv", help="Long-format CSV path (default: <out>/sweep.csv)")
    bench.add_argument("--table", help="Paired Markdown table path (default: <out>/sweep.md)")
    bench.add_argument("--xlsx", help="Also write the paired tables as an XLSX workbook")
    bench.add_argument("--exclude-unsolved", action="store_true",
                       help="Drop rows where neither method solved from the paired tables")

    plot = sub.add_parser("plot", help="Render figures from a stored run or a sweep CSV")
    plot.add_argument("--run", help="Run JSON written by plan")
    plot.add_argument("--scenario", action="append", help="Scenario file (default: the one recorded in the run)")
    plot.add_argument("--cspace", action="store_true", help="Also render the C-space figure (2-DoF only)")
    plot.add_argument("--resolution-deg", type=float, help="C-space raster resolution in degrees")
    plot.add_argument("--metrics", help="Sweep CSV to chart")
    plot.add_argument("--out", help="Output directory (default: BURPLAN_OUTPUT_DIR)")

    validate = sub.add_parser("validate", help="Check a scenario file and report rasterization statistics")
    validate.add_argument("--scenario", action="append", required=True, help="Scenario YAML file")
    return parser


def print_version_banner() -> None:
    """Version line on stderr so stdout stays machine-readable."""
    print(f"Bur Planner v{tool_version()}", file=sys.stderr)


def _load(path: Path, config: Config) -> Scenario:
    return load_scenario(path, config.cell_size, config.sphere_radius)


def _out_dir(cfg: CliConfig, config: Config) -> Path:
    return cfg.out or config.output_dir


def _run_stem(scenario: Scenario, mode: PrimitiveMode, m_prim_deg: float) -> str:
    return f"{scenario.name}_{mode.value.lower()}_{m_prim_deg:g}deg"


def cmd_plan(cfg: CliConfig, config: Config) -> int:
    scenario = _load(cfg.scenarios[0], config)
    mode, m_prim_deg = cfg.modes[0], cfg.m_prim_deg[0]
    params = cfg.planner_params(scenario.dof, m_prim_deg, mode)
    if cfg.dump_config:
        print(json.dumps({"scenario": scenario.name, "dof": scenario.dof, "params": params.to_dict()}, indent=2))
        return EXIT_OK

    problem = PlanningProblem.from_scenario(scenario, clearance_cap=config.clearance_cap)
    result = ara_star(problem, params)
    out_dir = _out_dir(cfg, config)
    stem = _run_stem(scenario, mode, m_prim_deg)
    artifacts = [save_run(result, scenario.name, scenario.source_path, params, out_dir / f"{stem}.json")]
    if cfg.svg:
        renderer = SvgRenderer(config.templates_dir)
        artifacts.append(renderer.write(renderer.render_workspace(scenario, result.path, problem.grid),
                                        out_dir / f"{stem}_workspace.svg"))
    write_manifest(out_dir, "plan", params.to_dict(), artifacts, {"scenario": scenario.name})

    if not result.solved:
        reason = "goal unreachable on the lattice" if result.exhausted else "budget expired"
        print(f"{scenario.name}: no solution ({reason}) after {result.expansions} expansions", file=sys.stderr)
        return EXIT_NO_SOLUTION
    print(f"{scenario.name} {mode.value} m_prim={m_prim_deg:g} deg: {result.status.value}, "
          f"cost {result.cost:.4f} rad, eps' {result.eps_prime_final:.3f}, "
          f"n_init {result.n_init}, t_init {result.t_init * 1000.0:.1f} ms")
    return EXIT_OK


def _suite(cfg: CliConfig, config: Config) -> List[Scenario]:
    paths = cfg.scenarios or sorted(config.scenarios_dir.glob("*.yaml"))
    if not paths:
        raise CliUsageError(f"no scenarios given and none found in {config.scenarios_dir}")
    return [_load(Path(p), config) for p in paths]


def cmd_bench(cfg: CliConfig, config: Config) -> int:
    scenarios = _suite(cfg, config)
    if cfg.dump_config:
        dump = [
            {"scenario": s.name, "dof": s.dof,
             "params": cfg.planner_params(s.dof, cfg.m_prim_deg[0], cfg.modes[0]).to_dict()}
            for s in scenarios
        ]
        print(json.dumps(dump, indent=2))
        return EXIT_OK
    for s in scenarios:
        cfg.planner_params(s.dof, cfg.m_prim_deg[0], cfg.modes[0])

    spec = SweepSpec(
        scenarios=tuple(scenarios),
        m_prim_deg=tuple(cfg.m_prim_deg),
        repetitions=cfg.repetitions,
        modes=tuple(cfg.modes),
        overrides=cfg.overrides(),
        serial=cfg.serial,
        workers=cfg.workers or config.workers,
        clearance_cap=config.clearance_cap,
    )
    records = run_sweep(spec)

    out_dir = _out_dir(cfg, config)
    artifacts = [
        write_csv(records, cfg.csv or out_dir / "sweep.csv"),
        write_paired_markdown(records, cfg.table or out_dir / "sweep.md", config.templates_dir, cfg.exclude_unsolved),
    ]
    if cfg.xlsx:
        artifacts.append(write_paired_xlsx(records, cfg.xlsx, cfg.exclude_unsolved))
    sensitivity = sensitivity_lines(records)
    write_manifest(out_dir, "bench", {"overrides": {k: v for k, v in cfg.overrides().items() if v is not None},
                                      "m_prim_deg": cfg.m_prim_deg, "repetitions": cfg.repetitions,
                                      "modes": [m.value for m in cfg.modes]},
                   artifacts, {"scenarios": [s.name for s in scenarios], "resolution_sensitivity": sensitivity})
    for line in sensitivity:
        print(line)
    return EXIT_OK


def cmd_plot(cfg: CliConfig, config: Config) -> int:
    renderer = SvgRenderer(config.templates_dir)
    out_dir = _out_dir(cfg, config)
    if cfg.metrics is not None:
        records = read_csv(cfg.metrics)
        for name in scenario_names(records):
            renderer.write(renderer.render_metrics(records, name), out_dir / f"{name}_metrics.svg")
    if cfg.run is not None:
        try:
            run = load_run(cfg.run)
        except (ValueError, KeyError, TypeError) as e:
            print(f"error: cannot read run {cfg.run}: {e}", file=sys.stderr)
            return EXIT_IO
        scenario_path = cfg.scenarios[0] if cfg.scenarios else run.scenario_path
        if not scenario_path:
            raise CliUsageError(f"{cfg.run} does not record its scenario; pass --scenario")
        scenario = _load(Path(scenario_path), config)
        stem = Path(cfg.run).stem
        renderer.write(renderer.render_workspace(scenario, run.path), out_dir / f"{stem}_workspace.svg")
        if cfg.cspace:
            if scenario.dof != 2:
                raise CliUsageError(f"--cspace needs a 2-DoF scenario, {scenario.name} has {scenario.dof} DoF")
            svg = renderer.render_cspace(scenario, run.expansions, run.path,
                                         cfg.resolution_deg or config.cspace_resolution_deg)
            renderer.write(svg, out_dir / f"{stem}_cspace.svg")
    return EXIT_OK


def cmd_validate(cfg: CliConfig, config: Config) -> int:
    scenario = _load(cfg.scenarios[0], config)
    problem = PlanningProblem.from_scenario(scenario, clearance_cap=config.clearance_cap)
    grid = problem.grid
    print(f"{scenario.name}: {scenario.tier.value}, {scenario.dof} DoF, {len(scenario.obstacles)} obstacles")
    print(f"grid {grid.width} x {grid.height} cells of {grid.cell_size:g} m, "
          f"{grid.occupied_count} occupied ({100.0 * grid.occupied_count / grid.occupancy.size:.2f}%)")
    problem.validate()
    print("start and goal are valid")
    return EXIT_OK


HANDLERS = {
    "plan": cmd_plan,
    "bench": cmd_bench,
    "plot": cmd_plot,
    "validate": cmd_validate,
}


def dispatch(cfg: CliConfig, config: Optional[Config] = None) -> int:
    """
    Run one command and map failures to exit codes.

    Returns:
        0 ok, 1 no solution, 2 usage, 3 invalid scenario, 4 file I/O
    """
    config = config or get_config()
    try:
        return HANDLERS[cfg.command](cfg, config)
    except CliUsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO if isinstance(e.__cause__, OSError) else EXIT_INVALID_SCENARIO
    except (ScenarioError, RobotModelError, InvalidQueryError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID_SCENARIO
    except (OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    print_version_banner()
    args = build_parser().parse_args(argv)

    config = get_config()
    if args.log_level:
        config.log_level = args.log_level
    configure_logging(config)

    try:
        cfg = CliConfig.from_args(args)
    except CliUsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return dispatch(cfg, config)


if __name__ == "__main__":
    sys.exit(main())

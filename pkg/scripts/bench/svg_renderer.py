"""
Static SVG figures: workspace paths, 2-DoF C-space expansions and sweep metrics.

All numbers are formatted here with a fixed precision, so identical input
always renders to identical bytes.
"""
import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from jinja2 import Environment, FileSystemLoader, select_autoescape

from planner.ara_star import ExpansionRecord
from primitives.lattice import PrimitiveMode, Provenance
from robot.chain import KinematicChain, SphereChainModel, joint_positions_batch, sphere_centers_batch
from robot.collision import configurations_in_collision
from workspace.grid import CircleObstacle, OccupancyGrid, rasterize
from workspace.scenario import Scenario
from .runner import BenchmarkRecord

logger = logging.getLogger(__name__)

# Configurations per collision batch when rasterizing the C-space.
_CSPACE_BATCH = 4096
# Most intermediate poses drawn along a path.
_MAX_PATH_POSES = 30


def fmt(value: float) -> str:
    text = f"{value:.4f}"
    return "0.0000" if text == "-0.0000" else text


def _points(xy: np.ndarray) -> str:
    return " ".join(f"{fmt(x)},{fmt(y)}" for x, y in xy)


def _degree_point(q) -> Dict[str, str]:
    x, y = np.degrees(q)
    return {"x": fmt(x), "y": fmt(y)}


def _row_runs(mask: np.ndarray) -> List[Tuple[int, int, int]]:
    """Horizontal runs of True cells as (row, first column, length)."""
    runs = []
    for row in range(mask.shape[0]):
        line = np.concatenate([[False], mask[row], [False]])
        changes = np.flatnonzero(line[1:] != line[:-1])
        for start, stop in zip(changes[::2], changes[1::2]):
            runs.append((row, int(start), int(stop - start)))
    return runs


def cspace_obstacle_raster(chain: KinematicChain, model: SphereChainModel, grid: OccupancyGrid,
                           resolution_deg: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Collision flag at the center of every angular cell of a 2-DoF C-space.

    Returns:
        (q1 centers, q2 centers, mask[len(q2), len(q1)]) with angles in radians
    """
    if chain.dof != 2:
        raise ValueError(f"C-space raster needs a 2-DoF robot, got {chain.dof} DoF")
    step = math.radians(resolution_deg)
    axes = []
    for lo, hi in chain.joint_limits:
        count = max(1, math.ceil((hi - lo) / step - 1e-9))
        axes.append(lo + (np.arange(count) + 0.5) * step)
    q1, q2 = axes
    mesh = np.stack(np.meshgrid(q1, q2), axis=-1).reshape(-1, 2)
    flags = np.zeros(len(mesh), dtype=bool)
    if not grid.is_empty:
        for start in range(0, len(mesh), _CSPACE_BATCH):
            flags[start:start + _CSPACE_BATCH] = configurations_in_collision(
                chain, model, grid, mesh[start:start + _CSPACE_BATCH]
            )
    return q1, q2, flags.reshape(len(q2), len(q1))


class SvgRenderer:
    """Renders SVG documents from the templates directory."""

    def __init__(self, templates_dir: Union[str, Path]):
        self.env = Environment(
            loader=FileSystemLoader(str(templates_dir)),
            autoescape=select_autoescape(["html", "xml", "svg.j2"]),
            trim_blocks=True,
            lstrip_blocks=True,
            keep_trailing_newline=True,
        )

    def _render(self, template_name: str, **context) -> str:
        return self.env.get_template(template_name).render(**context)

    def render_workspace(self, scenario: Scenario, path: Sequence[Sequence[float]] = (),
                         grid: Optional[OccupancyGrid] = None) -> str:
        """Obstacles, occupied cells, start and goal poses, path poses and the end-effector trace."""
        grid = rasterize(scenario) if grid is None else grid
        chain = KinematicChain.from_spec(scenario.robot)
        model = SphereChainModel.from_spec(scenario.robot, chain)
        (x0, y0), (x1, y1) = scenario.workspace.min_corner, scenario.workspace.max_corner
        stroke = max(x1 - x0, y1 - y0) / 300.0

        cells = [
            {"x": fmt(grid.origin[0] + col * grid.cell_size),
             "y": fmt(grid.origin[1] + row * grid.cell_size),
             "w": fmt(length * grid.cell_size), "h": fmt(grid.cell_size)}
            for row, col, length in _row_runs(grid.occupancy)
        ]
        obstacles = []
        for obstacle in scenario.obstacles:
            if isinstance(obstacle, CircleObstacle):
                obstacles.append({"kind": "circle", "cx": fmt(obstacle.center[0]),
                                  "cy": fmt(obstacle.center[1]), "r": fmt(obstacle.radius)})
            else:
                bx0, by0, bx1, by1 = obstacle.bbox
                obstacles.append({"kind": "rect", "x": fmt(bx0), "y": fmt(by0),
                                  "w": fmt(bx1 - bx0), "h": fmt(by1 - by0)})

        poses = []
        path = [tuple(q) for q in path]
        if len(path) > 2:
            stride = max(1, len(path) // _MAX_PATH_POSES)
            for q in path[1:-1:stride]:
                poses.append({"cls": "path", "points": _points(joint_positions_batch(chain, q)[0])})
        spheres = []
        for cls, q in (("start", scenario.q_start), ("goal", scenario.q_goal)):
            poses.append({"cls": cls, "points": _points(joint_positions_batch(chain, q)[0])})
            for cx, cy in sphere_centers_batch(chain, model, q)[0]:
                spheres.append({"cls": cls, "cx": fmt(cx), "cy": fmt(cy), "r": fmt(model.radius)})

        trace = ""
        if path:
            trace = _points(joint_positions_batch(chain, np.asarray(path))[:, -1])

        return self._render(
            "workspace.svg.j2",
            title=scenario.name,
            view=" ".join(fmt(v) for v in (x0, -y1, x1 - x0, y1 - y0)),
            bounds={"x": fmt(x0), "y": fmt(y0), "w": fmt(x1 - x0), "h": fmt(y1 - y0)},
            stroke=fmt(stroke),
            cells=cells,
            obstacles=obstacles,
            poses=poses,
            spheres=spheres,
            trace=trace,
        )

    def render_cspace(self, scenario: Scenario, expansions: Sequence[ExpansionRecord] = (),
                      path: Sequence[Sequence[float]] = (), resolution_deg: float = 2.0,
                      grid: Optional[OccupancyGrid] = None) -> str:
        """
        C-space obstacle raster of a 2-DoF scenario with expansions and successor edges overlaid.

        Raises:
            ValueError: the scenario robot does not have exactly 2 DoF
        """
        if scenario.dof != 2:
            raise ValueError(f"{scenario.name}: C-space plots need a 2-DoF robot, got {scenario.dof} DoF")
        grid = rasterize(scenario) if grid is None else grid
        chain = KinematicChain.from_spec(scenario.robot)
        model = SphereChainModel.from_spec(scenario.robot, chain)
        _, _, mask = cspace_obstacle_raster(chain, model, grid, resolution_deg)

        lo = np.degrees(chain.lower)
        hi = np.degrees(chain.upper)
        cells = [
            {"x": fmt(lo[0] + col * resolution_deg), "y": fmt(lo[1] + row * resolution_deg),
             "w": fmt(length * resolution_deg), "h": fmt(resolution_deg)}
            for row, col, length in _row_runs(mask)
        ]

        edges: Dict[str, List[Dict[str, str]]] = {p.value: [] for p in Provenance}
        states = []
        for record in expansions:
            a = np.degrees(record.q)
            states.append({"x": fmt(a[0]), "y": fmt(a[1])})
            for entry in record.successors:
                b = np.degrees(entry.q)
                edges[entry.provenance.value].append(
                    {"x1": fmt(a[0]), "y1": fmt(a[1]), "x2": fmt(b[0]), "y2": fmt(b[1])}
                )

        span = float(max(hi[0] - lo[0], hi[1] - lo[1]))
        return self._render(
            "cspace.svg.j2",
            title=scenario.name,
            view=" ".join(fmt(v) for v in (lo[0], -hi[1], hi[0] - lo[0], hi[1] - lo[1])),
            bounds={"x": fmt(lo[0]), "y": fmt(lo[1]), "w": fmt(hi[0] - lo[0]), "h": fmt(hi[1] - lo[1])},
            stroke=fmt(span / 400.0),
            dot=fmt(span / 250.0),
            cells=cells,
            edges=edges,
            states=states,
            path=_points(np.degrees(np.asarray(path))) if len(path) else "",
            start=_degree_point(scenario.q_start),
            goal=_degree_point(scenario.q_goal),
        )

    def render_metrics(self, records: Sequence[BenchmarkRecord], scenario: str) -> str:
        """Line charts of n_init and t_init against m_prim for both methods."""
        rows = sorted((r for r in records if r.scenario == scenario), key=lambda r: r.m_prim_deg)
        m_values = sorted({r.m_prim_deg for r in rows})
        width, height, margin = 320.0, 220.0, 45.0
        panels = []
        for index, (label, attr) in enumerate((("n_init", "n_init"), ("t_init [ms]", "t_init_ms"))):
            values = [getattr(r, attr) for r in rows if getattr(r, attr) is not None]
            top = max(values) if values else 1.0
            top = top if top > 0 else 1.0
            m_lo, m_hi = (m_values[0], m_values[-1]) if m_values else (0.0, 1.0)
            m_span = (m_hi - m_lo) or 1.0
            offset = index * (width + margin)

            def to_xy(m, v):
                x = offset + margin + (m - m_lo) / m_span * (width - 2 * margin)
                y = height - margin - v / top * (height - 2 * margin)
                return x, y

            series = []
            for mode in (PrimitiveMode.FIXED, PrimitiveMode.BUR):
                pts = [to_xy(r.m_prim_deg, getattr(r, attr)) for r in rows
                       if r.mode == mode and getattr(r, attr) is not None]
                series.append({"cls": mode.value.lower(), "points": _points(pts),
                               "dots": [{"x": fmt(x), "y": fmt(y)} for x, y in pts]})
            x_ticks = [{"x": fmt(to_xy(m, 0)[0]), "label": f"{m:g}"} for m in m_values]
            y_ticks = [{"y": fmt(to_xy(m_lo, top * f)[1]), "label": f"{top * f:.4g}"} for f in (0.0, 0.5, 1.0)]
            panels.append({
                "label": label,
                "x0": fmt(offset + margin), "x1": fmt(offset + width - margin),
                "y0": fmt(height - margin), "y1": fmt(margin),
                "series": series, "x_ticks": x_ticks, "y_ticks": y_ticks,
                "title_x": fmt(offset + width / 2),
            })
        return self._render(
            "metrics.svg.j2",
            title=scenario,
            width=fmt(2 * width + margin),
            height=fmt(height),
            panels=panels,
        )

    @staticmethod
    def write(svg: str, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(svg, encoding="utf-8")
        logger.info("Wrote %s", path)
        return path

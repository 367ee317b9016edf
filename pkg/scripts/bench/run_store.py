"""
Stored runs and the run manifest (JSON).

A stored run keeps what `plot` needs to redraw a query without planning
again: the scenario file, the effective parameters, the solution path and,
when it was recorded, the expansion log.
"""
import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from planner.ara_star import ExpansionRecord, PlanResult
from planner.params import PlannerParams
from primitives.lattice import GOAL_KEY, NodeKey, Provenance, SuccessorEntry

logger = logging.getLogger(__name__)

RUN_FORMAT_VERSION = 1
DETERMINISM_NOTE = (
    "The planner is deterministic and uses no random seed; repeated runs with the same "
    "inputs differ only in the timing columns."
)


def tool_version(project_root: Optional[Path] = None) -> str:
    """Contents of the VERSION file at the repository root."""
    root = project_root or Path(__file__).resolve().parent.parent.parent
    try:
        return (root / "VERSION").read_text(encoding="utf-8").strip()
    except OSError:
        return "unknown"


def _key_to_json(key: NodeKey):
    return key if isinstance(key, str) else list(key)


def _key_from_json(value) -> NodeKey:
    return GOAL_KEY if value == GOAL_KEY else tuple(int(v) for v in value)


def _ms(seconds: Optional[float]) -> Optional[float]:
    return None if seconds is None else seconds * 1000.0


def expansion_to_dict(record: ExpansionRecord) -> Dict[str, Any]:
    return {
        "key": _key_to_json(record.key),
        "q": list(record.q),
        "d_c": record.d_c,
        "successors": [
            {"key": _key_to_json(e.coord), "q": list(e.q), "cost": e.cost, "provenance": e.provenance.value}
            for e in record.successors
        ],
    }


def expansion_from_dict(data: Dict[str, Any]) -> ExpansionRecord:
    return ExpansionRecord(
        key=_key_from_json(data["key"]),
        q=tuple(float(v) for v in data["q"]),
        d_c=data.get("d_c"),
        successors=tuple(
            SuccessorEntry(
                coord=_key_from_json(s["key"]),
                q=tuple(float(v) for v in s["q"]),
                cost=float(s["cost"]),
                provenance=Provenance(s["provenance"]),
            )
            for s in data.get("successors", [])
        ),
    )


def run_to_dict(result: PlanResult, scenario_name: str, scenario_path: Optional[str],
                params: PlannerParams) -> Dict[str, Any]:
    return {
        "format_version": RUN_FORMAT_VERSION,
        "tool_version": tool_version(),
        "scenario": scenario_name,
        "scenario_path": scenario_path,
        "mode": result.mode.value,
        "params": params.to_dict(),
        "status": result.status.value,
        "exhausted": result.exhausted,
        "cost_rad": result.cost,
        "eps_prime_final": result.eps_prime_final,
        "n_init": result.n_init,
        "t_init_ms": _ms(result.t_init),
        "n_final": result.n_final,
        "t_final_ms": _ms(result.t_final),
        "expansions": result.expansions,
        "iterations": [
            {"epsilon": it.epsilon, "eps_prime": it.eps_prime, "cost_rad": it.cost,
             "expansions": it.expansions, "elapsed_ms": it.elapsed * 1000.0}
            for it in result.iterations
        ],
        "path_rad": [list(q) for q in result.path],
        "path_deg": [[math.degrees(v) for v in q] for q in result.path],
        "expansion_log": [expansion_to_dict(r) for r in result.expansion_log],
    }


@dataclass
class StoredRun:
    scenario: str
    scenario_path: Optional[str]
    mode: str
    status: str
    cost: Optional[float]
    path: List[tuple] = field(default_factory=list)
    expansions: List[ExpansionRecord] = field(default_factory=list)
    raw: Dict[str, Any] = field(default_factory=dict, repr=False)


def save_run(result: PlanResult, scenario_name: str, scenario_path: Optional[str],
             params: PlannerParams, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(run_to_dict(result, scenario_name, scenario_path, params), f, indent=2)
    logger.info("Wrote run %s", path)
    return path


def load_run(path: Union[str, Path]) -> StoredRun:
    """
    Read a stored run.

    Raises:
        OSError: unreadable file
        ValueError: not a stored run
    """
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict) or "path_rad" not in data:
        raise ValueError(f"'{path}' is not a stored run")
    return StoredRun(
        scenario=data.get("scenario", ""),
        scenario_path=data.get("scenario_path"),
        mode=data.get("mode", ""),
        status=data.get("status", ""),
        cost=data.get("cost_rad"),
        path=[tuple(float(v) for v in q) for q in data["path_rad"]],
        expansions=[expansion_from_dict(r) for r in data.get("expansion_log", [])],
        raw=data,
    )


def write_manifest(output_dir: Union[str, Path], command: str, params: Dict[str, Any],
                   artifacts: Sequence[Union[str, Path]], extra: Optional[Dict[str, Any]] = None) -> Path:
    """Write manifest.json next to the artifacts of one CLI command."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "tool": "bur-planner",
        "tool_version": tool_version(),
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "command": command,
        "params": params,
        "determinism": DETERMINISM_NOTE,
        "artifacts": [str(a) for a in artifacts],
    }
    if extra:
        manifest.update(extra)
    manifest_path = output_dir / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)
    logger.info("Wrote manifest %s", manifest_path)
    return manifest_path

"""
Centralized configuration management for the bur planner.

Uses environment variables with sensible defaults for all configuration.
"""
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional


@dataclass
class Config:
    """Application configuration with environment variable support."""

    # Directory paths
    project_root: Path
    data_dir: Path
    scenarios_dir: Path
    output_dir: Path
    templates_dir: Path

    # Workspace and robot model defaults
    cell_size: float = 0.01
    clearance_cap: float = 1.0
    sphere_radius: float = 0.05

    # Rendering
    cspace_resolution_deg: float = 2.0

    # Benchmark execution
    workers: int = 1

    # Logging
    log_level: str = "INFO"
    log_file: Optional[Path] = None

    @classmethod
    def from_env(cls, project_root: Optional[Path] = None) -> "Config":
        """
        Create configuration from environment variables with defaults.

        Environment Variables:
            BURPLAN_DATA_DIR: Root data directory (default: project_root/data)
            BURPLAN_SCENARIOS_DIR: Scenario suite (default: BURPLAN_DATA_DIR/scenarios)
            BURPLAN_OUTPUT_DIR: Run and sweep output (default: BURPLAN_DATA_DIR/runs)
            BURPLAN_CELL_SIZE: Voxel edge length in meters (default: 0.01)
            BURPLAN_CLEARANCE_CAP: d_c reported on an obstacle-free grid (default: 1.0)
            BURPLAN_SPHERE_RADIUS: Sphere radius when a scenario omits it (default: 0.05)
            BURPLAN_CSPACE_RESOLUTION_DEG: Angular raster for C-space plots (default: 2.0)
            BURPLAN_WORKERS: Parallel sweep cells (default: CPU count)
            BURPLAN_LOG_LEVEL: Logging level (default: INFO)
            BURPLAN_LOG_FILE: Log file path (optional)

        Args:
            project_root: Project root directory. Defaults to the repository root.

        Returns:
            Config instance with environment overrides applied
        """
        if project_root is None:
            project_root = Path(__file__).resolve().parent.parent

        data_dir = Path(os.environ.get("BURPLAN_DATA_DIR", project_root / "data"))
        scenarios_dir = Path(os.environ.get("BURPLAN_SCENARIOS_DIR", data_dir / "scenarios"))
        output_dir = Path(os.environ.get("BURPLAN_OUTPUT_DIR", data_dir / "runs"))
        templates_dir = project_root / "scripts" / "templates"

        log_file_str = os.environ.get("BURPLAN_LOG_FILE")
        log_file = Path(log_file_str) if log_file_str else None

        return cls(
            project_root=project_root,
            data_dir=data_dir,
            scenarios_dir=scenarios_dir,
            output_dir=output_dir,
            templates_dir=templates_dir,
            cell_size=float(os.environ.get("BURPLAN_CELL_SIZE", "0.01")),
            clearance_cap=float(os.environ.get("BURPLAN_CLEARANCE_CAP", "1.0")),
            sphere_radius=float(os.environ.get("BURPLAN_SPHERE_RADIUS", "0.05")),
            cspace_resolution_deg=float(os.environ.get("BURPLAN_CSPACE_RESOLUTION_DEG", "2.0")),
            workers=int(os.environ.get("BURPLAN_WORKERS", str(os.cpu_count() or 1))),
            log_level=os.environ.get("BURPLAN_LOG_LEVEL", "INFO").upper(),
            log_file=log_file,
        )


def configure_logging(config: Config) -> None:
    """
    Install root handlers for the configured level and optional log file.

    Args:
        config: Configuration carrying log_level and log_file
    """
    handlers = [logging.StreamHandler()]
    if config.log_file is not None:
        config.log_file.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(config.log_file, encoding="utf-8"))
    logging.basicConfig(
        level=getattr(logging, config.log_level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        handlers=handlers,
        force=True,
    )


# Global configuration instance
_config: Optional[Config] = None


def get_config() -> Config:
    """
    Get the global configuration instance.

    Returns:
        Config instance (creates one on first call)
    """
    global _config
    if _config is None:
        _config = Config.from_env()
    return _config


def set_config(config: Config) -> None:
    """
    Set the global configuration instance.

    Args:
        config: Configuration instance to use
    """
    global _config
    _config = config

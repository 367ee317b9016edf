"""
Planar n-link revolute chain and its sphere (disc) collision model.

Joint angles are relative: link i points along the sum of q_1..q_i.
"""
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np

Point = Tuple[float, float]


class RobotModelError(ValueError):
    """Invalid robot geometry or a query that does not fit it."""


class DimensionMismatchError(RobotModelError):
    """A configuration does not have one angle per joint."""


@dataclass(frozen=True)
class KinematicChain:
    """Link lengths, base position and per-joint limits (radians)."""
    link_lengths: Tuple[float, ...]
    base: Point = (0.0, 0.0)
    joint_limits: Optional[Tuple[Tuple[float, float], ...]] = None

    def __post_init__(self):
        lengths = tuple(float(v) for v in self.link_lengths)
        if not lengths:
            raise RobotModelError("chain needs at least one link")
        if any(v <= 0 for v in lengths):
            raise RobotModelError(f"link lengths must be positive, got {lengths}")
        limits = self.joint_limits
        if limits is None:
            limits = tuple((-math.pi, math.pi) for _ in lengths)
        limits = tuple((float(lo), float(hi)) for lo, hi in limits)
        if len(limits) != len(lengths):
            raise RobotModelError(f"{len(limits)} joint limits for {len(lengths)} joints")
        if any(not lo < hi for lo, hi in limits):
            raise RobotModelError("every joint limit needs lo < hi")
        object.__setattr__(self, "link_lengths", lengths)
        object.__setattr__(self, "base", (float(self.base[0]), float(self.base[1])))
        object.__setattr__(self, "joint_limits", limits)

    @classmethod
    def from_spec(cls, spec) -> "KinematicChain":
        """Build from a scenario RobotSpec."""
        return cls(spec.link_lengths, spec.base, spec.joint_limits)

    @property
    def dof(self) -> int:
        return len(self.link_lengths)

    @property
    def reach(self) -> float:
        return sum(self.link_lengths)

    @cached_property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.joint_limits])

    @cached_property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.joint_limits])

    def check_dimension(self, q) -> np.ndarray:
        arr = np.asarray(q, dtype=float)
        if arr.shape[-1:] != (self.dof,):
            raise DimensionMismatchError(
                f"configuration has shape {arr.shape}, chain has {self.dof} joints"
            )
        return arr

    def within_limits(self, q) -> bool:
        arr = self.check_dimension(q)
        return bool(np.all(arr >= self.lower) and np.all(arr <= self.upper))


@dataclass(frozen=True)
class SphereChainModel:
    """
    Per-link discs at fractions along each link, all with one radius.

    Consecutive centers on a link are at most 2 * radius apart.
    """
    link_lengths: Tuple[float, ...]
    fractions: Tuple[Tuple[float, ...], ...]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise RobotModelError(f"sphere radius must be positive, got {self.radius}")
        if len(self.fractions) != len(self.link_lengths):
            raise RobotModelError("one fraction list per link is required")
        fractions = tuple(tuple(sorted(float(f) for f in link)) for link in self.fractions)
        for index, (length, link) in enumerate(zip(self.link_lengths, fractions)):
            if not link:
                raise RobotModelError(f"link {index + 1} has no spheres")
            if link[0] < 0.0 or link[-1] > 1.0:
                raise RobotModelError(f"link {index + 1} sphere fractions must lie in [0, 1]")
            gaps = np.diff(np.asarray(link)) * length
            if gaps.size and gaps.max() > 2.0 * self.radius + 1e-12:
                raise RobotModelError(
                    f"link {index + 1} sphere spacing {gaps.max():.4f} m exceeds 2 * radius"
                )
        object.__setattr__(self, "link_lengths", tuple(float(v) for v in self.link_lengths))
        object.__setattr__(self, "fractions", fractions)

    @classmethod
    def evenly_spaced(cls, chain: KinematicChain, radius: float,
                      spheres_per_link: Optional[int] = None) -> "SphereChainModel":
        """
        Evenly spaced discs including both link ends.

        Without ``spheres_per_link`` each link gets enough discs to keep the
        spacing at or below one radius. A single disc sits at the link middle.
        """
        fractions = []
        for length in chain.link_lengths:
            count = spheres_per_link or math.ceil(length / radius) + 1
            if count == 1:
                fractions.append((0.5,))
            else:
                fractions.append(tuple(np.linspace(0.0, 1.0, count)))
        return cls(chain.link_lengths, tuple(fractions), radius)

    @classmethod
    def from_spec(cls, spec, chain: KinematicChain) -> "SphereChainModel":
        return cls.evenly_spaced(chain, spec.sphere_radius, spec.spheres_per_link)

    @cached_property
    def link_index(self) -> np.ndarray:
        return np.concatenate([np.full(len(link), i) for i, link in enumerate(self.fractions)])

    @cached_property
    def fraction_array(self) -> np.ndarray:
        return np.concatenate([np.asarray(link) for link in self.fractions])

    @property
    def sphere_count(self) -> int:
        return int(self.link_index.size)


@dataclass(frozen=True)
class ChainPose:
    """Joint positions p_0..p_n and sphere centers for one configuration."""
    joints: np.ndarray
    spheres: np.ndarray

    @property
    def end_effector(self) -> np.ndarray:
        return self.joints[-1]


def _link_geometry(chain: KinematicChain, qs: np.ndarray):
    phi = np.cumsum(qs, axis=1)
    lengths = np.asarray(chain.link_lengths)
    segments = np.stack([np.cos(phi), np.sin(phi)], axis=-1) * lengths[None, :, None]
    joints = np.empty((qs.shape[0], chain.dof + 1, 2))
    joints[:, 0] = chain.base
    joints[:, 1:] = np.asarray(chain.base) + np.cumsum(segments, axis=1)
    return joints, segments


def joint_positions_batch(chain: KinematicChain, qs) -> np.ndarray:
    """(M, n + 1, 2) joint positions for M configurations."""
    qs = chain.check_dimension(qs).reshape(-1, chain.dof)
    joints, _ = _link_geometry(chain, qs)
    return joints


def sphere_centers_batch(chain: KinematicChain, model: SphereChainModel, qs) -> np.ndarray:
    """(M, S, 2) sphere centers for M configurations."""
    qs = chain.check_dimension(qs).reshape(-1, chain.dof)
    if len(model.fractions) != chain.dof:
        raise DimensionMismatchError("sphere model and chain disagree on the number of links")
    joints, segments = _link_geometry(chain, qs)
    links = model.link_index
    return joints[:, links] + segments[:, links] * model.fraction_array[None, :, None]


def forward_kinematics(chain: KinematicChain, q, model: Optional[SphereChainModel] = None) -> ChainPose:
    """
    Joint positions and sphere centers of one configuration.

    Raises:
        DimensionMismatchError: if q does not have chain.dof angles
    """
    q = chain.check_dimension(q)
    joints = joint_positions_batch(chain, q)[0]
    spheres = np.empty((0, 2)) if model is None else sphere_centers_batch(chain, model, q)[0]
    return ChainPose(joints=joints, spheres=spheres)

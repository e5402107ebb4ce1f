"""Task-configuration and episode-outcome records shared by the skill and env layers."""

from dataclasses import dataclass, field

import numpy as np

ROLES = ("start", "contact", "goal")

FAILURE_REASONS = ("collision", "goal_missed", "timeout", "none")


@dataclass(frozen=True)
class Pose:
    position: np.ndarray
    rotvec: np.ndarray

    @staticmethod
    def of(position, rotvec=(0.0, 0.0, 0.0)):
        return Pose(np.asarray(position, dtype=float), np.asarray(rotvec, dtype=float))

    def to_json(self):
        return {"position": list(map(float, self.position)), "rotvec": list(map(float, self.rotvec))}

    @staticmethod
    def from_json(d):
        return Pose.of(d["position"], d.get("rotvec", (0.0, 0.0, 0.0)))


@dataclass(frozen=True)
class Observation:
    """A role-tagged pose observed in the scene, expressed in tool space.

    rotvec is None when the task configuration constrains position only.
    """

    role: str
    position: np.ndarray
    rotvec: np.ndarray | None = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown observation role {self.role!r}")

    def to_json(self):
        return {
            "role": self.role,
            "position": list(map(float, self.position)),
            "rotvec": None if self.rotvec is None else list(map(float, self.rotvec)),
        }

    @staticmethod
    def from_json(d):
        rv = d.get("rotvec")
        return Observation(
            d["role"],
            np.asarray(d["position"], dtype=float),
            None if rv is None else np.asarray(rv, dtype=float),
        )


@dataclass(frozen=True)
class TaskConfiguration:
    """Start/object/goal poses for one task instance plus the tool-space observations

    used for conditioning and anchoring. offset is the xy deviation of the object
    from the demonstrated configuration.
    """

    env_kind: str
    start_pose: Pose
    object_pose: Pose
    goal_pose: Pose
    offset: np.ndarray
    observations: tuple
    seed: int = 0

    def observed(self, role):
        for obs in self.observations:
            if obs.role == role:
                return obs
        return None

    def to_json(self):
        return {
            "env_kind": self.env_kind,
            "start_pose": self.start_pose.to_json(),
            "object_pose": self.object_pose.to_json(),
            "goal_pose": self.goal_pose.to_json(),
            "offset": list(map(float, self.offset)),
            "observations": [o.to_json() for o in self.observations],
            "seed": int(self.seed),
        }

    @staticmethod
    def from_json(d):
        return TaskConfiguration(
            env_kind=d["env_kind"],
            start_pose=Pose.from_json(d["start_pose"]),
            object_pose=Pose.from_json(d["object_pose"]),
            goal_pose=Pose.from_json(d["goal_pose"]),
            offset=np.asarray(d["offset"], dtype=float),
            observations=tuple(Observation.from_json(o) for o in d["observations"]),
            seed=int(d.get("seed", 0)),
        )


@dataclass(frozen=True)
class EpisodeOutcome:
    success: bool
    failure_reason: str
    executed_positions: np.ndarray = field(repr=False)
    executed_rotvecs: np.ndarray = field(repr=False)
    object_final_pose: Pose | None = None

    def __post_init__(self):
        if self.failure_reason not in FAILURE_REASONS:
            raise ValueError(f"unknown failure reason {self.failure_reason!r}")
        if self.success and self.failure_reason != "none":
            raise ValueError("successful episodes must have failure_reason 'none'")

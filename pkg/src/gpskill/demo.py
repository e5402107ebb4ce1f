"""Demonstration ingestion and synthetic demonstration generated for the desk tasks.

CSV format: header ``t,px,py,pz,qw,qx,qy,qz``, one sample per row, SI units.
Timestamps are rescaled to [0, 1] on load so kernel hyperparameters are
independent of the recording duration.
"""

import io
from dataclasses import dataclass

import numpy as np

from . import so3
from .errors import ParseError

CSV_HEADER = "t,px,py,pz,qw,qx,qy,qz"
MIN_SAMPLES = 20


@dataclass(frozen=True)
class Demonstration:
    """A single demonstrated end-effector trajectory.

    timestamps are normalised to [0, 1]; orientations are stored both as
    sign-continuous unit quaternions and as a jump-free rotation-vector series.
    """

    timestamps: np.ndarray
    positions: np.ndarray
    quaternions: np.ndarray
    rotation_vectors: np.ndarray

    def __post_init__(self):
        n = len(self.timestamps)
        if n < MIN_SAMPLES:
            raise ValueError(f"demonstration needs at least {MIN_SAMPLES} samples, got {n}")
        if self.positions.shape != (n, 3) or self.quaternions.shape != (n, 4):
            raise ValueError("inconsistent demonstration array shapes")
        if not np.all(np.diff(self.timestamps) > 0):
            raise ValueError("timestamps must be strictly increasing")
        norms = np.linalg.norm(self.quaternions, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise ValueError("quaternions must be unit norm within 1e-6")
        steps = np.linalg.norm(np.diff(self.rotation_vectors, axis=0), axis=1)
        if steps.size and steps.max() > np.pi:
            raise ValueError("rotation-vector series has a jump larger than pi")

    def __len__(self):
        return len(self.timestamps)


def to_rotation_vectors(quats):
    """Continuous log map of a unit-quaternion series (see so3.continuous_rotvecs)."""
    quats = np.asarray(quats, dtype=float)
    return so3.continuous_rotvecs(quats)


def _normalise_times(times):
    span = times[-1] - times[0]
    if span <= 0:
        raise ValueError("timestamps must span a positive duration")
    return (times - times[0]) / span


def from_arrays(timestamps, positions, quaternions):
    """Build a Demonstration from raw arrays: normalises time and fixes quaternion signs."""
    timestamps = np.asarray(timestamps, dtype=float)
    positions = np.asarray(positions, dtype=float)
    quaternions = np.asarray(quaternions, dtype=float)
    if not np.all(np.diff(timestamps) > 0):
        raise ValueError("timestamps must be strictly increasing")
    quats = quaternions.copy()
    for i in range(len(quats)):
        quats[i] = so3.quat_normalize(quats[i])
        if i > 0 and np.dot(quats[i], quats[i - 1]) < 0:
            quats[i] = -quats[i]
    rotvecs = to_rotation_vectors(quats)
    return Demonstration(_normalise_times(timestamps), positions, quats, rotvecs)


def load_demonstration(source):
    """Parse a demonstration CSV from a path, file object, or byte stream."""
    if isinstance(source, (str, bytes)) and not isinstance(source, bytes):
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    elif isinstance(source, bytes):
        lines = source.decode("utf-8").splitlines()
    elif isinstance(source, io.IOBase) or hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        lines = data.splitlines()
    else:
        raise TypeError(f"unsupported source type {type(source)!r}")

    if not lines:
        raise ParseError("empty file", line=1)
    header = lines[0].strip()
    if header != CSV_HEADER:
        raise ParseError(f"expected header {CSV_HEADER!r}, got {header!r}", line=1)

    rows = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) != 8:
            raise ParseError(f"expected 8 fields, got {len(parts)}", line=lineno)
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from exc

    data = np.asarray(rows, dtype=float)
    if len(data) < MIN_SAMPLES:
        raise ValueError(f"demonstration needs at least {MIN_SAMPLES} samples, got {len(data)}")
    return from_arrays(data[:, 0], data[:, 1:4], data[:, 4:8])


def save_demonstration(demo, path):
    """Write a demonstration CSV that round-trips bit-identically through load."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(CSV_HEADER + "\n")
        for i in range(len(demo)):
            fields = [demo.timestamps[i], *demo.positions[i], *demo.quaternions[i]]
            fh.write(",".join(repr(float(v)) for v in fields) + "\n")


# ---------------------------------------------------------------------------
# Synthetic demonstrations
# ---------------------------------------------------------------------------

def _min_jerk(tau):
    return 10 * tau ** 3 - 15 * tau ** 4 + 6 * tau ** 5


def waypoint_path(fractions, waypoints, n_samples):
    """Minimum-jerk blend through waypoints (rest-to-rest per segment).

    fractions are the per-waypoint time fractions in [0, 1]; waypoints is
    (M, D). Returns (n_samples,) times and (n_samples, D) values.
    """
    fractions = np.asarray(fractions, dtype=float)
    waypoints = np.asarray(waypoints, dtype=float)
    ts = np.linspace(0.0, 1.0, n_samples)
    out = np.empty((n_samples, waypoints.shape[1]))
    for i, t in enumerate(ts):
        seg = np.searchsorted(fractions, t, side="right") - 1
        seg = min(max(seg, 0), len(fractions) - 2)
        t0, t1 = fractions[seg], fractions[seg + 1]
        tau = (t - t0) / (t1 - t0)
        s = _min_jerk(np.clip(tau, 0.0, 1.0))
        out[i] = waypoints[seg] + s * (waypoints[seg + 1] - waypoints[seg])
    return ts, out


def synthesize(fractions, positions, rotvecs, n_samples=200, duration=2.0):
    """Build a Demonstration passing through the given pose waypoints."""
    ts, pos = waypoint_path(fractions, positions, n_samples)
    _, rot = waypoint_path(fractions, rotvecs, n_samples)
    quats = np.array([so3.rotvec_to_quat(r) for r in rot])
    return from_arrays(ts * duration, pos, quats)


def sine_arc_demo(n_samples=200):
    """Drawer-opening demonstration: arced approach to the handle, then a straight pull."""
    fractions = [0.0, 0.35, 0.55, 1.0]
    positions = [
        [0.10, 0.00, 0.20],
        [0.38, 0.00, 0.16],
        [0.50, 0.00, 0.10],
        [0.35, 0.00, 0.10],
    ]
    rotvecs = [
        [0.0, 0.0, 0.0],
        [0.0, 0.08, 0.0],
        [0.0, 0.12, 0.0],
        [0.0, 0.12, 0.0],
    ]
    return synthesize(fractions, positions, rotvecs, n_samples)


def push_sweep_demo(n_samples=200):
    """Cube-pushing demonstration: descend behind the cube, push it to the goal, lift."""
    fractions = [0.0, 0.30, 0.80, 1.0]
    positions = [
        [0.00, 0.00, 0.10],
        [0.35, 0.00, 0.02],
        [0.645, 0.00, 0.02],
        [0.66, 0.00, 0.10],
    ]
    rotvecs = [
        [0.0, 0.0, 0.0],
        [0.0, 0.05, 0.0],
        [0.0, 0.05, 0.0],
        [0.0, 0.0, 0.0],
    ]
    return synthesize(fractions, positions, rotvecs, n_samples)


def lift_carry_demo(n_samples=200):
    """Bar-removal demonstration: descend into the grasp, lift clear, carry sideways."""
    fractions = [0.0, 0.30, 0.55, 1.0]
    positions = [
        [0.50, -0.20, 0.25],
        [0.50, 0.00, 0.03],
        [0.50, 0.00, 0.20],
        [0.50, -0.30, 0.20],
    ]
    rotvecs = [
        [0.0, 0.0, 0.0],
        [0.0, 0.0, 0.05],
        [0.0, 0.0, 0.05],
        [0.0, 0.0, 0.0],
    ]
    return synthesize(fractions, positions, rotvecs, n_samples)


SYNTHETIC_DEMOS = {
    "sine-arc": sine_arc_demo,
    "push-sweep": push_sweep_demo,
    "lift-carry": lift_carry_demo,
}

"""Via-point skill model: six independent GPs over a shared sparse time grid.

A demonstration is compressed to ``n_via`` via-points per axis (three
position axes, three rotation-vector axes) by least squares on the GP
posterior, so that querying the rebuilt model reproduces the demonstrated
poses. Velocities and accelerations come from the analytical kernel
derivatives, and adapting the skill to a new task configuration reduces to
editing via-point values and rebuilding.
"""

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import gp, optim, so3
from .tasks import TaskConfiguration

N_VIA_DEFAULT = 15
COLUMNS = ("px", "py", "pz", "rx", "ry", "rz")


@dataclass(frozen=True)
class ViaPointSet:
    """Sparse via-points: a shared linear time grid and one value column per axis."""

    times: np.ndarray
    values: np.ndarray  # (n_via, 6), columns ordered px py pz rx ry rz

    def __post_init__(self):
        if self.values.shape != (len(self.times), 6):
            raise ValueError("via values must be (n_via, 6)")
        if not (np.isfinite(self.times).all() and np.isfinite(self.values).all()):
            raise ValueError("via-points must be finite")

    @property
    def n_via(self):
        return len(self.times)

    def replace_values(self, values):
        return ViaPointSet(self.times, np.asarray(values, dtype=float))

    @property
    def positions(self):
        return self.values[:, :3]

    @property
    def rotvecs(self):
        return self.values[:, 3:]


@dataclass(frozen=True)
class PoseTwistAccel:
    position: np.ndarray
    rotation_vector: np.ndarray
    linear_velocity: np.ndarray
    rotvec_rate: np.ndarray
    linear_accel: np.ndarray
    rotvec_accel: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    """A skill sampled on a time grid; all arrays share the leading dimension."""

    times: np.ndarray
    positions: np.ndarray
    rotvecs: np.ndarray
    linear_velocities: np.ndarray
    rotvec_rates: np.ndarray
    linear_accels: np.ndarray
    rotvec_accels: np.ndarray

    def __len__(self):
        return len(self.times)

    def angular_velocities(self):
        return so3.rotvec_rates_to_angular_velocities(self.rotvecs, self.rotvec_rates)


@dataclass(frozen=True)
class SkillModel:
    """Pure function of (via, params): six GpModels built from the via columns."""

    via: ViaPointSet
    params: gp.KernelParams
    models: tuple

    def query(self, t):
        return query_skill(self, t)

    def sample(self, times):
        return sample_skill(self, times)

    def with_via(self, via):
        return build_skill(via, self.params)


def build_skill(via, params=None):
    params = params or gp.KernelParams()
    models = tuple(gp.fit_gp(via.times, via.values[:, a], params) for a in range(6))
    return SkillModel(via, params, models)


def query_skill(skill, t):
    """Pose, velocity and acceleration of the skill at normalised time t."""
    if not (0.0 <= t <= 1.0):
        warnings.warn(f"querying skill outside [0, 1] at t={t:.4g}", stacklevel=2)
    q = [m.query(t) for m in skill.models]
    return PoseTwistAccel(
        position=np.array([q[0].mean, q[1].mean, q[2].mean]),
        rotation_vector=np.array([q[3].mean, q[4].mean, q[5].mean]),
        linear_velocity=np.array([q[0].first_deriv, q[1].first_deriv, q[2].first_deriv]),
        rotvec_rate=np.array([q[3].first_deriv, q[4].first_deriv, q[5].first_deriv]),
        linear_accel=np.array([q[0].second_deriv, q[1].second_deriv, q[2].second_deriv]),
        rotvec_accel=np.array([q[3].second_deriv, q[4].second_deriv, q[5].second_deriv]),
    )


def sample_skill(skill, times):
    """Vectorised skill query on an array of times (or a sample count)."""
    if np.isscalar(times):
        times = np.linspace(0.0, 1.0, int(times))
    times = np.asarray(times, dtype=float)
    mean = np.empty((len(times), 6))
    vel = np.empty((len(times), 6))
    acc = np.empty((len(times), 6))
    for a, m in enumerate(skill.models):
        mean[:, a], vel[:, a], acc[:, a] = gp.query_many(m, times)
    return Trajectory(times, mean[:, :3], mean[:, 3:], vel[:, :3], vel[:, 3:], acc[:, :3], acc[:, 3:])


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------

def posterior_basis(via_times, query_times, params, order=0):
    """Rows of the linear map from via values to posterior queries.

    The GP mean at time t is k_t (K + sy2 I)^-1 gamma, linear in the via
    values, so fitting and adaptation reduce to least squares on this basis.
    """
    G = gp.gram(via_times, params)
    factor = cho_factor(G)
    K = gp.se_cross(query_times, via_times, params, order=order)
    return cho_solve(factor, K.T).T


def fit_via_points(demonstration, n_via=N_VIA_DEFAULT, params=None, return_info=False):
    """Compress a demonstration to n_via via-points per axis by least squares.

    Via times are fixed on a linear grid; only the values are optimised so
    that the rebuilt posterior matches the demonstration samples.
    """
    if n_via < 5:
        raise ValueError(f"n_via must be at least 5, got {n_via}")
    params = params or gp.KernelParams()
    via_times = np.linspace(0.0, 1.0, n_via)
    J = posterior_basis(via_times, demonstration.timestamps, params)
    targets = np.hstack([demonstration.positions, demonstration.rotation_vectors])
    values = np.empty((n_via, 6))
    histories = []
    converged = True
    for a in range(6):
        y = targets[:, a]
        x0 = np.interp(via_times, demonstration.timestamps, y)
        res = optim.least_squares(lambda g: J @ g - y, lambda g: J, x0)
        values[:, a] = res.x
        histories.append(res.objective_history)
        converged = converged and res.converged
    via = ViaPointSet(via_times, values)
    if return_info:
        return via, {"converged": converged, "objective_histories": histories}
    return via


def fit_skill(demonstration, n_via=N_VIA_DEFAULT, params=None):
    """Convenience: fit via-points and build the skill in one call."""
    params = params or gp.KernelParams()
    return build_skill(fit_via_points(demonstration, n_via, params), params)


# ---------------------------------------------------------------------------
# Conditioning on task configurations (vanilla-GP baseline)
# ---------------------------------------------------------------------------

def match_via_indices(skill, positions):
    """Nearest via-point index for each observed position, by queried distance.

    Collisions fall back to the next-nearest unclaimed index; exact ties go
    to the lower index.
    """
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    if len(positions) > skill.via.n_via:
        raise ValueError("more observations than via-points")
    via_positions = sample_skill(skill, skill.via.times).positions
    claimed = []
    for obs in positions:
        dists = np.linalg.norm(via_positions - obs, axis=1)
        for idx in np.argsort(dists, kind="stable"):
            if int(idx) not in claimed:
                claimed.append(int(idx))
                break
    return claimed


def _aligned_values(skill, indices, targets, axes):
    """Via values at the given indices that make the posterior interpolate targets.

    Solves the small linear system W_cc g_c = target - W_cu g_u per axis, where
    W are the posterior interpolation weights at the claimed via times. Entries
    of targets may be NaN to leave that (index, axis) untouched.
    """
    via = skill.via
    W = posterior_basis(via.times, via.times[indices], skill.params)
    values = via.values.copy()
    for col in axes:
        rows = [i for i in range(len(indices)) if np.isfinite(targets[i, col])]
        if not rows:
            continue
        idx = [indices[i] for i in rows]
        others = [j for j in range(via.n_via) if j not in idx]
        Wcc = W[np.ix_(rows, idx)]
        Wcu = W[np.ix_(rows, others)]
        rhs = targets[rows, col] - Wcu @ via.values[others, col]
        values[idx, col] = np.linalg.solve(Wcc, rhs)
    return values


def conditioning_targets(skill, tc):
    """Matched via indices and per-axis target matrix for a task configuration.

    Observed rotation vectors are unwrapped to the representative closest to
    the skill's own rotation vector at the matched via time.
    """
    obs = list(tc.observations)
    if not obs:
        raise ValueError("task configuration has no observations")
    indices = match_via_indices(skill, [o.position for o in obs])
    targets = np.full((len(obs), 6), np.nan)
    for i, o in enumerate(obs):
        targets[i, :3] = o.position
        if o.rotvec is not None:
            here = query_skill(skill, skill.via.times[indices[i]]).rotation_vector
            targets[i, 3:] = so3.unwrap_rotvec(o.rotvec, here)
    return indices, targets


def condition_on_tc(skill, tc):
    """Vanilla-GP adaptation: align the nearest via-points so the posterior

    passes through each observed pose, then rebuild. Position axes are always
    conditioned; orientation axes only when the observation supplies one.
    """
    indices, targets = conditioning_targets(skill, tc)
    values = _aligned_values(skill, indices, targets, axes=range(6))
    return build_skill(skill.via.replace_values(values), skill.params)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def skill_to_json(skill):
    via = skill.via
    return {
        "kernel": {
            "lengthscale": skill.params.lengthscale,
            "noise_variance": skill.params.noise_variance,
            "signal_variance": skill.params.signal_variance,
        },
        "via": {
            "times": [float(t) for t in via.times],
            "columns": {name: [float(v) for v in via.values[:, a]] for a, name in enumerate(COLUMNS)},
        },
    }


def skill_from_json(doc):
    kernel = doc["kernel"]
    params = gp.KernelParams(
        lengthscale=float(kernel["lengthscale"]),
        noise_variance=float(kernel["noise_variance"]),
        signal_variance=float(kernel["signal_variance"]),
    )
    times = np.asarray(doc["via"]["times"], dtype=float)
    values = np.column_stack([np.asarray(doc["via"]["columns"][name], dtype=float) for name in COLUMNS])
    return build_skill(ViaPointSet(times, values), params)


def save_skill(skill, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(skill_to_json(skill), fh, indent=2)


def load_skill(path):
    with open(path, "r", encoding="utf-8") as fh:
        return skill_from_json(json.load(fh))

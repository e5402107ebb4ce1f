"""Skill-GP: least-squares adaptation of free via-points around anchored ones.

Observed task-configuration poses pin a small set of via-points (the
anchors); the remaining via-points are optimised so the adapted skill's
first and second derivatives match the demonstration's analytical
derivative profile at the demonstration sample times. The anchored values
are held bit-identical throughout.
"""

from dataclasses import dataclass, field

import numpy as np

from . import optim
from .skill import (
    ViaPointSet,
    build_skill,
    conditioning_targets,
    posterior_basis,
    _aligned_values,
)


@dataclass(frozen=True)
class ObjectiveWeights:
    """Relative weight of the acceleration term in the adaptation objective."""

    lambda_accel: float = 0.1

    def __post_init__(self):
        if self.lambda_accel < 0:
            raise ValueError("lambda_accel must be non-negative")


@dataclass(frozen=True)
class AnchorSet:
    """Via-point indices pinned to observed task conditions.

    values holds the full 6-column via values at each anchored index; mask
    marks which axes are actually pinned (orientation only when the
    observation supplied one).
    """

    indices: tuple
    values: np.ndarray  # (k, 6)
    mask: np.ndarray  # (k, 6) bool

    def __post_init__(self):
        k = len(self.indices)
        if not 1 <= k <= 3:
            raise ValueError(f"anchor count must be between 1 and 3, got {k}")
        if len(set(self.indices)) != k:
            raise ValueError("anchor indices must be unique")
        if self.values.shape != (k, 6) or self.mask.shape != (k, 6):
            raise ValueError("anchor values/mask must be (k, 6)")


@dataclass(frozen=True)
class AdaptResult:
    via: ViaPointSet
    objective_history: list
    converged: bool
    iterations: int
    skill: object = field(repr=False, default=None)


def select_anchors(skill, tc):
    """Anchor the via-points nearest each observed pose.

    Anchored values are the via values that make the posterior interpolate
    the observation exactly (the same alignment used by vanilla conditioning),
    so a task configuration matching the skill's own trajectory yields anchors
    equal to the current via values.
    """
    indices, targets = conditioning_targets(skill, tc)
    aligned = _aligned_values(skill, indices, targets, axes=range(6))
    mask = np.zeros((len(indices), 6), dtype=bool)
    mask[:, :3] = True
    mask[:, 3:] = np.isfinite(targets[:, 3:])
    return AnchorSet(tuple(indices), aligned[indices], mask)


def skill_gp_adapt(skill, anchors, demonstration, weights=None):
    """Optimise the free via-points to preserve the demonstration's kinematics.

    Targets are the analytical first/second derivatives of the input skill at
    the demonstration sample times; anchored entries are fixed and the free
    entries per axis solve the damped Gauss-Newton least squares.
    """
    weights = weights or ObjectiveWeights()
    via = skill.via
    for idx in anchors.indices:
        if not 0 <= idx < via.n_via:
            raise ValueError(f"anchor index {idx} out of range")
    ts = demonstration.timestamps
    B1 = posterior_basis(via.times, ts, skill.params, order=1)
    B2 = posterior_basis(via.times, ts, skill.params, order=2)
    w_acc = np.sqrt(weights.lambda_accel)

    values = via.values.copy()
    anchor_rows = {idx: i for i, idx in enumerate(anchors.indices)}
    histories = []
    converged = True
    iterations = 0
    for a in range(6):
        fixed = [idx for idx in anchors.indices if anchors.mask[anchor_rows[idx], a]]
        for idx in fixed:
            values[idx, a] = anchors.values[anchor_rows[idx], a]
        free = [j for j in range(via.n_via) if j not in fixed]
        target = np.concatenate([B1 @ via.values[:, a], w_acc * (B2 @ via.values[:, a])])
        A = np.vstack([B1, w_acc * B2])
        base = A[:, fixed] @ values[fixed, a] if fixed else 0.0
        A_free = A[:, free]

        def residual(x):
            return A_free @ x + base - target

        res = optim.least_squares(residual, lambda x: A_free, values[free, a])
        values[free, a] = res.x
        histories.append(res.objective_history)
        converged = converged and res.converged
        iterations = max(iterations, res.iterations)

    # Combined objective per iteration: pad per-axis histories with their final value.
    length = max(len(h) for h in histories)
    combined = [
        float(sum(h[min(i, len(h) - 1)] for h in histories)) for i in range(length)
    ]
    new_via = via.replace_values(values)
    return AdaptResult(new_via, combined, converged, iterations, build_skill(new_via, skill.params))


def adapt_to_tc(skill, tc, demonstration, weights=None):
    """Full Skill-GP pipeline step: select anchors from the TC, then adapt."""
    anchors = select_anchors(skill, tc)
    return skill_gp_adapt(skill, anchors, demonstration, weights)

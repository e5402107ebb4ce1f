"""Kinematic retention metrics: gradient cosine similarity and speed errors."""

from dataclasses import dataclass

import numpy as np

from .skill import sample_skill

N_SAMPLES_DEFAULT = 200
ZERO_NORM = 1e-9


@dataclass(frozen=True)
class SimilarityProfile:
    cosines: np.ndarray
    mean_cosine: float
    magnitude_errors: np.ndarray
    mean_abs_magnitude_error: float


def _profile(va, vd):
    na = np.linalg.norm(va, axis=1)
    nd = np.linalg.norm(vd, axis=1)
    cos = np.zeros(len(va))
    both = (na >= ZERO_NORM) & (nd >= ZERO_NORM)
    neither = (na < ZERO_NORM) & (nd < ZERO_NORM)
    cos[both] = np.einsum("ij,ij->i", va[both], vd[both]) / (na[both] * nd[both])
    cos[neither] = 1.0
    cos = np.clip(cos, -1.0, 1.0)
    err = np.abs(na - nd)
    return SimilarityProfile(cos, float(cos.mean()), err, float(err.mean()))


def compare_kinematics(adapted, demo_skill, n_samples=N_SAMPLES_DEFAULT):
    """Per-sample velocity cosines and magnitude errors against the demonstration.

    Returns (linear, angular) profiles; angular velocities are obtained via
    the SO(3) left-Jacobian mapping. Samples where both speeds vanish count
    as cosine 1, samples where exactly one vanishes as cosine 0.
    """
    if n_samples < 10:
        raise ValueError("n_samples must be at least 10")
    ta = sample_skill(adapted, n_samples)
    td = sample_skill(demo_skill, n_samples)
    linear = _profile(ta.linear_velocities, td.linear_velocities)
    angular = _profile(ta.angular_velocities(), td.angular_velocities())
    return linear, angular

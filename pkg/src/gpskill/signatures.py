"""Truncated path signatures (depth 3) and the normalized similarity score.

A path sampled in R^3 is lifted to its iterated integrals up to depth 3,
computed exactly over piecewise-linear segments with Chen's identity. Two
paths are compared by the inner product of their signature features after
rescaling both by the median pairwise distance of the pooled samples.
"""

from dataclasses import dataclass

import numpy as np

from .so3 import rotvec_rate_to_angular_velocity  # noqa: F401  (similarity inputs)

MEDIAN_POOL_CAP = 512


@dataclass(frozen=True)
class SignatureTensor:
    """Depth-3 signature: level k holds the k-fold iterated integrals.

    level1 is (3,), level2 (3, 3) and level3 (3, 3, 3); flattening in C order
    gives the lexicographic coordinate layout.
    """

    level1: np.ndarray
    level2: np.ndarray
    level3: np.ndarray

    @property
    def flat(self):
        return np.concatenate([self.level1.ravel(), self.level2.ravel(), self.level3.ravel()])


@dataclass(frozen=True)
class SimilarityScore:
    value: float
    degenerate: bool = False


def segment_signature(delta):
    """Closed-form signature of a single linear segment with increment delta."""
    delta = np.asarray(delta, dtype=float)
    l2 = np.multiply.outer(delta, delta) / 2.0
    l3 = np.multiply.outer(np.multiply.outer(delta, delta), delta) / 6.0
    return SignatureTensor(delta.copy(), l2, l3)


def chen_product(a, b):
    """Chen's identity: signature of the concatenation of two paths."""
    l1 = a.level1 + b.level1
    l2 = a.level2 + b.level2 + np.multiply.outer(a.level1, b.level1)
    l3 = (
        a.level3
        + b.level3
        + np.multiply.outer(a.level2, b.level1)
        + np.multiply.outer(a.level1, b.level2)
    )
    return SignatureTensor(l1, l2, l3)


def truncated_signature(path):
    """Depth-3 signature of a piecewise-linear path given as (N, 3) samples."""
    path = np.asarray(path, dtype=float)
    if path.ndim != 2 or path.shape[1] != 3:
        raise ValueError("path must be of shape (N, 3)")
    if len(path) < 2:
        raise ValueError("path needs at least 2 samples")
    if not np.isfinite(path).all():
        raise ValueError("path samples must be finite")
    deltas = np.diff(path, axis=0)
    sig = segment_signature(deltas[0])
    for d in deltas[1:]:
        sig = chen_product(sig, segment_signature(d))
    # Level 1 telescopes to the endpoint displacement; set it exactly.
    return SignatureTensor(path[-1] - path[0], sig.level2, sig.level3)


def signature_inner(a, b):
    return float(a.flat @ b.flat)


def median_heuristic_scale(a, b, cap=MEDIAN_POOL_CAP):
    """Median pairwise distance among pooled samples of both paths.

    Pools are subsampled deterministically (evenly spaced) to at most cap
    samples to bound the quadratic pairwise cost.
    """
    pooled = np.vstack([np.asarray(a, dtype=float), np.asarray(b, dtype=float)])
    if len(pooled) > cap:
        idx = np.linspace(0, len(pooled) - 1, cap).astype(int)
        pooled = pooled[idx]
    diff = pooled[:, None, :] - pooled[None, :, :]
    dists = np.linalg.norm(diff, axis=-1)
    iu = np.triu_indices(len(pooled), k=1)
    return float(np.median(dists[iu]))


def similarity(a, b):
    """Normalized signature similarity of two sampled velocity paths, in [0, 1].

    Both paths are rescaled by the pooled median heuristic before computing
    signatures. Constant (zero-increment) paths are degenerate: two of them
    are identical up to translation (similarity 1); one against a moving path
    scores 0.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = median_heuristic_scale(a, b)
    if scale > 0:
        a = a / scale
        b = b / scale
    sig_a = truncated_signature(a)
    sig_b = truncated_signature(b)
    kaa = signature_inner(sig_a, sig_a)
    kbb = signature_inner(sig_b, sig_b)
    if kaa <= 0 or kbb <= 0:
        both_flat = kaa <= 0 and kbb <= 0
        return SimilarityScore(1.0 if both_flat else 0.0, degenerate=True)
    value = signature_inner(sig_a, sig_b) / np.sqrt(kaa * kbb)
    return SimilarityScore(float(np.clip(value, 0.0, 1.0)))


def velocity_profile_similarity(lin_a, ang_a, lin_b, ang_b):
    """Equal-weight average of the linear and angular similarity scores."""
    s_lin = similarity(lin_a, lin_b)
    s_ang = similarity(ang_a, ang_b)
    return 0.5 * (s_lin.value + s_ang.value)

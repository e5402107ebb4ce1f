"""Rotation utilities: quaternions, rotation vectors and the SO(3) left Jacobian.

Quaternions are (w, x, y, z), assumed unit norm. Rotation vectors are
axis * angle in radians. The left Jacobian maps rotation-vector time
derivatives to world-frame angular velocities.
"""

import numpy as np

_SMALL_ANGLE = 1e-6


def skew(v):
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def quat_normalize(q):
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise ValueError("zero-norm quaternion")
    return q / n


def quat_to_rotvec(q):
    """Log map; returns the canonical rotation vector with angle in [0, pi]."""
    q = quat_normalize(q)
    if q[0] < 0:
        q = -q
    v = q[1:]
    s = np.linalg.norm(v)
    angle = 2.0 * np.arctan2(s, q[0])
    if s < 1e-12:
        return np.zeros(3)
    return (angle / s) * v


def rotvec_to_quat(r):
    r = np.asarray(r, dtype=float)
    angle = np.linalg.norm(r)
    if angle < 1e-12:
        return np.array([1.0, 0.0, 0.0, 0.0])
    axis = r / angle
    return np.concatenate(([np.cos(angle / 2)], np.sin(angle / 2) * axis))


def rotvec_to_matrix(r):
    """Rodrigues formula."""
    r = np.asarray(r, dtype=float)
    angle = np.linalg.norm(r)
    if angle < _SMALL_ANGLE:
        S = skew(r)
        return np.eye(3) + S + 0.5 * (S @ S)
    axis = r / angle
    S = skew(axis)
    return np.eye(3) + np.sin(angle) * S + (1 - np.cos(angle)) * (S @ S)


def matrix_to_rotvec(R):
    return quat_to_rotvec(matrix_to_quat(R))


def matrix_to_quat(R):
    """Shepperd-style conversion, stable for all rotation angles."""
    m = np.asarray(R, dtype=float)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0:
        s = np.sqrt(tr + 1.0) * 2
        q = np.array([0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s])
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2
        q = np.array([(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s])
    elif m[1, 1] > m[2, 2]:
        s = np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2
        q = np.array([(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s])
    else:
        s = np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2
        q = np.array([(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s])
    return quat_normalize(q)


def left_jacobian(r):
    """Left Jacobian of SO(3) at rotation vector r.

    J_l(r) = I + ((1 - cos a) / a^2) [r]x + ((a - sin a) / a^3) [r]x^2
    with a = |r|; a series expansion is used below the small-angle cutoff.
    """
    r = np.asarray(r, dtype=float)
    angle = np.linalg.norm(r)
    S = skew(r)
    if angle < _SMALL_ANGLE:
        a2 = angle * angle
        c1 = 0.5 - a2 / 24.0
        c2 = 1.0 / 6.0 - a2 / 120.0
    else:
        c1 = (1.0 - np.cos(angle)) / angle ** 2
        c2 = (angle - np.sin(angle)) / angle ** 3
    return np.eye(3) + c1 * S + c2 * (S @ S)


def rotvec_rate_to_angular_velocity(r, r_dot):
    """World-frame angular velocity from a rotation vector and its rate."""
    r = np.asarray(r, dtype=float)
    r_dot = np.asarray(r_dot, dtype=float)
    if not (np.isfinite(r).all() and np.isfinite(r_dot).all()):
        raise ValueError("rotation vector and rate must be finite")
    return left_jacobian(r) @ r_dot


def rotvec_rates_to_angular_velocities(rotvecs, rates):
    """Vectorised left-Jacobian mapping over (N, 3) arrays."""
    rotvecs = np.asarray(rotvecs, dtype=float)
    rates = np.asarray(rates, dtype=float)
    out = np.empty_like(rates)
    for i in range(len(rotvecs)):
        out[i] = left_jacobian(rotvecs[i]) @ rates[i]
    return out


def unwrap_rotvec(r, reference):
    """Pick the 2*pi*k representative of rotation vector r closest to reference.

    The candidates share the rotation of r: r scaled so that its angle is
    shifted by multiples of 2*pi along the same axis (and the zero rotation
    expressed along the reference axis when r is the identity).
    """
    r = np.asarray(r, dtype=float)
    reference = np.asarray(reference, dtype=float)
    angle = np.linalg.norm(r)
    candidates = []
    if angle < 1e-12:
        ref_angle = np.linalg.norm(reference)
        axis = reference / ref_angle if ref_angle > 1e-12 else np.array([1.0, 0.0, 0.0])
        for k in range(-2, 3):
            candidates.append(2.0 * np.pi * k * axis)
    else:
        axis = r / angle
        for k in range(-2, 3):
            candidates.append((angle + 2.0 * np.pi * k) * axis)
    dists = [np.linalg.norm(c - reference) for c in candidates]
    return candidates[int(np.argmin(dists))]


def continuous_rotvecs(quats):
    """Log-map a quaternion series into a jump-free rotation-vector series."""
    out = np.zeros((len(quats), 3))
    for i, q in enumerate(quats):
        r = quat_to_rotvec(q)
        out[i] = r if i == 0 else unwrap_rotvec(r, out[i - 1])
    return out

"""Squared-exponential GP regression over scalar time.

Each model is a zero-mean GP with the SE kernel

    k(t, t') = sf2 * exp(-(t - t')^2 / (2 * ls^2))

conditioned on noisy support observations. Because the kernel is smooth,
the posterior mean and its first two time derivatives are available in
closed form from the same precomputed solve

    alpha = (K_tt + sy2 * I)^-1 y,

so velocity- and acceleration-like quantities never require numerical
differencing. Models are immutable; conditioning returns a new model.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import NumericFailure

JITTER = 1e-9
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class KernelParams:
    """SE kernel hyperparameters: lengthscale (s), observation noise and signal variance."""

    lengthscale: float = 0.66
    noise_variance: float = 0.005
    signal_variance: float = 1.0

    def __post_init__(self):
        if not np.isfinite([self.lengthscale, self.noise_variance, self.signal_variance]).all():
            raise ValueError("kernel parameters must be finite")
        if self.lengthscale <= 0:
            raise ValueError(f"lengthscale must be positive, got {self.lengthscale}")
        if self.noise_variance < 0:
            raise ValueError(f"noise_variance must be non-negative, got {self.noise_variance}")
        if self.signal_variance <= 0:
            raise ValueError(f"signal_variance must be positive, got {self.signal_variance}")


@dataclass(frozen=True)
class KernelEval:
    k: float
    dk_dt: float
    d2k_dt2: float


@dataclass(frozen=True)
class QueryResult:
    mean: float
    first_deriv: float
    second_deriv: float


def kernel_eval(t, t_prime, params):
    """Evaluate k(t, t') and its first/second derivatives in the first argument."""
    if not (np.isfinite(t) and np.isfinite(t_prime)):
        raise ValueError("kernel_eval requires finite inputs")
    ls2 = params.lengthscale ** 2
    d = t - t_prime
    k = params.signal_variance * np.exp(-0.5 * d * d / ls2)
    dk = -(d / ls2) * k
    d2k = (d * d / ls2 ** 2 - 1.0 / ls2) * k
    return KernelEval(float(k), float(dk), float(d2k))


def se_cross(query_times, support_times, params, order=0):
    """Cross-covariance matrix between query and support times.

    order 0 returns k(q, s); order 1 and 2 return the first and second
    derivative of k in the query argument. Shape (len(query), len(support)).
    """
    q = np.asarray(query_times, dtype=float).reshape(-1, 1)
    s = np.asarray(support_times, dtype=float).reshape(1, -1)
    ls2 = params.lengthscale ** 2
    d = q - s
    k = params.signal_variance * np.exp(-0.5 * d * d / ls2)
    if order == 0:
        return k
    if order == 1:
        return -(d / ls2) * k
    if order == 2:
        return (d * d / ls2 ** 2 - 1.0 / ls2) * k
    raise ValueError(f"unsupported derivative order {order}")


def gram(times, params):
    """Regularised Gram matrix K_tt + (noise + jitter) I."""
    K = se_cross(times, times, params, order=0)
    return K + (params.noise_variance + JITTER) * np.eye(len(K))


@dataclass(frozen=True)
class GpModel:
    """SE-kernel GP conditioned on (support_times, support_values).

    alpha caches the regularised solve so posterior queries are dot products.
    """

    support_times: np.ndarray
    support_values: np.ndarray
    params: KernelParams
    alpha: np.ndarray = field(repr=False)

    def query(self, t):
        return query(self, t)

    def query_many(self, times):
        return query_many(self, times)

    def condition(self, t_o, y_o):
        return condition(self, t_o, y_o)


def _solve_alpha(times, values, params):
    G = gram(times, params)
    try:
        c, low = cho_factor(G)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure(f"Gram matrix not positive definite after jitter: {exc}") from exc
    alpha = cho_solve((c, low), values)
    resid = np.linalg.norm(G @ alpha - values)
    scale = max(np.linalg.norm(values), 1.0)
    if not np.isfinite(resid) or resid / scale > RESIDUAL_TOL:
        raise NumericFailure(f"GP solve residual {resid / scale:.3e} exceeds {RESIDUAL_TOL:.0e}")
    return alpha


def fit_gp(times, values, params):
    """Fit a GP to support points; times must be strictly increasing."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.ndim != 1 or values.ndim != 1 or len(times) != len(values):
        raise ValueError("times and values must be 1-d arrays of equal length")
    if len(times) < 2:
        raise ValueError("need at least 2 support points")
    if not np.all(np.diff(times) > 0):
        raise ValueError("support times must be strictly increasing")
    if not (np.isfinite(times).all() and np.isfinite(values).all()):
        raise ValueError("support data must be finite")
    alpha = _solve_alpha(times, values, params)
    return GpModel(times, values, params, alpha)


def query(model, t):
    """Posterior mean with analytical first and second derivatives at time t."""
    if not np.isfinite(t):
        raise ValueError("query time must be finite")
    k0 = se_cross([t], model.support_times, model.params, order=0)
    k1 = se_cross([t], model.support_times, model.params, order=1)
    k2 = se_cross([t], model.support_times, model.params, order=2)
    return QueryResult(
        float(k0 @ model.alpha),
        float(k1 @ model.alpha),
        float(k2 @ model.alpha),
    )


def query_many(model, times):
    """Vectorised posterior mean/velocity/acceleration at an array of times."""
    times = np.asarray(times, dtype=float)
    if not np.isfinite(times).all():
        raise ValueError("query times must be finite")
    mean = se_cross(times, model.support_times, model.params, order=0) @ model.alpha
    vel = se_cross(times, model.support_times, model.params, order=1) @ model.alpha
    acc = se_cross(times, model.support_times, model.params, order=2) @ model.alpha
    return mean, vel, acc


def condition(model, t_o, y_o):
    """Refit with the observation (t_o, y_o) added to the support set.

    An observation colliding with an existing support time (within 1e-9 s)
    replaces the old value instead of being appended, which keeps the Gram
    matrix well conditioned.
    """
    if not (np.isfinite(t_o) and np.isfinite(y_o)):
        raise ValueError("conditioning point must be finite")
    lo = model.support_times[0] - model.params.lengthscale
    hi = model.support_times[-1] + model.params.lengthscale
    if not (lo <= t_o <= hi):
        import warnings

        warnings.warn(
            f"conditioning time {t_o:.4g} is outside the supported range "
            f"[{lo:.4g}, {hi:.4g}]; the posterior reverts to the prior there",
            stacklevel=2,
        )
    times = model.support_times.copy()
    values = model.support_values.copy()
    hit = np.flatnonzero(np.abs(times - t_o) <= 1e-9)
    if hit.size:
        values[hit[0]] = y_o
    else:
        idx = np.searchsorted(times, t_o)
        times = np.insert(times, idx, t_o)
        values = np.insert(values, idx, y_o)
    return fit_gp(times, values, model.params)

"""Generalized extreme value law, block maxima and maximum likelihood.

The GEV cdf/log-density switch to the Gumbel branch for |gamma| below 1e-7.
Fitting maximizes the log likelihood over (gamma, log scale, loc) with a
derivative-free simplex on standardized data, which keeps the result exactly
affine-equivariant up to optimizer tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from ._validation import as_series

__all__ = [
    "GevParams",
    "FitResult",
    "gev_cdf",
    "gev_logpdf",
    "block_maxima",
    "init_params",
    "fit_mle",
    "pe_estimate",
]

GAMMA_EPS = 1e-7

# likelihood maximization is restricted to this open shape range; outside it
# the block-maxima MLE loses regularity.  Small-N heavy-tail likelihoods ride
# an unbounded shape ridge, so fits can and do saturate at the upper bound.
GAMMA_MIN, GAMMA_MAX = -1.0, 8.0

EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class GevParams:
    """Shape gamma, scale a > 0 and location b of a GEV law."""

    gamma: float
    scale: float
    loc: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be > 0")


@dataclass(frozen=True)
class FitResult:
    params: GevParams
    loglik: float
    n_blocks: int
    block_size: Optional[int]
    converged: bool
    iterations: int


def _std_units(params: GevParams, x) -> np.ndarray:
    return (np.asarray(x, dtype=float) - params.loc) / params.scale


def gev_cdf(params: GevParams, x):
    """GEV distribution function; 0/1 outside the support boundary."""
    z = _std_units(params, x)
    g = params.gamma
    if abs(g) < GAMMA_EPS:
        out = np.exp(-np.exp(-z))
    else:
        t = 1.0 + g * z
        inside = t > 0.0
        out = np.empty_like(z)
        with np.errstate(over="ignore"):
            out[inside] = np.exp(-t[inside] ** (-1.0 / g))
        out[~inside] = 0.0 if g > 0 else 1.0
    return float(out) if np.ndim(x) == 0 else out


def gev_logpdf(params: GevParams, x):
    """GEV log density; -inf outside the support."""
    z = _std_units(params, x)
    g = params.gamma
    log_a = math.log(params.scale)
    if abs(g) < GAMMA_EPS:
        out = -log_a - z - np.exp(-z)
    else:
        t = 1.0 + g * z
        inside = t > 0.0
        out = np.full_like(z, -np.inf)
        lt = np.log(t[inside])
        out[inside] = -log_a - (1.0 + 1.0 / g) * lt - np.exp(-lt / g)
    return float(out) if np.ndim(x) == 0 else out


def block_maxima(data, k: int) -> np.ndarray:
    """Maxima of consecutive non-overlapping blocks of length k.

    Trailing observations that do not fill a block are discarded.
    """
    arr = as_series(data)
    k = int(k)
    if k < 2:
        raise ValueError("block size k must be >= 2")
    n_blocks = arr.size // k
    if n_blocks < 1:
        raise ValueError(f"block size {k} exceeds the {arr.size} available observations")
    return arr[: n_blocks * k].reshape(n_blocks, k).max(axis=1)


def _pwm_estimates(blocks: np.ndarray) -> Optional[GevParams]:
    """Probability-weighted-moment parameter estimates (None when invalid)."""
    y = np.sort(blocks)
    n = y.size
    j = np.arange(1, n + 1, dtype=float)
    b0 = y.mean()
    b1 = np.mean((j - 1) / (n - 1) * y)
    b2 = np.mean((j - 1) * (j - 2) / ((n - 1) * (n - 2)) * y)
    denom = 3 * b2 - b0
    if denom == 0 or 2 * b1 - b0 == 0:
        return None
    z = (2 * b1 - b0) / denom - math.log(2) / math.log(3)
    k_h = 7.8590 * z + 2.9554 * z * z  # Hosking's approximation, k = -gamma
    if not math.isfinite(k_h):
        return None
    if abs(k_h) < 1e-6:
        scale = (2 * b1 - b0) / math.log(2)
        if not scale > 0:
            return None
        return GevParams(gamma=0.0, scale=scale, loc=b0 - EULER_GAMMA * scale)
    if k_h <= -1 or k_h > 100:
        return None
    g1 = math.gamma(1 + k_h)
    scale = (2 * b1 - b0) * k_h / (g1 * (1 - 2.0 ** -k_h))
    if not (math.isfinite(scale) and scale > 0):
        return None
    loc = b0 + scale * (g1 - 1) / k_h
    gamma = min(max(-k_h, GAMMA_MIN + 0.1), GAMMA_MAX - 0.5)
    return GevParams(gamma=gamma, scale=scale, loc=loc)


def init_params(blocks) -> GevParams:
    """Starting values for the likelihood search.

    Probability-weighted moments when they yield a valid point, otherwise
    Gumbel moment matching with a mildly heavy shape.
    """
    y = as_series(blocks)
    if y.size < 2:
        raise ValueError("need at least 2 blocks")
    sd = y.std(ddof=1)
    if sd == 0:
        raise ValueError("degenerate blocks: zero sample variance")

    candidates = []
    pwm = _pwm_estimates(y)
    if pwm is not None:
        candidates.append(pwm)
    scale0 = sd * math.sqrt(6.0) / math.pi
    loc0 = y.mean() - EULER_GAMMA * scale0
    candidates.append(GevParams(gamma=0.1, scale=scale0, loc=loc0))
    candidates.append(GevParams(gamma=0.0, scale=scale0, loc=loc0))

    for cand in candidates:
        if np.isfinite(np.sum(gev_logpdf(cand, y))):
            return cand
    return candidates[-1]


# finite stand-in for -inf log likelihood: keeps the simplex and the bracketed
# shape search numerically well defined (inf would poison their arithmetic)
_PENALTY = 1e15

# floor for the standardized log scale: the likelihood of a three-parameter
# GEV spikes without bound as the scale collapses onto the smallest block,
# so searches heading there are cut off and reported as non-converged
_LOG_SCALE_FLOOR = -12.0


def _neg_loglik3(theta: np.ndarray, y: np.ndarray) -> float:
    gamma, log_scale, loc = theta
    if not (GAMMA_MIN < gamma < GAMMA_MAX) or not _LOG_SCALE_FLOOR < log_scale < 700.0:
        return _PENALTY
    ll = np.sum(gev_logpdf(GevParams(gamma=gamma, scale=math.exp(log_scale), loc=loc), y))
    return _PENALTY if not np.isfinite(ll) else -ll


def _neg_loglik(theta: np.ndarray, gamma: float, y: np.ndarray) -> float:
    log_scale, loc = theta
    if not _LOG_SCALE_FLOOR < log_scale < 700.0:
        return _PENALTY
    ll = np.sum(gev_logpdf(GevParams(gamma=gamma, scale=math.exp(log_scale), loc=loc), y))
    return _PENALTY if not np.isfinite(ll) else -ll


_INNER_OPTIONS = {"xatol": 1e-9, "fatol": 1e-9, "maxiter": 400, "maxfev": 800}


def _feasible_start(gamma: float, y: np.ndarray) -> np.ndarray:
    """A (log scale, loc) pair placing every observation inside the support."""
    loc = float(np.median(y))
    spread = float(y.std()) or 1.0
    slack = max(gamma * (loc - y.min()), -gamma * (y.max() - loc), 0.0)
    return np.array([math.log(2.0 * slack + spread), loc])


class _ProfileObjective:
    """Profile negative log likelihood over the shape.

    For each shape value the scale/location pair is maximized by an inner
    simplex, warm-started from the best pair seen so far.  A direct simplex
    over all three parameters stalls on the shape ridge of small samples.
    """

    def __init__(self, y: np.ndarray, start: GevParams):
        self.y = y
        self.warm = np.array([math.log(start.scale), start.loc])

    def _inner(self, gamma: float):
        point = self.warm
        if _neg_loglik(point, gamma, self.y) >= _PENALTY:
            point = _feasible_start(gamma, self.y)
        return optimize.minimize(
            _neg_loglik, point, args=(gamma, self.y),
            method="Nelder-Mead", options=_INNER_OPTIONS,
        )

    def __call__(self, gamma: float) -> float:
        res = self._inner(gamma)
        if res.fun < _PENALTY:
            self.warm = res.x
        return res.fun

    def solve(self, gamma: float):
        return self._inner(gamma)


def fit_mle(blocks, block_size: Optional[int] = None) -> FitResult:
    """Maximum likelihood GEV fit to a collection of block maxima.

    Deterministic given identical input.  Non-convergence is reported through
    the ``converged`` flag, not an exception.

    Raises:
        ValueError: fewer than 3 blocks, or blocks with zero variance.
    """
    y = as_series(blocks)
    if y.size < 3:
        raise ValueError("need at least 3 blocks to fit three parameters")
    center = y.mean()
    spread = y.std(ddof=1)
    if spread == 0:
        raise ValueError("degenerate blocks: zero sample variance")
    ys = (y - center) / spread

    start = init_params(ys)
    theta0 = np.array([start.gamma, math.log(start.scale), start.loc])
    direct = optimize.minimize(
        _neg_loglik3, theta0, args=(ys,), method="Nelder-Mead",
        options={"xatol": 1e-8, "fatol": 1e-8, "maxiter": 2000, "maxfev": 4000},
    )
    iterations = int(direct.nit)
    if direct.success and direct.fun < _PENALTY:
        gamma, log_scale, loc = direct.x
        converged = log_scale > _LOG_SCALE_FLOOR + 0.5
    else:
        # ridge likelihoods stall the full simplex: profile out the shape
        profile = _ProfileObjective(ys, start)
        outer = optimize.minimize_scalar(
            profile,
            bounds=(GAMMA_MIN + 1e-9, GAMMA_MAX - 1e-9),
            method="bounded",
            options={"xatol": 1e-8, "maxiter": 100},
        )
        gamma = float(outer.x)
        inner = profile.solve(gamma)
        log_scale, loc = inner.x
        iterations += int(outer.nfev) + int(inner.nit)
        converged = bool(
            outer.success and inner.success and inner.fun < _PENALTY
            and log_scale > _LOG_SCALE_FLOOR + 0.5
        )
    params = GevParams(
        gamma=float(gamma),
        scale=float(math.exp(log_scale) * spread),
        loc=float(loc * spread + center),
    )
    loglik = float(np.sum(gev_logpdf(params, y)))
    return FitResult(
        params=params,
        loglik=loglik,
        n_blocks=int(y.size),
        block_size=block_size,
        converged=bool(converged and np.isfinite(loglik)),
        iterations=iterations,
    )


def pe_estimate(data, k: int, x, horizon: Optional[int] = None, rescale: bool = False):
    """Parametric maximum-distribution estimate at x from k-block maxima.

    By default the fitted GEV cdf is evaluated directly with its block-k
    parameters.  With ``rescale=True`` the cdf is raised to the power
    horizon/k (max-stability rescaling), which requires ``horizon``.
    """
    fit = fit_mle(block_maxima(data, k), block_size=int(k))
    out = gev_cdf(fit.params, x)
    if rescale:
        if horizon is None:
            raise ValueError("rescale=True requires a horizon")
        with np.errstate(divide="ignore"):
            out = np.exp(horizon / k * np.log(out))
    return out

"""Scikit-learn style estimators for the distribution of a future maximum.

Both estimators follow the fit/predict contract: ``fit`` consumes a 1-D
sample (or an ``(n, 1)`` column) and ``predict`` returns the estimated
probability that the maximum of the next ``horizon`` observations stays at or
below each query point.  Parameters are plain constructor arguments, so
``get_params`` / ``set_params`` / ``clone`` work as usual.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import as_series, check_probability
from . import gev, kernels

__all__ = ["GevMaxEstimator", "KernelMaxEstimator"]


class _MaxEstimatorMixin:
    def _check_fitted(self):
        if not hasattr(self, "n_"):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet; call fit first")

    def predict(self, X):
        """Estimated maximum-distribution cdf at the query points."""
        self._check_fitted()
        x = np.asarray(X, dtype=float)
        if x.ndim == 2 and x.shape[1] == 1:
            x = x[:, 0]
        return self.cdf(x)

    def survival(self, x):
        """Exceedance probability of the future maximum above x."""
        out = 1.0 - np.asarray(self.cdf(x), dtype=float)
        return float(out) if np.ndim(x) == 0 else out


class GevMaxEstimator(_MaxEstimatorMixin, BaseEstimator):
    """Parametric estimator: GEV cdf fitted to block maxima by MLE.

    Parameters
    ----------
    horizon : forecast period m (used by the optional rescaling and by
        quantile/exceedance reporting).
    block_size : length k of the maxima blocks; "auto" uses round(sqrt(n)),
        a data-analysis heuristic -- simulation protocols pass k explicitly.
    rescale : when True, evaluate the fitted cdf to the power horizon/k
        (max-stability rescaling); default is direct evaluation with the
        block-k parameters.
    """

    def __init__(self, horizon: int = 1, block_size="auto", rescale: bool = False):
        self.horizon = horizon
        self.block_size = block_size
        self.rescale = rescale

    def fit(self, X, y=None):
        data = as_series(X, "X")
        if self.block_size == "auto":
            k = max(2, round(math.sqrt(data.size)))
        else:
            k = int(self.block_size)
        result = gev.fit_mle(gev.block_maxima(data, k), block_size=k)
        self.n_ = data.size
        self.block_size_ = k
        self.n_blocks_ = result.n_blocks
        self.result_ = result
        self.shape_ = result.params.gamma
        self.scale_ = result.params.scale
        self.loc_ = result.params.loc
        self.converged_ = result.converged
        return self

    def cdf(self, x):
        self._check_fitted()
        out = gev.gev_cdf(self.result_.params, x)
        if self.rescale:
            power = self.horizon / self.block_size_
            with np.errstate(divide="ignore"):
                out = np.exp(power * np.log(out))
            return float(out) if np.ndim(x) == 0 else out
        return out

    def quantile(self, q: float) -> float:
        self._check_fitted()
        q = check_probability(q)
        if self.rescale:
            q = q ** (self.block_size_ / self.horizon)
        p = self.result_.params
        t = -math.log(q)
        if abs(p.gamma) < gev.GAMMA_EPS:
            z = -math.log(t)
        else:
            z = (t ** -p.gamma - 1.0) / p.gamma
        return p.loc + p.scale * z


class KernelMaxEstimator(_MaxEstimatorMixin, BaseEstimator):
    """Nonparametric estimator: m-th power of the kernel distribution estimate.

    Parameters
    ----------
    horizon : forecast period m.
    kernel : "gaussian", "epanechnikov" or a KernelSpec.
    bandwidth : "plugin" for the AMISE plug-in rule, or a positive number.
    """

    def __init__(self, horizon: int = 1, kernel="gaussian", bandwidth="plugin"):
        self.horizon = horizon
        self.kernel = kernel
        self.bandwidth = bandwidth

    def fit(self, X, y=None):
        data = as_series(X, "X")
        spec = kernels.resolve_kernel(self.kernel)
        if self.bandwidth == "plugin":
            h = kernels.bandwidth_plugin(data, spec).value
        else:
            h = float(self.bandwidth)
            if not (math.isfinite(h) and h > 0):
                raise ValueError(f"bandwidth must be positive, got {self.bandwidth!r}")
        self.n_ = data.size
        self.data_ = np.sort(data)
        self.kernel_spec_ = spec
        self.bandwidth_ = h
        return self

    def base_cdf(self, x):
        """The kernel distribution estimate itself (horizon 1)."""
        self._check_fitted()
        return kernels.kernel_cdf(self.data_, self.kernel_spec_, self.bandwidth_, x, assume_sorted=True)

    def cdf(self, x):
        self._check_fitted()
        return kernels.ne_estimate(
            self.data_, self.kernel_spec_, self.bandwidth_, self.horizon, x, assume_sorted=True
        )

    def quantile(self, q: float) -> float:
        """Inverse of the estimated cdf by bisection (the cdf is monotone)."""
        self._check_fitted()
        q = check_probability(q)
        reach = self.bandwidth_ * min(self.kernel_spec_.radius, _QUANTILE_REACH)
        lo = self.data_[0] - reach
        hi = self.data_[-1] + reach
        return float(optimize.brentq(lambda x: self.cdf(x) - q, lo, hi, xtol=1e-12 * max(1.0, abs(hi))))


# a Gaussian kernel cdf is numerically 0/1 well before its nominal radius
_QUANTILE_REACH = 10.0

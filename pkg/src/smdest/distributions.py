"""Sampling families with heavy, light-unbounded and bounded upper tails.

Each family exposes the exact cdf / survival / quantile trio, inverse-transform
sampling from a seeded :class:`numpy.random.Generator`, and the distribution of
the maximum of ``m`` future draws (``F^m`` and its quantiles) in log-stable
form.  ``class_params`` maps a family onto the tail-class parameters that the
asymptotic machinery in :mod:`smdest.theory` consumes:

* heavy tails:            1 - F(x) ~ A x^-alpha (1 + B x^-beta)
* light unbounded tails:  1 - F(x) = exp(-C x^kappa)
* bounded support:        1 - F(x) ~ (x*-x)^-mu (D + E (x*-x)^(mu sigma)),  x < x*
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import stats

from ._validation import check_probability

__all__ = [
    "HallParams",
    "WeibullTailParams",
    "BoundedTailParams",
    "TailClassParams",
    "TailFamily",
    "Pareto",
    "StudentT",
    "Burr",
    "Frechet",
    "GevFrechet",
    "WeibullClass",
    "ReversedBurr",
    "SmdSpec",
]


# --------------------------------------------------------------------------
# tail-class parameter records


@dataclass(frozen=True)
class HallParams:
    """Heavy-tail expansion 1 - F(x) ~ A x^-alpha (1 + B x^-beta)."""

    alpha: float
    beta: float
    A: float
    B: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0 and self.A > 0):
            raise ValueError("Hall parameters require alpha, beta, A > 0")


@dataclass(frozen=True)
class WeibullTailParams:
    """Light unbounded tail 1 - F(x) = exp(-C x^kappa)."""

    kappa: float
    C: float

    def __post_init__(self):
        if not (self.kappa > 0 and self.C > 0):
            raise ValueError("Weibull tail parameters require kappa, C > 0")


@dataclass(frozen=True)
class BoundedTailParams:
    """Bounded-support tail 1 - F(x) ~ (x*-x)^-mu (D + E (x*-x)^(mu sigma)).

    The class definition asks for mu < -2; values in [-2, 0) are representable
    (several reference configurations use them) and flagged via
    :attr:`in_stated_class` rather than rejected.
    """

    mu: float
    sigma: float
    D: float
    E: float
    endpoint: float

    def __post_init__(self):
        if not (self.mu < 0 and self.sigma < 0):
            raise ValueError("bounded tail parameters require mu < 0 and sigma < 0")

    @property
    def in_stated_class(self) -> bool:
        return self.mu < -2


TailClassParams = Union[HallParams, WeibullTailParams, BoundedTailParams]


# --------------------------------------------------------------------------
# families


class TailFamily:
    """Base class: exact distribution with closed-form survival and inverse.

    Subclasses implement ``survival`` and ``isf`` (inverse survival); the
    remaining operations are derived.  All values are immutable after
    construction and every method is pure, so instances are safe to share
    across threads.
    """

    def survival(self, x):
        """1 - F(x), computed directly from the tail formula."""
        raise NotImplementedError

    def isf(self, s):
        """Inverse survival: the x with survival(x) = s, for s in (0, 1)."""
        raise NotImplementedError

    def class_params(self) -> TailClassParams:
        """Tail-class parameters of the family's exact asymptotic expansion."""
        raise NotImplementedError

    def label(self) -> str:
        raise NotImplementedError

    # -- derived operations ------------------------------------------------

    def cdf(self, x):
        out = 1.0 - np.asarray(self.survival(x), dtype=float)
        return float(out) if np.ndim(x) == 0 else out

    def quantile(self, q):
        q = check_probability(q)
        return self.isf(1.0 - q)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``n`` values by inverse transform of a uniform stream."""
        if n < 1:
            raise ValueError("n must be >= 1")
        u = rng.random(n)
        return np.asarray(self.isf(1.0 - u), dtype=float)

    def smd_cdf(self, m: int, x):
        """CDF of the maximum of ``m`` draws: exp(m log F), log-stable."""
        s = np.asarray(self.survival(x), dtype=float)
        with np.errstate(divide="ignore"):
            out = np.exp(m * np.log1p(-s))
        return float(out) if out.ndim == 0 else out

    def smd_quantile(self, m: int, q):
        """Quantile of the m-fold maximum: the x with F(x)^m = q."""
        q = check_probability(q)
        # survival level of q**(1/m), computed without cancellation
        s = -math.expm1(math.log(q) / m)
        return self.isf(s)


def _as_float_array(x):
    return np.asarray(x, dtype=float)


def _maybe_scalar(out, x):
    return float(out) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class Pareto(TailFamily):
    """Pareto law on [1, inf): 1 - F(x) = x^-shape."""

    shape: float

    def __post_init__(self):
        if not self.shape > 0:
            raise ValueError("Pareto shape must be > 0")

    def survival(self, x):
        arr = _as_float_array(x)
        out = np.where(arr >= 1.0, np.abs(arr) ** -self.shape, 1.0)
        return _maybe_scalar(out, x)

    def isf(self, s):
        out = np.asarray(s, dtype=float) ** (-1.0 / self.shape)
        return _maybe_scalar(out, s)

    def class_params(self):
        # exact tail (B = 0); beta = 1 is the reference-table convention
        return HallParams(alpha=self.shape, beta=1.0, A=1.0, B=0.0)

    def label(self):
        return f"shape={self.shape:g}"


@dataclass(frozen=True)
class StudentT(TailFamily):
    """Student t with ``df`` degrees of freedom (fractional df allowed)."""

    df: float

    def __post_init__(self):
        if not self.df > 0:
            raise ValueError("StudentT df must be > 0")

    def survival(self, x):
        out = stats.t.sf(_as_float_array(x), self.df)
        return _maybe_scalar(out, x)

    def isf(self, s):
        out = stats.t.isf(np.asarray(s, dtype=float), self.df)
        return _maybe_scalar(out, s)

    def sample(self, n, rng):
        # standard representation: normal over sqrt(chi-square / df)
        if n < 1:
            raise ValueError("n must be >= 1")
        z = rng.standard_normal(n)
        v = rng.chisquare(self.df, n)
        return z / np.sqrt(v / self.df)

    def class_params(self):
        nu = self.df
        # tail constant of the t density: c_nu = Gamma((nu+1)/2)/(sqrt(nu pi) Gamma(nu/2))
        log_c = math.lgamma((nu + 1) / 2) - math.lgamma(nu / 2) - 0.5 * math.log(nu * math.pi)
        A = math.exp(log_c) * nu ** ((nu - 1) / 2)
        B = -(nu ** 2) * (nu + 1) / (2 * (nu + 2))
        return HallParams(alpha=nu, beta=2.0, A=A, B=B)

    def label(self):
        return f"df={self.df:g}"


@dataclass(frozen=True)
class Burr(TailFamily):
    """Burr law on (0, inf): 1 - F(x) = (1 + x^c)^-ell."""

    c: float
    ell: float

    def __post_init__(self):
        if not (self.c > 0 and self.ell > 0):
            raise ValueError("Burr parameters must be > 0")

    def survival(self, x):
        arr = _as_float_array(x)
        with np.errstate(invalid="ignore"):
            out = np.where(arr > 0.0, (1.0 + np.abs(arr) ** self.c) ** -self.ell, 1.0)
        return _maybe_scalar(out, x)

    def isf(self, s):
        arr = np.asarray(s, dtype=float)
        out = (arr ** (-1.0 / self.ell) - 1.0) ** (1.0 / self.c)
        return _maybe_scalar(out, s)

    def class_params(self):
        # (1+x^c)^-ell = x^(-c ell) (1 - ell x^-c + O(x^-2c))
        return HallParams(alpha=self.c * self.ell, beta=self.c, A=1.0, B=-self.ell)

    def label(self):
        return f"c={self.c:g},ell={self.ell:g}"


@dataclass(frozen=True)
class Frechet(TailFamily):
    """Classic Frechet law on (0, inf): F(x) = exp(-x^(-1/gamma))."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("Frechet gamma must be > 0")

    def survival(self, x):
        arr = _as_float_array(x)
        alpha = 1.0 / self.gamma
        with np.errstate(divide="ignore"):
            out = np.where(arr > 0.0, -np.expm1(-np.abs(arr) ** -alpha), 1.0)
        return _maybe_scalar(out, x)

    def isf(self, s):
        # survival -> -log F = -log1p(-s), exact under the inverse transform
        t = -np.log1p(-np.asarray(s, dtype=float))
        out = t ** -self.gamma
        return _maybe_scalar(out, s)

    def class_params(self):
        alpha = 1.0 / self.gamma
        # 1 - exp(-t) = t (1 - t/2 + ...) with t = x^-alpha
        return HallParams(alpha=alpha, beta=alpha, A=1.0, B=-0.5)

    def label(self):
        return f"gamma={self.gamma:g}"


@dataclass(frozen=True)
class GevFrechet(TailFamily):
    """Frechet-type generalized extreme value law, location 0 and scale 1.

    F(x) = exp(-(1 + gamma x)^(-1/gamma)) on x > -1/gamma, gamma > 0.  This is
    the three-parameter "Frechet" family of the reference tables; the shape
    parameter is the extreme value index itself.
    """

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("GevFrechet gamma must be > 0")

    def survival(self, x):
        arr = _as_float_array(x)
        g = self.gamma
        z = 1.0 + g * arr
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(z > 0.0, -np.expm1(-np.maximum(z, 1e-300) ** (-1.0 / g)), 1.0)
        return _maybe_scalar(out, x)

    def isf(self, s):
        t = -np.log1p(-np.asarray(s, dtype=float))
        out = (t ** -self.gamma - 1.0) / self.gamma
        return _maybe_scalar(out, s)

    def class_params(self):
        g = self.gamma
        alpha = 1.0 / g
        A = g ** -alpha
        if alpha < 1.0:
            beta, B = alpha, -A / 2.0
        elif alpha > 1.0:
            beta, B = 1.0, -(alpha ** 2)
        else:
            beta, B = 1.0, -1.5
        return HallParams(alpha=alpha, beta=beta, A=A, B=B)

    def label(self):
        return f"gamma={self.gamma:g}"


@dataclass(frozen=True)
class WeibullClass(TailFamily):
    """Light-tailed law on (0, inf): F(x) = 1 - exp(-C x^kappa)."""

    kappa: float
    C: float = 1.0

    def __post_init__(self):
        if not (self.kappa > 0 and self.C > 0):
            raise ValueError("WeibullClass parameters must be > 0")

    def survival(self, x):
        arr = _as_float_array(x)
        out = np.where(arr > 0.0, np.exp(-self.C * np.abs(arr) ** self.kappa), 1.0)
        return _maybe_scalar(out, x)

    def isf(self, s):
        out = (-np.log(np.asarray(s, dtype=float)) / self.C) ** (1.0 / self.kappa)
        return _maybe_scalar(out, s)

    def class_params(self):
        return WeibullTailParams(kappa=self.kappa, C=self.C)

    def label(self):
        return f"kappa={self.kappa:g},C={self.C:g}"


@dataclass(frozen=True)
class ReversedBurr(TailFamily):
    """Bounded-support law on (-inf, 0): 1 - F(x) = (1 + (-x)^p)^q.

    Parameterized directly by its tail-class parameters (mu < 0, sigma < 0);
    the exponents are q = 1/sigma and p = -mu sigma (both negative), giving
    upper endpoint x* = 0 and 1 - F(x) ~ (-x)^-mu (1 + (1/sigma) (-x)^(mu sigma)).
    """

    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.mu < 0 and self.sigma < 0):
            raise ValueError("ReversedBurr requires mu < 0 and sigma < 0")

    @property
    def _p(self) -> float:
        return -self.mu * self.sigma

    @property
    def _q(self) -> float:
        return 1.0 / self.sigma

    def survival(self, x):
        arr = _as_float_array(x)
        u = -arr
        with np.errstate(divide="ignore"):
            out = np.where(u > 0.0, (1.0 + np.maximum(u, 1e-300) ** self._p) ** self._q, 0.0)
        return _maybe_scalar(out, x)

    def isf(self, s):
        arr = np.asarray(s, dtype=float)
        out = -((arr ** self.sigma - 1.0) ** (1.0 / self._p))
        return _maybe_scalar(out, s)

    def class_params(self):
        return BoundedTailParams(mu=self.mu, sigma=self.sigma, D=1.0, E=1.0 / self.sigma, endpoint=0.0)

    def label(self):
        return f"mu={self.mu:g},sigma={self.sigma:g}"


# --------------------------------------------------------------------------
# sample maximum distribution handle


@dataclass(frozen=True)
class SmdSpec:
    """A family together with the forecast horizon m >= 1."""

    family: TailFamily
    horizon: int

    def __post_init__(self):
        if not (isinstance(self.horizon, (int, np.integer)) and self.horizon >= 1):
            raise ValueError("horizon must be an integer >= 1")

    def cdf(self, x):
        return self.family.smd_cdf(self.horizon, x)

    def quantile(self, q):
        return self.family.smd_quantile(self.horizon, q)

    def length(self, lo: float = 0.1, hi: float = 0.9) -> float:
        """Spread between two quantiles of the maximum's distribution."""
        return self.quantile(hi) - self.quantile(lo)

"""Closed-form asymptotics for sample-maximum estimation.

Norming constants of the three tail classes, the tail-mass quantities M and K,
the bias/variance scales (lambda, tau, xi, omega, eta, zeta), asymptotically
optimal kernel bandwidths, and the polynomial convergence-rate calculus behind
the reference rate table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .distributions import (
    BoundedTailParams,
    Burr,
    GevFrechet,
    HallParams,
    Pareto,
    ReversedBurr,
    SmdSpec,
    StudentT,
    TailClassParams,
    TailFamily,
    WeibullClass,
    WeibullTailParams,
)
from .gev import GevParams, gev_cdf

__all__ = [
    "NormingConstants",
    "EtaVector",
    "RateExponents",
    "RateTableRow",
    "norming_constants",
    "big_m",
    "big_k",
    "lambda_n",
    "tau_n",
    "xi_n",
    "omega_n",
    "eta_vector",
    "zeta_n",
    "pe_error_rate",
    "optimal_bandwidth",
    "optimal_bandwidth_delta",
    "ne_bias_delta",
    "rate_exponents",
    "rate_table",
    "HORIZON_EXPONENTS",
    "fraction_str",
    "round_to_one_significant",
]


GAMMA_EPS = 1e-7

HORIZON_EXPONENTS = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))


@dataclass(frozen=True)
class NormingConstants:
    """Shape gamma with the scale/location pair normalizing the maximum."""

    gamma: float
    a: float
    b: float
    theta: Optional[float] = None

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("scale a must be > 0")

    def as_gev(self) -> GevParams:
        return GevParams(gamma=self.gamma, scale=self.a, loc=self.b)


@dataclass(frozen=True)
class EtaVector:
    """Three-component sensitivity of the fitted GEV cdf to its parameters."""

    c1: float
    c2: float
    c3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3])

    def total(self) -> float:
        return self.c1 + self.c2 + self.c3


@dataclass(frozen=True)
class RateExponents:
    """Polynomial MSE exponents at horizon m = n^p (None = not covered)."""

    pe: Optional[Fraction]
    ne: Optional[Fraction]
    p: Fraction
    length: Optional[float] = None

    def __post_init__(self):
        for v in (self.pe, self.ne):
            if v is not None and not (Fraction(-2) <= v < 0):
                raise ValueError(f"rate exponent {v} outside [-2, 0)")


# --------------------------------------------------------------------------
# norming constants and tail-mass scales


def norming_constants(params: TailClassParams, horizon: float) -> NormingConstants:
    """Shape/scale/location normalizing the maximum of ``horizon`` draws."""
    h = float(horizon)
    if h < 1:
        raise ValueError("horizon must be >= 1")
    if isinstance(params, HallParams):
        gamma = 1.0 / float(params.alpha)
        scale = (float(params.A) * h) ** gamma
        return NormingConstants(gamma=gamma, a=gamma * scale, b=scale)
    if isinstance(params, WeibullTailParams):
        if h <= 1:
            raise ValueError("the light-tail norming needs horizon > 1 (log horizon > 0)")
        kappa, C = float(params.kappa), float(params.C)
        theta = 1.0 - 1.0 / kappa
        a = kappa ** -1 * C ** (-1.0 / kappa) * math.log(h) ** -theta
        b = (math.log(h) / C) ** (1.0 / kappa)
        return NormingConstants(gamma=0.0, a=a, b=b, theta=theta)
    if isinstance(params, BoundedTailParams):
        gamma = 1.0 / float(params.mu)
        scale = (float(params.D) * h) ** gamma
        return NormingConstants(gamma=gamma, a=-gamma * scale, b=float(params.endpoint) - scale)
    raise TypeError(f"unsupported tail class {type(params).__name__}")


def _check_tail_region(params: TailClassParams, x: float) -> None:
    if isinstance(params, BoundedTailParams):
        if x >= params.endpoint:
            raise ValueError(f"x={x} is not below the upper endpoint {params.endpoint}")
    elif x <= 0:
        raise ValueError(f"x={x} is outside the upper tail region (x > 0)")


def big_m(params: TailClassParams, x: float, m: float) -> float:
    """Tail mass scale of the forecast horizon: m times the survival law at x."""
    _check_tail_region(params, x)
    if isinstance(params, HallParams):
        return float(params.A) * m * x ** -float(params.alpha)
    if isinstance(params, WeibullTailParams):
        return m * math.exp(-float(params.C) * x ** float(params.kappa))
    return float(params.D) * m * (float(params.endpoint) - x) ** -float(params.mu)


def big_k(params: TailClassParams, x: float, k: float) -> float:
    """Tail mass scale of the block size k at the evaluation point x."""
    _check_tail_region(params, x)
    if isinstance(params, HallParams):
        return float(params.A) * k * x ** -float(params.alpha)
    if isinstance(params, WeibullTailParams):
        kappa, C = float(params.kappa), float(params.C)
        theta = 1.0 - 1.0 / kappa
        return k ** kappa * math.exp(-kappa * C ** (1.0 / kappa) * math.log(k) ** theta * x)
    return float(params.D) * k * (float(params.endpoint) - x) ** -float(params.mu)


def lambda_n(params: TailClassParams, k: float, m: float) -> float:
    """Asymptotic bias scale of the block-maxima MLE."""
    if isinstance(params, HallParams):
        return k * m ** (-2.0 * float(params.beta))
    if isinstance(params, WeibullTailParams):
        return k * math.log(m) ** -2.0
    return k * m ** (2.0 * float(params.sigma))


def tau_n(spec: SmdSpec, k: float, x: float) -> float:
    """Approximation error F^m(x) minus the GEV cdf under the k-block norming."""
    constants = norming_constants(spec.family.class_params(), k)
    return float(spec.cdf(x)) - float(gev_cdf(constants.as_gev(), x))


# --------------------------------------------------------------------------
# curvature / density scales of the kernel estimator


def xi_n(params: TailClassParams, x: float) -> float:
    """Second-derivative scale -F''(x)/(1-F(x)) of the tail class at x."""
    _check_tail_region(params, x)
    if isinstance(params, HallParams):
        a = float(params.alpha)
        return a * (a + 1.0) * x ** -2.0
    if isinstance(params, WeibullTailParams):
        kappa, C = float(params.kappa), float(params.C)
        return kappa ** 2 * C ** 2 * x ** (2.0 * kappa - 2.0)
    mu = float(params.mu)
    return mu * (mu + 1.0) * (float(params.endpoint) - x) ** -2.0


def omega_n(params: TailClassParams, x: float) -> float:
    """Density-over-squared-survival scale f(x)/(1-F(x))^2 of the tail class."""
    _check_tail_region(params, x)
    if isinstance(params, HallParams):
        a = float(params.alpha)
        return a / float(params.A) * x ** (a - 1.0)
    if isinstance(params, WeibullTailParams):
        kappa, C = float(params.kappa), float(params.C)
        return kappa * C * x ** (kappa - 1.0) * math.exp(C * x ** kappa)
    mu, D = float(params.mu), float(params.D)
    return -mu / D * (float(params.endpoint) - x) ** (mu - 1.0)


# --------------------------------------------------------------------------
# estimation-noise terms of the parametric estimator


def eta_vector(gamma: float, big_k_value: float) -> EtaVector:
    """Sensitivity vector -exp(-K) K (1 - K^g + g ln K, K^g (K^-g - 1)/g, K^g)."""
    K = float(big_k_value)
    if not K > 0:
        raise ValueError("big_k_value must be > 0")
    logK = math.log(K)
    pref = -math.exp(-K) * K
    if abs(gamma) < GAMMA_EPS:
        # analytic gamma -> 0 limits: (1 - K^g + g ln K) -> 0, K^g (K^-g - 1)/g -> -ln K
        return EtaVector(c1=0.0, c2=pref * -logK, c3=pref)
    kg = K ** gamma
    c1 = 1.0 - kg + gamma * logK
    c2 = kg * math.expm1(-gamma * logK) / gamma
    return EtaVector(c1=pref * c1, c2=pref * c2, c3=pref * kg)


_ZETA_REGIMES = ("vanishing", "delta", "diverging")


def zeta_n(regime: str, N: float, gamma: float, big_k_value: float = 1.0) -> float:
    """Noise rate of the fitted GEV cdf under the three tail-mass regimes."""
    if regime not in _ZETA_REGIMES:
        raise ValueError(f"regime must be one of {_ZETA_REGIMES}")
    root = N ** -0.5
    K = float(big_k_value)
    if regime == "delta":
        return root
    if regime == "vanishing":
        return root * K * (gamma * math.log(K) + 1.0)
    return root * K ** (1.0 + gamma) * math.exp(-K)


def pe_error_rate(N: float, lambda_value: float, eta: EtaVector, tau: float, zeta: float) -> float:
    """Composite error scale: N^-1/2 lambda (eta . 1) + tau + zeta."""
    return N ** -0.5 * lambda_value * eta.total() + tau + zeta


# --------------------------------------------------------------------------
# optimal bandwidths for the kernel distribution estimator


def optimal_bandwidth(params: TailClassParams, kernel, x: float, n: float) -> float:
    """Pointwise MSE-optimal bandwidth (2 xi^-2 omega n^-1 psi_half / mu2^2)^(1/3)."""
    xi = xi_n(params, x)
    omega = omega_n(params, x)
    return (2.0 * xi ** -2 * omega / n * kernel.psi_half / kernel.mu2 ** 2) ** (1.0 / 3.0)


def optimal_bandwidth_delta(params: TailClassParams, kernel, m: float, n: float, delta: float) -> float:
    """Optimal bandwidth at the point where the horizon tail mass equals delta."""
    if delta <= 0:
        raise ValueError("delta must be > 0")
    if isinstance(params, WeibullTailParams):
        if m <= delta:
            raise ValueError("the light-tail form needs m > delta (log(m/delta) > 0)")
        gamma = 0.0
    elif isinstance(params, HallParams):
        gamma = 1.0 / float(params.alpha)
    else:
        gamma = 1.0 / float(params.mu)
    common = (
        2.0 * delta ** (-1.0 - 3.0 * gamma) * m ** (1.0 + 3.0 * gamma) / n
        * kernel.psi_half / kernel.mu2 ** 2
    ) ** (1.0 / 3.0)
    if isinstance(params, HallParams):
        a = float(params.alpha)
        return common * float(params.A) ** gamma * (math.sqrt(a) * (a + 1.0)) ** (-2.0 / 3.0)
    if isinstance(params, WeibullTailParams):
        kappa, C = float(params.kappa), float(params.C)
        theta = 1.0 - 1.0 / kappa
        return common / (kappa * C) * (math.log(m / delta) / C) ** -theta
    mu, D = float(params.mu), float(params.D)
    # factor sqrt(-mu) (-mu - 1): forced by agreement with optimal_bandwidth at
    # the x solving big_m(x, m) = delta
    return common * D ** gamma * (math.sqrt(-mu) * (-mu - 1.0)) ** (-2.0 / 3.0)


def ne_bias_delta(params: TailClassParams, kernel, m: float, n: float, delta: float) -> float:
    """Asymptotic bias of the plug-in estimator at the tail-mass level delta."""
    if delta <= 0:
        raise ValueError("delta must be > 0")
    nu0 = (2.0 * kernel.mu2) ** (-1.0 / 3.0) * kernel.psi_half ** (2.0 / 3.0)
    common = nu0 * math.exp(-delta) * delta ** (1.0 / 3.0) * m ** (2.0 / 3.0) * n ** (-2.0 / 3.0)
    if isinstance(params, HallParams):
        a = float(params.alpha)
        return common * (a / (a + 1.0)) ** (1.0 / 3.0)
    if isinstance(params, WeibullTailParams):
        return common
    mu = float(params.mu)
    return common * (mu / (mu + 1.0)) ** (1.0 / 3.0)


# --------------------------------------------------------------------------
# polynomial convergence-rate calculus


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    return Fraction(float(v)).limit_denominator(10 ** 6)


def rate_exponents(params: TailClassParams, p) -> RateExponents:
    """MSE exponents of both estimators at horizon m = n^p, as exact rationals.

    The parametric exponent is max(p - 1, p max(-2 b g, -2)) with b the
    second-order parameter and g the extreme value index, defined for heavy
    tails with b >= 1/2 and for bounded tails with sigma <= -1/2 and mu < -2.
    The nonparametric exponent is p - 1 wherever the estimator keeps its usual
    rate; bounded tails need an integer mu or mu < -2 and a horizon below the
    boundary-effect threshold.
    """
    p = _frac(p)
    if p not in HORIZON_EXPONENTS:
        raise ValueError(f"p must be one of {HORIZON_EXPONENTS}")
    variance = p - 1
    if isinstance(params, WeibullTailParams):
        # block sizes comparable to the horizon break the MLE bias condition
        return RateExponents(pe=None, ne=variance, p=p)
    if isinstance(params, HallParams):
        alpha, beta = _frac(params.alpha), _frac(params.beta)
        gamma = 1 / alpha
        pe = None
        if beta >= Fraction(1, 2):
            pe = max(variance, p * max(-2 * beta * gamma, Fraction(-2)))
        return RateExponents(pe=pe, ne=variance, p=p)
    if isinstance(params, BoundedTailParams):
        mu, sigma = _frac(params.mu), _frac(params.sigma)
        gamma = 1 / mu
        pe = None
        if sigma <= Fraction(-1, 2) and mu < -2:
            pe = max(variance, p * max(-2 * sigma * gamma, Fraction(-2)))
        ne = None
        if mu.denominator == 1 or mu < -2:
            bound = 2 / (2 - 3 * gamma)
            if mu >= -2:
                # class-boundary rows keep the usual rate only up to m = n^(2/5)
                bound = min(bound, Fraction(2, 5))
            if p < bound:
                ne = variance
        return RateExponents(pe=pe, ne=ne, p=p)
    raise TypeError(f"unsupported tail class {type(params).__name__}")


@dataclass(frozen=True)
class RateTableRow:
    """One family row of the reference rate table."""

    group: str
    label: str
    params: TailClassParams
    family: TailFamily
    cells: tuple[RateExponents, ...]


def _fl(fr: Fraction) -> str:
    return str(fr)


def _hall_row(group: str, label_fr, alpha: Fraction, beta: Fraction, family: TailFamily):
    label = (
        ",".join(_fl(v) for v in label_fr) if isinstance(label_fr, tuple) else _fl(label_fr)
    )
    return (group, label, HallParams(alpha=alpha, beta=beta, A=1.0, B=0.0), family)


def _table_rows() -> list[tuple]:
    F = Fraction
    rows: list[tuple] = []
    for ell in (F(1, 2), F(1), F(3), F(10)):
        rows.append(_hall_row("pareto", ell, ell, F(1), Pareto(float(ell))))
    for ell in (F(1, 2), F(1), F(3), F(10)):
        rows.append(_hall_row("t", ell, ell, F(2), StudentT(float(ell))))
    burr_labels = [
        (F(1, 2), F(1, 2)), (F(1), F(1, 2)), (F(3), F(1, 2)),
        (F(1, 2), F(1)), (F(1), F(1)), (F(3), F(1)),
        (F(1, 2), F(3)), (F(1), F(3)), (F(3), F(3)),
    ]
    for c, ell in burr_labels:
        # the sampled family uses the first label as the outer exponent, while
        # the printed second-order parameter reads beta = c
        family = Burr(c=float(ell), ell=float(c))
        rows.append(_hall_row("burr", (c, ell), c * ell, c, family))
    for g in (F(5), F(2), F(1), F(1, 2), F(1, 4)):
        alpha = 1 / g
        rows.append(_hall_row("frechet", g, alpha, min(alpha, F(1)), GevFrechet(float(g))))
    for kappa in (F(1, 2), F(1), F(3), F(10)):
        rows.append(
            ("weibull", _fl(kappa), WeibullTailParams(kappa=kappa, C=1.0), WeibullClass(float(kappa), 1.0))
        )
    revburr_labels = [
        (F(-1, 2), F(-1, 3)), (F(-1), F(-1, 3)), (F(-3), F(-1, 3)),
        (F(-1, 2), F(-1)), (F(-1), F(-1)), (F(-3), F(-1)),
        (F(-1, 2), F(-2)), (F(-1), F(-2)), (F(-3), F(-2)),
    ]
    for c, ell in revburr_labels:
        # sampled family has tail parameters (-c ell, 1/c); the printed pair
        # (mu, sigma) = (-1/(c ell), 1/c) drives the rate columns
        family = ReversedBurr(mu=float(-c * ell), sigma=float(1 / c))
        params = BoundedTailParams(mu=-1 / (c * ell), sigma=1 / c, D=1.0, E=float(1 / c), endpoint=0.0)
        rows.append(("revburr", f"{_fl(c)},{_fl(ell)}", params, family))
    return rows


def rate_table(reference_n: int) -> list[RateTableRow]:
    """All family rows of the reference rate table at the given sample size.

    Each row carries the exponents of both estimators for the three horizon
    exponents and the quantile spread of the exact maximum's distribution at
    m = reference_n^p.
    """
    n = int(reference_n)
    if n < 4 or n & (n - 1):
        raise ValueError("reference_n must be a power of two >= 4")
    out = []
    for group, label, params, family in _table_rows():
        cells = []
        for p in HORIZON_EXPONENTS:
            m = round(n ** float(p))
            length = SmdSpec(family, m).length()
            cells.append(replace(rate_exponents(params, p), length=length))
        out.append(RateTableRow(group=group, label=label, params=params, family=family, cells=tuple(cells)))
    return out


def fraction_str(v: Optional[Fraction]) -> str:
    """Exact rational rendering; None (rate not covered) renders empty."""
    return "" if v is None else str(v)


def round_to_one_significant(v: float) -> float:
    """Round half-up to one significant figure."""
    if v == 0 or not math.isfinite(v):
        return v
    exponent = math.floor(math.log10(abs(v)))
    mantissa = abs(v) / 10 ** exponent
    return math.copysign(math.floor(mantissa + 0.5) * 10.0 ** exponent, v)

"""Closed-form moments, stationarity tests, and the theoretical ACF.

The scale recursion h_t = mu + x_t h_{t-1} (orders (1,1,1)) is driven by the
i.i.d. multiplier x_t = alpha1*|eps| + beta1*eta + gamma1 with eps standard
normal and eta Gamma(k, 1). Everything here is a function of the first two
moments of x_t:

    C1 = E x_t   = alpha1*sqrt(2/pi) + beta1*k + gamma1
    C2 = E x_t^2 = alpha1^2 + beta1^2 (k + k^2) + gamma1^2
                   + 2 alpha1 beta1 sqrt(2/pi) k + 2 alpha1 gamma1 sqrt(2/pi)
                   + 2 beta1 gamma1 k

Mean stationarity is C1 < 1; weak (second-moment) stationarity is C2 < C1 < 1.
For general orders (p,q,w) only the mean condition is available: sum of the
per-lag multiplier means must be below 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .errors import InvalidLag, NotMeanStationary, NotWeaklyStationary, UnsupportedOrder
from .intervals import Interval

__all__ = [
    "SQRT_2_OVER_PI",
    "IntGarchParams",
    "MomentSummary",
    "c1",
    "c2",
    "eta_x",
    "is_mean_stationary",
    "is_weakly_stationary",
    "mean_h",
    "mean_r",
    "second_moment_h",
    "var_r",
    "h_h_eta",
    "autocov",
    "acf",
    "conditional_volatility_factor",
    "summarize",
]

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

CoefSpec = Union[float, Sequence[float]]


def _coerce_coefs(value: CoefSpec, name: str) -> tuple:
    try:
        coefs = tuple(float(v) for v in value)
    except TypeError:
        coefs = (float(value),)
    if any(v < 0.0 for v in coefs):
        raise ValueError(f"{name} coefficients must be >= 0, got {coefs}")
    return coefs


@dataclass(frozen=True)
class IntGarchParams:
    """Model parameters (k; mu; alpha_1..p; beta_1..q; gamma_1..w).

    k is the Gamma shape of the radius innovation, mu the positive intercept
    of the scale recursion. Scalars are accepted for the lag coefficient
    sequences and normalized to 1-tuples; gamma may be empty (w = 0).
    """

    k: float
    mu: float
    alpha: tuple
    beta: tuple
    gamma: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "alpha", _coerce_coefs(self.alpha, "alpha"))
        object.__setattr__(self, "beta", _coerce_coefs(self.beta, "beta"))
        gamma = () if self.gamma is None else _coerce_coefs(self.gamma, "gamma")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "mu", float(self.mu))
        if not self.k > 0.0:
            raise ValueError(f"k must be > 0, got {self.k}")
        if not self.mu > 0.0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if len(self.alpha) < 1 or len(self.beta) < 1:
            raise ValueError("alpha and beta must each have at least one coefficient")

    @property
    def p(self) -> int:
        return len(self.alpha)

    @property
    def q(self) -> int:
        return len(self.beta)

    @property
    def w(self) -> int:
        return len(self.gamma)

    @property
    def order(self) -> tuple:
        return (self.p, self.q, self.w)


def _coefs_111(params: IntGarchParams) -> tuple:
    """First-lag coefficients, requiring effective order (1,1,1).

    w = 0 is admitted as gamma1 = 0: dropping the scale feedback term is the
    boundary case of the (1,1,1) formulas, not a different model.
    """
    if params.p != 1 or params.q != 1 or params.w > 1:
        raise UnsupportedOrder(
            f"closed-form second moments exist only for orders (1,1,1); got {params.order}"
        )
    gamma1 = params.gamma[0] if params.w == 1 else 0.0
    return params.alpha[0], params.beta[0], gamma1


def c1(params: IntGarchParams) -> float:
    """Mean of the scale multiplier, summed over all lags.

    Equals sum_i mu_i with mu_i = alpha_i*sqrt(2/pi) + beta_i*k + gamma_i,
    indicator-padded to max(p,q,w); works for any orders.
    """
    return (
        SQRT_2_OVER_PI * sum(params.alpha)
        + params.k * sum(params.beta)
        + sum(params.gamma)
    )


def c2(params: IntGarchParams) -> float:
    """Second moment of the scale multiplier (orders (1,1,1) only)."""
    a, b, g = _coefs_111(params)
    k = params.k
    return (
        a * a
        + b * b * (k + k * k)
        + g * g
        + 2.0 * a * b * SQRT_2_OVER_PI * k
        + 2.0 * a * g * SQRT_2_OVER_PI
        + 2.0 * b * g * k
    )


def eta_x(params: IntGarchParams) -> float:
    """E(eta_t x_t): cross moment of the radius innovation and the multiplier."""
    a, b, g = _coefs_111(params)
    k = params.k
    return a * SQRT_2_OVER_PI * k + b * (k + k * k) + g * k


def is_mean_stationary(params: IntGarchParams) -> bool:
    """True iff the unconditional mean of h_t is finite (strict C1 < 1)."""
    return c1(params) < 1.0


def is_weakly_stationary(params: IntGarchParams) -> bool:
    """True iff mean and covariance are finite and time-invariant: C2 < C1 < 1.

    Boundary equalities count as non-stationary. In particular the all-zero
    coefficient case has C2 = C1 = 0 and returns False even though the
    process degenerates to an i.i.d. sequence; pass allow_degenerate=True to
    the moment formulas to evaluate that case anyway.
    """
    C1 = c1(params)
    return c2(params) < C1 < 1.0


def _check_second_moment(params: IntGarchParams, allow_degenerate: bool) -> tuple:
    C1 = c1(params)
    C2 = c2(params)
    if C2 < C1 < 1.0:
        return C1, C2
    if allow_degenerate and C2 <= C1 < 1.0:
        # boundary C2 == C1 (e.g. all coefficients zero): the closed forms
        # remain non-singular and exact, only the strict gate fails
        return C1, C2
    raise NotWeaklyStationary(
        f"weak stationarity requires C2 < C1 < 1; got C1={C1:.6g}, C2={C2:.6g}"
    )


def mean_h(params: IntGarchParams) -> float:
    """Unconditional mean of the scale: mu / (1 - C1). Any orders."""
    C1 = c1(params)
    if not C1 < 1.0:
        raise NotMeanStationary(f"mean stationarity requires C1 < 1; got C1={C1:.6g}")
    return params.mu / (1.0 - C1)


def mean_r(params: IntGarchParams) -> Interval:
    """Unconditional Aumann mean of the interval: [-k Eh, k Eh]."""
    return Interval(0.0, params.k * mean_h(params))


def second_moment_h(params: IntGarchParams, allow_degenerate: bool = False) -> float:
    """E(h_t^2) = mu^2 (C1 + 1) / ((C2 - 1)(C1 - 1))."""
    C1, C2 = _check_second_moment(params, allow_degenerate)
    return params.mu**2 * (C1 + 1.0) / ((C2 - 1.0) * (C1 - 1.0))


def var_r(params: IntGarchParams, allow_degenerate: bool = False) -> float:
    """Var(r_t) = (1 + k + k^2) E(h^2) - k^2 (E h)^2."""
    k = params.k
    Eh2 = second_moment_h(params, allow_degenerate)
    Eh = mean_h(params)
    return (1.0 + k + k * k) * Eh2 - k * k * Eh * Eh


def h_h_eta(params: IntGarchParams, s: int, allow_degenerate: bool = False) -> float:
    """E(h_t h_{t+s} eta_t) for lag s >= 1, in closed form.

    Uses the simplified expression
        mu^2 k / (C1 - 1) * ( -(C1^s - 1)/(C1 - 1)
            + (C1^s + C1^(s-1))/(C2 - 1) * [a*sqrt(2/pi) + b*(1 + k) + g] ).
    """
    if int(s) != s or s < 1:
        raise InvalidLag(f"lag must be a positive integer, got {s!r}")
    s = int(s)
    a, b, g = _coefs_111(params)
    k = params.k
    C1, C2 = _check_second_moment(params, allow_degenerate)
    bracket = a * SQRT_2_OVER_PI + b * (1.0 + k) + g
    return (
        params.mu**2
        * k
        / (C1 - 1.0)
        * (-(C1**s - 1.0) / (C1 - 1.0) + (C1**s + C1 ** (s - 1)) / (C2 - 1.0) * bracket)
    )


def autocov(params: IntGarchParams, s: int, allow_degenerate: bool = False) -> float:
    """Interval autocovariance Cov(r_t, r_{t+s}); symmetric in s.

    For |s| > 0 the defining expression k E(h_t h_{t+s} eta_t) - k^2 (E h)^2
    collapses algebraically to the geometric sequence

        k^2 C1^(s-1) ( [a*sqrt(2/pi) + b*(1+k) + g] E(h^2) - C1 (E h)^2 ),

    which is what gets evaluated: the two-term form cancels catastrophically
    once C1^s reaches float noise, while the product form decays cleanly.
    """
    s = abs(int(s))
    if s == 0:
        return var_r(params, allow_degenerate)
    a, b, g = _coefs_111(params)
    k = params.k
    C1, _ = _check_second_moment(params, allow_degenerate)
    Eh = mean_h(params)
    Eh2 = second_moment_h(params, allow_degenerate)
    bracket = a * SQRT_2_OVER_PI + b * (1.0 + k) + g
    return k * k * C1 ** (s - 1) * (bracket * Eh2 - C1 * Eh * Eh)


def acf(params: IntGarchParams, s: int, allow_degenerate: bool = False) -> float:
    """Theoretical interval ACF: 1 at lag 0, autocov(s)/autocov(0) otherwise."""
    s = abs(int(s))
    if s == 0:
        # still gate on weak stationarity so non-stationary params fail loudly
        _check_second_moment(params, allow_degenerate)
        return 1.0
    return autocov(params, s, allow_degenerate) / autocov(params, 0, allow_degenerate)


def conditional_volatility_factor(params: IntGarchParams) -> float:
    """Multiplier sqrt(1 + k) mapping the scale h_t to the volatility H_t.

    The conditional variance of the whole interval is h_t^2 (k + 1); as
    k -> 0 the factor tends to 1 and the model collapses to point-valued
    GARCH on the centers.
    """
    return math.sqrt(1.0 + params.k)


@dataclass(frozen=True)
class MomentSummary:
    """Bundle of the closed-form quantities; None where the gate fails."""

    c1: float
    c2: Optional[float]
    eta_x: Optional[float]
    mean_h: Optional[float]
    second_moment_h: Optional[float]
    mean_r: Optional[Interval]
    var_r: Optional[float]
    mean_stationary: bool
    weakly_stationary: bool
    degenerate: bool


def summarize(params: IntGarchParams) -> MomentSummary:
    """Evaluate every closed form that the stationarity gates permit.

    The fully degenerate case (all lag coefficients zero) is reported with
    degenerate=True and its second moments evaluated via the override, since
    the process is a trivially stationary i.i.d. sequence.
    """
    C1 = c1(params)
    try:
        C2 = c2(params)
        ex = eta_x(params)
    except UnsupportedOrder:
        C2 = None
        ex = None
    mean_stat = is_mean_stationary(params)
    weak = C2 is not None and is_weakly_stationary(params)
    degenerate = sum(params.alpha) + sum(params.beta) + sum(params.gamma) == 0.0

    Eh = mean_h(params) if mean_stat else None
    Er = mean_r(params) if mean_stat else None
    Eh2 = None
    Vr = None
    if C2 is not None and (weak or degenerate):
        Eh2 = second_moment_h(params, allow_degenerate=True)
        Vr = var_r(params, allow_degenerate=True)
    return MomentSummary(
        c1=C1,
        c2=C2,
        eta_x=ex,
        mean_h=Eh,
        second_moment_h=Eh2,
        mean_r=Er,
        var_r=Vr,
        mean_stationary=mean_stat,
        weakly_stationary=weak,
        degenerate=degenerate,
    )

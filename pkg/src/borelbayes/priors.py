"""Prior distributions on the reproduction number and their core integrals.

Everything downstream consumes the priors through one operation,
``log_weighted_integral``: the log of the integral of
theta^(x - r + m) * e^(-x*theta) against the prior, for moment shifts
m in {0, 1, 2}.  The m = 1 / m = 0 ratio is the posterior mean, and m = 2
feeds the posterior second moment used by the exact risk sums.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.stats import beta as beta_dist

from .numerics import (
    LOG_ZERO,
    NumericError,
    log_diff_exp,
    log_gamma,
    log_reg_lower_gamma,
)

_QUAD_REL_TOL = 1e-10


@dataclass(frozen=True)
class Prior:
    """A prior on theta: uniform(a, b), beta(v, w), or a finite grid.

    Grid priors exist mainly as cheap exact oracles (point masses and
    piecewise shapes) for testing the integral machinery.
    """

    kind: str
    a: float = 0.0
    b: float = 1.0
    v: float = 1.0
    w: float = 1.0
    thetas: tuple = field(default=())
    weights: tuple = field(default=())

    def __post_init__(self):
        if self.kind == "uniform":
            if not (0.0 <= self.a < self.b <= 1.0):
                raise ValueError(f"uniform prior needs 0 <= a < b <= 1, got ({self.a}, {self.b})")
        elif self.kind == "beta":
            if self.v <= 0.0 or self.w <= 0.0:
                raise ValueError(f"beta prior needs v, w > 0, got ({self.v}, {self.w})")
        elif self.kind == "grid":
            if not self.thetas:
                raise ValueError("grid prior needs at least one atom")
            if len(self.thetas) != len(self.weights):
                raise ValueError("grid prior needs one weight per atom")
            if any(not 0.0 < t < 1.0 for t in self.thetas):
                raise ValueError("grid atoms must lie strictly in (0, 1)")
            if any(w < 0.0 for w in self.weights):
                raise ValueError("grid weights must be nonnegative")
            if abs(sum(self.weights) - 1.0) > 1e-12:
                raise ValueError("grid weights must sum to 1 within 1e-12")
        else:
            raise ValueError(f"unknown prior kind {self.kind!r}")

    @classmethod
    def uniform(cls, a, b):
        return cls(kind="uniform", a=float(a), b=float(b))

    @classmethod
    def beta(cls, v, w):
        return cls(kind="beta", v=float(v), w=float(w))

    @classmethod
    def grid(cls, thetas, weights):
        return cls(kind="grid", thetas=tuple(float(t) for t in thetas),
                   weights=tuple(float(w) for w in weights))

    @classmethod
    def point_mass(cls, theta):
        return cls.grid([theta], [1.0])

    @property
    def support_inf(self):
        if self.kind == "uniform":
            return self.a
        if self.kind == "beta":
            return 0.0
        return min(self.thetas)

    @property
    def support_sup(self):
        if self.kind == "uniform":
            return self.b
        if self.kind == "beta":
            return 1.0
        return max(self.thetas)

    def cap_theta(self, tail_eps):
        """theta bound used when building truncation caps for this prior.

        Supports bounded away from 1 use their supremum.  A beta prior
        touches 1, where no uniform tail bound exists; the cap is then
        anchored at a quantile so far out that the omitted prior mass is
        negligible next to ``tail_eps``.
        """
        if self.kind == "beta":
            return float(beta_dist(self.v, self.w).ppf(1.0 - tail_eps / 10.0))
        return self.support_sup


def _log_integral_uniform(prior, r, x, m):
    k = x - r + m
    la = log_reg_lower_gamma(k + 1.0, prior.b * x)
    lb = log_reg_lower_gamma(k + 1.0, prior.a * x) if prior.a > 0.0 else LOG_ZERO
    try:
        ldiff = log_diff_exp(la, lb)
    except ValueError as exc:
        raise NumericError(
            "incomplete-gamma difference collapsed",
            routine="log_weighted_integral",
            x=x,
            m=m,
        ) from exc
    return -math.log(prior.b - prior.a) + log_gamma(k + 1.0) - (k + 1.0) * math.log(x) + ldiff


def _log_integral_grid(prior, r, x, m):
    k = x - r + m
    terms = [
        math.log(w) + k * math.log(t) - x * t
        for t, w in zip(prior.thetas, prior.weights)
        if w > 0.0
    ]
    if not terms:
        return LOG_ZERO
    top = max(terms)
    return top + math.log(sum(math.exp(t - top) for t in terms))


def _log_integral_beta(prior, r, x, m):
    # Peak-factored adaptive quadrature: the integrand is evaluated relative
    # to its maximum so the quad routine never sees sub-normal magnitudes.
    k = x - r + m
    pv = k + prior.v - 1.0
    pw = prior.w - 1.0
    log_norm = log_gamma(prior.v + prior.w) - log_gamma(prior.v) - log_gamma(prior.w)

    def log_integrand(t):
        if t <= 0.0:
            return LOG_ZERO if pv > 0.0 else (0.0 if pv == 0.0 else math.inf)
        if t >= 1.0:
            return LOG_ZERO if pw > 0.0 else (-x if pw == 0.0 else math.inf)
        return pv * math.log(t) + pw * math.log(1.0 - t) - x * t

    # Interior critical point of the log integrand solves a quadratic.
    peak = 0.5
    if x > 0.0:
        disc = (x + pv + pw) ** 2 - 4.0 * x * pv
        if disc >= 0.0:
            root = ((x + pv + pw) - math.sqrt(disc)) / (2.0 * x)
            if 0.0 < root < 1.0:
                peak = root
    log_peak = max(log_integrand(peak), log_integrand(1e-12), log_integrand(1.0 - 1e-12))

    value, _ = integrate.quad(
        lambda t: math.exp(log_integrand(t) - log_peak),
        0.0,
        1.0,
        points=[peak],
        epsabs=0.0,
        epsrel=_QUAD_REL_TOL,
        limit=200,
    )
    if not value > 0.0 or not math.isfinite(value):
        raise NumericError(
            "beta-prior quadrature failed", routine="log_weighted_integral", x=x, m=m
        )
    return log_norm + log_peak + math.log(value)


def log_weighted_integral(prior, r, x, m):
    """ln of the prior-weighted integral of theta^(x-r+m) * e^(-x*theta).

    m = 0 and m = 1 are the posterior-mean denominator and numerator;
    m = 2 supplies the posterior second moment.  Uniform priors go through
    the regularized incomplete gamma, grid priors through log-sum-exp over
    their atoms, and beta priors through adaptive quadrature.
    """
    if x < r:
        raise ValueError(f"x must be >= r, got x={x}, r={r}")
    if m not in (0, 1, 2):
        raise ValueError(f"moment shift must be 0, 1, or 2, got {m}")
    if prior.kind == "uniform":
        return _log_integral_uniform(prior, r, x, m)
    if prior.kind == "grid":
        return _log_integral_grid(prior, r, x, m)
    return _log_integral_beta(prior, r, x, m)


def sample_theta(prior, rng):
    """One draw of theta from the prior."""
    if prior.kind == "uniform":
        return prior.a + (prior.b - prior.a) * rng.random()
    if prior.kind == "beta":
        return float(rng.beta(prior.v, prior.w))
    cum = np.cumsum(prior.weights)
    idx = int(np.searchsorted(cum, rng.random(), side="left"))
    return prior.thetas[min(idx, len(prior.thetas) - 1)]

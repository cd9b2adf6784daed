"""The Bayes rule for the reproduction number, plus its closed-form twins.

``build_bayes_table`` is the single public path into risk computations:
it tabulates the posterior mean, posterior second moment, and marginal pmf
over one truncated support, so every downstream consumer shares the same
truncation.  The two closed forms (uniform(0,1) and integer-shape beta
priors) are bounded-range cross-checks for the production integral route,
not production paths themselves: their e^x terms lose relative precision
long before the incomplete-gamma route does.
"""

import math
from dataclasses import dataclass

import numpy as np

from .distribution import SupportCap, log_coeff
from .numerics import (
    LOG_ZERO,
    NumericError,
    log_add_exp,
    log_diff_exp,
    log_exp_partial,
    log_gamma,
)
from .priors import Prior, log_weighted_integral

# Relative headroom left in an alternating sum before the result is deemed
# cancelled beyond repair (about 1e6 ulps of the largest side).
_CANCEL_LOG = math.log(1e6)


@dataclass(frozen=True)
class BayesTable:
    """Posterior mean, second moment, and marginal pmf over x = r..cap."""

    r: int
    prior: Prior
    cap: SupportCap
    xs: np.ndarray
    posterior_mean: np.ndarray
    posterior_second: np.ndarray
    marginal: np.ndarray


def posterior_mean(prior, r, x):
    """Posterior mean of theta given one observation x, for any prior."""
    l1 = log_weighted_integral(prior, r, x, 1)
    l0 = log_weighted_integral(prior, r, x, 0)
    return math.exp(l1 - l0)


def _log_tail_factor(j, x):
    # ln(e^x - partial exponential sum through j), flagged when the
    # difference has lost essentially all relative precision.
    lp = log_exp_partial(j, x)
    if lp - float(x) > -1e-10:
        raise NumericError(
            "exponential tail difference cancelled",
            routine="posterior_mean_closed_form",
            j=j,
            x=x,
        )
    return log_diff_exp(float(x), lp)


def posterior_mean_uniform01(r, x):
    """Closed form of the posterior mean under the uniform(0, 1) prior.

    Evaluated in log space from partial exponential sums; intended as a
    test oracle for x up to a few hundred.
    """
    if x < r:
        raise ValueError(f"x must be >= r, got x={x}, r={r}")
    num = _log_tail_factor(x - r + 1, x)
    den = _log_tail_factor(x - r, x)
    return math.exp(math.log(x + 1 - r) - math.log(x) + num - den)


def _log_alternating_sum(x, terms):
    # terms: list of (sign, log magnitude); positive and negative parts are
    # combined once, in log space, to keep the alternating cancellation
    # observable and bounded.
    pos = LOG_ZERO
    neg = LOG_ZERO
    for sign, lt in terms:
        if sign > 0:
            pos = log_add_exp(pos, lt)
        else:
            neg = log_add_exp(neg, lt)
    if neg == LOG_ZERO:
        return pos
    if pos <= neg:
        raise NumericError(
            "alternating sum is not positive", routine="posterior_mean_beta", x=x
        )
    total = log_diff_exp(pos, neg)
    if pos - total > _CANCEL_LOG:
        raise NumericError(
            "alternating sum cancelled catastrophically; use the quadrature path",
            routine="posterior_mean_beta",
            x=x,
        )
    return total


def posterior_mean_beta(v, w, r, x):
    """Closed form of the posterior mean under a beta(v, w) prior.

    Valid only for integer shapes v, w >= 1, where the beta density expands
    into a finite alternating binomial sum.  Test oracle for the general
    quadrature route.
    """
    if int(v) != v or int(w) != w or v < 1 or w < 1:
        raise ValueError(f"closed form needs integer shapes >= 1, got ({v}, {w})")
    if x < r:
        raise ValueError(f"x must be >= r, got x={x}, r={r}")
    v, w = int(v), int(w)
    lx = math.log(x)
    num_terms = []
    den_terms = []
    for k in range(w):
        sign = 1 if k % 2 == 0 else -1
        lchoose = math.log(math.comb(w - 1, k))
        j = x - r + v + k
        num_terms.append((sign, lchoose + log_gamma(j + 1) - (k + 1) * lx + _log_tail_factor(j, x)))
        den_terms.append((sign, lchoose + log_gamma(j) - k * lx + _log_tail_factor(j - 1, x)))
    return math.exp(_log_alternating_sum(x, num_terms) - _log_alternating_sum(x, den_terms))


def build_bayes_table(prior, r, cap):
    """Tabulate the Bayes rule over the truncated support x = r..cap.

    The marginal at x is the coefficient times the m = 0 integral, so the
    table rows are mutually consistent by construction.
    """
    if cap.r != r:
        raise ValueError(f"cap built for r={cap.r}, table requested for r={r}")
    if prior.kind != "beta" and cap.theta_max < prior.support_sup - 1e-15:
        raise ValueError(
            f"cap certified only up to theta={cap.theta_max}, "
            f"prior support reaches {prior.support_sup}"
        )
    xs = np.arange(r, cap.cap + 1)
    mean = np.empty(len(xs))
    second = np.empty(len(xs))
    marginal = np.empty(len(xs))
    for i, x in enumerate(xs):
        x = int(x)
        l0 = log_weighted_integral(prior, r, x, 0)
        l1 = log_weighted_integral(prior, r, x, 1)
        l2 = log_weighted_integral(prior, r, x, 2)
        mean[i] = math.exp(l1 - l0)
        second[i] = math.exp(l2 - l0)
        marginal[i] = math.exp(log_coeff(r, x) + l0)
    return BayesTable(
        r=r,
        prior=prior,
        cap=cap,
        xs=xs,
        posterior_mean=mean,
        posterior_second=second,
        marginal=marginal,
    )

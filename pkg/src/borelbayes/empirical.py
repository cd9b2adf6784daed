"""The empirical Bayes estimator built from past observations.

The rule at x is a clipped ratio of two empirical functionals of the
history: a coefficient-weighted average over observations above x
(estimating the posterior-mean numerator integral) and a coefficient-scaled
frequency at x (estimating the denominator).  Both are computed in log
space; the raw coefficients would overflow linear doubles for observations
beyond a few hundred.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .distribution import log_coeff

QZERO_CONVENTIONS = ("one", "zero", "mle")


@dataclass(frozen=True)
class EBHistory:
    """Past observations with their multiplicities, all >= r."""

    r: int
    values: np.ndarray  # unique observed values, ascending
    counts: np.ndarray  # multiplicity per unique value
    n: int

    @classmethod
    def from_observations(cls, r, observations):
        obs = np.asarray(observations, dtype=np.int64)
        if obs.size == 0:
            raise ValueError("history needs at least one observation")
        if (obs < r).any():
            raise ValueError(f"all observations must be >= r={r}")
        values, counts = np.unique(obs, return_counts=True)
        return cls(r=int(r), values=values, counts=counts, n=int(obs.size))

    def count_at(self, x):
        idx = np.searchsorted(self.values, x)
        if idx < len(self.values) and self.values[idx] == x:
            return int(self.counts[idx])
        return 0


@dataclass(frozen=True)
class EstimatorTable:
    """A finite decision rule: one estimate in [0, 1] per x = r..cap.

    The common currency of the Bayes, EB, monotone-EB, and MLE rules.
    """

    r: int
    cap: int
    values: np.ndarray
    label: str
    meta: dict = field(default_factory=dict)

    @property
    def xs(self):
        return np.arange(self.r, self.cap + 1)

    def value_at(self, x):
        if not self.r <= x <= self.cap:
            raise ValueError(f"x={x} outside table domain [{self.r}, {self.cap}]")
        return float(self.values[x - self.r])


def _log_coeff_one(y):
    # ln c for the single-ancestor coefficient: y^(y-2) / (y-1)!
    y = np.asarray(y, dtype=np.float64)
    return np.where(y == 1, 0.0, (y - 2) * np.log(y) - gammaln(y))


def _log_coeff_r(r, y):
    y = np.asarray(y, dtype=np.float64)
    return np.where(y == r, 0.0, math.log(r) + (y - r - 1) * np.log(y) - gammaln(y - r + 1))


def eb_numerator(history, x):
    """Average of the shifted coefficient ratio over observations above x.

    Zero when nothing in the history exceeds x.
    """
    if x < history.r:
        raise ValueError(f"x must be >= r, got x={x}, r={history.r}")
    mask = history.values >= x + 1
    if not mask.any():
        return 0.0
    ys = history.values[mask]
    lw = _log_coeff_one(ys - x) - _log_coeff_r(history.r, ys) + np.log(history.counts[mask])
    return math.exp(logsumexp(lw) - math.log(history.n))


def eb_denominator(history, x):
    """Coefficient-scaled relative frequency of the history at x."""
    if x < history.r:
        raise ValueError(f"x must be >= r, got x={x}, r={history.r}")
    c = history.count_at(x)
    if c == 0:
        return 0.0
    return math.exp(math.log(c) - math.log(history.n) - log_coeff(history.r, x))


def eb_table(history, cap, qzero="one"):
    """The clipped-ratio EB rule tabulated over x = r..cap.

    Points never observed make the ratio 0/0; the ``qzero`` convention
    decides their value: "one" (the limit of the clipped ratio as the
    frequency vanishes with a positive numerator, and the default), "zero",
    or "mle" (the maximum-likelihood fallback (x-r)/x).  The choice is
    recorded in the table metadata.
    """
    if qzero not in QZERO_CONVENTIONS:
        raise ValueError(f"qzero must be one of {QZERO_CONVENTIONS}, got {qzero!r}")
    if cap < history.values[-1]:
        raise ValueError(f"cap={cap} below the largest observation {history.values[-1]}")

    r = history.r
    xs = np.arange(r, cap + 1)
    log_n = math.log(history.n)

    # log numerator per x: logsumexp over observations y >= x+1 of
    # ln c1(y-x) - ln cr(y) + ln count(y), minus ln n.
    ys = history.values
    log_cr_y = _log_coeff_r(r, ys) - np.log(history.counts)
    diff = ys[None, :] - xs[:, None]  # (nx, ny)
    with np.errstate(divide="ignore", invalid="ignore"):
        lw = np.where(diff >= 1, _log_coeff_one(np.maximum(diff, 1)) - log_cr_y[None, :], -np.inf)
    log_num = logsumexp(lw, axis=1) - log_n

    counts_at = np.zeros(len(xs))
    counts_at[ys - r] = history.counts
    with np.errstate(divide="ignore"):
        log_den = np.log(counts_at) - log_n - _log_coeff_r(r, xs)

    observed = counts_at > 0
    values = np.empty(len(xs))
    # min(ratio, 1) computed as exp(min(log ratio, 0)) to survive the
    # coefficient magnitudes at large x.
    values[observed] = np.exp(np.minimum(log_num[observed] - log_den[observed], 0.0))
    if qzero == "one":
        values[~observed] = 1.0
    elif qzero == "zero":
        values[~observed] = 0.0
    else:
        values[~observed] = (xs[~observed] - r) / xs[~observed]
    return EstimatorTable(r=r, cap=int(cap), values=values, label="eb", meta={"qzero": qzero})

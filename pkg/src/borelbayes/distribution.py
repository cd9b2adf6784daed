"""The Borel-Tanner law: coefficients, pmf, cdf, truncation, and two samplers.

The distribution lives on x = r, r+1, ... and is parameterized by the number
of ancestors r and the reproduction number theta in (0, 1).  It is the law
of the total progeny of a Galton-Watson process with Poisson(theta)
offspring started from r individuals, which is also what the independent
``sample_branching`` sampler simulates.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .numerics import NumericError, log_gamma

_CAP_SEARCH_LIMIT = 10_000_000
_BRANCHING_TOTAL_LIMIT = 100_000_000

# Truncated tails are certified against this default when risks are summed;
# samplers get by with a looser cap (see DESIGN notes in the README).
RISK_TAIL_EPS = 1e-12
SAMPLER_TAIL_EPS = 1e-9


@dataclass(frozen=True)
class BTParams:
    """One Borel-Tanner law: r ancestors, reproduction number theta.

    theta = 1 is excluded: the critical process has finite total progeny
    almost surely but infinite mean, and no truncation bound exists.
    """

    r: int
    theta: float

    def __post_init__(self):
        if int(self.r) != self.r or self.r < 1:
            raise ValueError(f"r must be a positive integer, got {self.r}")
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie strictly in (0, 1), got {self.theta}")


@dataclass(frozen=True)
class SupportCap:
    """Truncation point with a certified bound on the omitted tail mass.

    ``tail_bound`` upper-bounds 1 - F(cap; theta) for every theta up to
    ``theta_max`` (the family is stochastically increasing in theta).
    """

    r: int
    cap: int
    tail_bound: float
    theta_max: float


def log_coeff(r, x):
    """ln of the combinatorial coefficient r * x^(x-r-1) / (x-r)!."""
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    if x < r:
        raise ValueError(f"x must be >= r, got x={x}, r={r}")
    if x == r:
        return 0.0
    return math.log(r) + (x - r - 1) * math.log(x) - log_gamma(x - r + 1)


def log_pmf(params, x):
    """ln p(x) for one support point of the law ``params``."""
    if x < params.r:
        raise ValueError(f"x must be >= r, got x={x}, r={params.r}")
    return log_coeff(params.r, x) + (x - params.r) * math.log(params.theta) - params.theta * x


def _log_pmf_array(r, theta, xs):
    # Vectorized log pmf over an integer array of support points.
    # theta = 1.0 is tolerated here: the monotonization integrates the
    # action space up to its closed endpoint.
    xs = np.asarray(xs, dtype=np.float64)
    log_c = np.where(
        xs == r,
        0.0,
        math.log(r) + (xs - r - 1) * np.log(xs) - gammaln(xs - r + 1),
    )
    if theta == 1.0:
        return log_c - xs
    return log_c + (xs - r) * math.log(theta) - theta * xs


def pmf_cdf_arrays(r, theta, cap):
    """pmf and running-sum cdf over x = r..cap as float arrays.

    The prefix sum is accumulated in extended precision so the cdf carries
    no visible summation error next to the 1e-12 tail tolerances.
    """
    xs = np.arange(r, cap + 1)
    pmf = np.exp(_log_pmf_array(r, theta, xs))
    cdf = np.cumsum(pmf, dtype=np.longdouble).astype(np.float64)
    return pmf, cdf


def cdf(params, x):
    """F(x) = sum of pmf from r to x; zero below the support."""
    if x < params.r:
        return 0.0
    _, cdf_vals = pmf_cdf_arrays(params.r, params.theta, int(x))
    return float(cdf_vals[-1])


def support_cap(r, theta_max, eps):
    """Smallest cap with certified tail mass <= eps at theta_max.

    The certificate combines the extended-precision partial sum with a
    provable geometric bound on the remainder beyond the scanned range:
    p(k+1)/p(k) <= theta*e^(1-theta) * k/(k+1-r) for every k.
    """
    if not 0.0 < theta_max < 1.0:
        raise ValueError(f"theta_max must lie strictly in (0, 1), got {theta_max}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie strictly in (0, 1), got {eps}")
    if int(r) != r or r < 1:
        raise ValueError(f"r must be a positive integer, got {r}")

    n = max(int(r) + 64, 128)
    while True:
        if n > _CAP_SEARCH_LIMIT:
            raise NumericError(
                "support cap search exceeded its limit",
                routine="support_cap",
                r=r,
                theta_max=theta_max,
                eps=eps,
            )
        xs = np.arange(r, n + 1)
        pmf = np.exp(_log_pmf_array(r, theta_max, xs)).astype(np.longdouble)
        ratio = theta_max * math.exp(1.0 - theta_max) * n / (n + 1 - r)
        if ratio < 1.0 and pmf[-1] * ratio / (1.0 - ratio) <= eps / 2.0:
            remainder = float(pmf[-1] * ratio / (1.0 - ratio))
            # tail(x) = sum of pmf beyond x plus the remainder bound
            tail = np.cumsum(pmf[::-1])[::-1] - pmf + remainder
            ok = tail <= eps
            if ok.any():
                idx = int(np.argmax(ok))
                return SupportCap(
                    r=int(r),
                    cap=int(xs[idx]),
                    tail_bound=float(tail[idx]),
                    theta_max=float(theta_max),
                )
        n *= 2


class InverseSampler:
    """Inverse-cdf sampler on a truncated support with a cached prefix table.

    Draws that fall beyond the truncated table are clamped to the cap and
    counted in ``truncations`` so the approximation stays auditable.
    """

    def __init__(self, params, tail_eps=SAMPLER_TAIL_EPS, cap=None):
        self.params = params
        if cap is None:
            cap = support_cap(params.r, params.theta, tail_eps).cap
        self.cap = int(cap)
        _, self._cdf = pmf_cdf_arrays(params.r, params.theta, self.cap)
        self.truncations = 0

    def sample(self, rng):
        """One draw: smallest x with F(x) >= U for U uniform on (0, 1)."""
        u = rng.random()
        idx = int(np.searchsorted(self._cdf, u, side="left"))
        if idx >= len(self._cdf):
            self.truncations += 1
            return self.cap
        return self.params.r + idx

    def sample_many(self, rng, size):
        """Vectorized draws, with the same truncation accounting."""
        u = rng.random(size)
        idx = np.searchsorted(self._cdf, u, side="left")
        overflow = idx >= len(self._cdf)
        self.truncations += int(overflow.sum())
        idx = np.where(overflow, len(self._cdf) - 1, idx)
        return self.params.r + idx


def sample_inverse(params, rng, tail_eps=SAMPLER_TAIL_EPS):
    """One inverse-cdf draw with a throwaway table; see ``InverseSampler``."""
    return InverseSampler(params, tail_eps=tail_eps).sample(rng)


def sample_branching(params, rng):
    """Total progeny of a Galton-Watson process with Poisson offspring.

    Generation sizes are advanced with one Poisson(theta * size) draw per
    generation, which by Poisson additivity is the same law as drawing each
    individual's offspring separately.  Serves as the distribution oracle
    for the inverse-cdf sampler.
    """
    alive = params.r
    total = params.r
    while alive > 0:
        alive = int(rng.poisson(params.theta * alive))
        total += alive
        if total > _BRANCHING_TOTAL_LIMIT:
            raise NumericError(
                "branching population exceeded its limit",
                routine="sample_branching",
                r=params.r,
                theta=params.theta,
            )
    return total

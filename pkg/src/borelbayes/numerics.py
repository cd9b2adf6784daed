"""Log-space special functions underpinning every probability computation.

Probability-like magnitudes travel through this package as natural logs and
are exponentiated only at module boundaries: the Borel-Tanner coefficients
span hundreds of orders of magnitude, so linear-space arithmetic overflows
long before the truncated supports end.  ``LOG_ZERO`` (``-inf``) is the log
of an exact zero; IEEE arithmetic gives it the right algebra for free
(it annihilates log-space products and is the identity of ``logaddexp``).
"""

import math

LOG_ZERO = float("-inf")

# Iteration policy for the incomplete-gamma series/continued fraction:
# exhaustion of the cap is a hard error, never a silent partial result.
_MAX_ITER = 10_000
_REL_EPS = 1e-15


class NumericError(ArithmeticError):
    """An iterative routine failed to deliver its accuracy contract.

    Carries the offending routine name and arguments so the CLI can report
    where a computation died (exit code 2).
    """

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = dict(context)

    def __str__(self):
        base = super().__str__()
        if self.context:
            detail = ", ".join(f"{k}={v}" for k, v in sorted(self.context.items()))
            return f"{base} [{detail}]"
        return base


def log_gamma(z):
    """Natural log of the gamma function for z > 0.

    Thin validating wrapper over libm's ``lgamma``, which meets the 1e-12
    relative-error budget over the range this package uses.
    """
    if z <= 0.0:
        raise ValueError(f"log_gamma requires z > 0, got {z}")
    return math.lgamma(z)


def log_add_exp(la, lb):
    """ln(e^la + e^lb) without overflow; LOG_ZERO is the additive identity."""
    if la == LOG_ZERO:
        return lb
    if lb == LOG_ZERO:
        return la
    if la < lb:
        la, lb = lb, la
    return la + math.log1p(math.exp(lb - la))


def log_diff_exp(la, lb):
    """ln(e^la - e^lb) for la > lb, in a log1p-stable form.

    ``lb == LOG_ZERO`` subtracts an exact zero.  ``la <= lb`` is a domain
    error: a nonpositive difference here always means a cancellation bug
    upstream, so it must not pass silently.
    """
    if lb == LOG_ZERO:
        return la
    if not la > lb:
        raise ValueError(f"log_diff_exp requires la > lb, got la={la}, lb={lb}")
    return la + math.log1p(-math.exp(lb - la))


def log_exp_partial(j, x):
    """ln of the partial exponential sum over x^k/k! for k = 0..j.

    Pure log-space accumulation, so there is no overflow even when x runs
    to several thousand.
    """
    if j < 0:
        raise ValueError(f"log_exp_partial requires j >= 0, got {j}")
    if x < 0:
        raise ValueError(f"log_exp_partial requires x >= 0, got {x}")
    if x == 0.0 or j == 0:
        return 0.0
    lx = math.log(x)
    total = 0.0  # k = 0 term
    term = 0.0
    for k in range(1, j + 1):
        term += lx - math.log(k)
        total = log_add_exp(total, term)
    return total


def _log_lower_series(s, x):
    # P(s,x) = x^s e^{-x} / Gamma(s+1) * sum_{n>=0} x^n / ((s+1)...(s+n)),
    # terms strictly decreasing for x < s+1.
    total = 1.0
    term = 1.0
    denom = s
    for _ in range(_MAX_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if term < total * _REL_EPS:
            return s * math.log(x) - x - math.lgamma(s + 1.0) + math.log(total)
    raise NumericError(
        "incomplete gamma series did not converge", routine="reg_lower_gamma", s=s, x=x
    )


def _log_upper_cf(s, x):
    # Q(s,x) = x^s e^{-x} / Gamma(s) * CF, evaluated by modified Lentz.
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _REL_EPS:
            return s * math.log(x) - x - math.lgamma(s) + math.log(h)
    raise NumericError(
        "incomplete gamma continued fraction did not converge",
        routine="reg_lower_gamma",
        s=s,
        x=x,
    )


def log_reg_lower_gamma(s, x):
    """ln P(s, x), the log of the regularized lower incomplete gamma.

    Series expansion for x < s+1, Lentz continued fraction for x >= s+1,
    both in log space.  Returns ``LOG_ZERO`` at x = 0.
    """
    if s <= 0.0:
        raise ValueError(f"reg_lower_gamma requires s > 0, got s={s}")
    if x < 0.0:
        raise ValueError(f"reg_lower_gamma requires x >= 0, got x={x}")
    if x == 0.0:
        return LOG_ZERO
    if x < s + 1.0:
        return _log_lower_series(s, x)
    lq = _log_upper_cf(s, x)
    if lq >= 0.0:
        # Q must be < 1 on the continued-fraction branch.
        raise NumericError(
            "upper incomplete gamma exceeded 1", routine="reg_lower_gamma", s=s, x=x
        )
    return math.log1p(-math.exp(lq))


def reg_lower_gamma(s, x):
    """Regularized lower incomplete gamma P(s, x) in [0, 1]."""
    p = math.exp(log_reg_lower_gamma(s, x))
    return min(p, 1.0)

"""Log-space evaluation of the counting moments of balanced independent sets.

All binomial products are evaluated as sums of log-gamma terms, and the
second-moment double sum is reduced with max-shifted exponentiation, so the
formulas stay exact to near machine precision at any n.

The formulas take an integer split: alpha must make alpha*gamma and
alpha*(1-gamma) whole. For gamma = g/h in lowest terms the feasible alphas
are the multiples of h; helpers are provided to round a requested real alpha
to the nearest feasible integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .params import log_base_b, small_fraction


def _lchoose(n: int, k: int) -> float:
    if not 0 <= k <= n:
        raise ConfigError(f"binomial index out of range: C({n}, {k})")
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _check_probability(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise ConfigError(f"moment formulas need p in (0, 1), got {p}")


def split_of(gamma: float, alpha: int) -> tuple[int, int]:
    """(alpha*gamma, alpha*(1-gamma)) as integers, or an error naming the
    offending product."""
    if alpha < 0:
        raise ConfigError(f"alpha must be nonnegative, got {alpha}")
    frac = small_fraction(gamma)
    if frac is not None:
        g, h = frac.numerator, frac.denominator
        if (alpha * g) % h:
            raise ConfigError(
                f"alpha*gamma = {alpha}*{gamma} is not an integer; "
                f"alpha must be a multiple of {h}"
            )
        l = alpha * g // h
        return l, alpha - l
    l = alpha * gamma
    if abs(l - round(l)) > 1e-9:
        raise ConfigError(f"alpha*gamma = {l!r} is not an integer")
    l = round(l)
    return l, alpha - l


def feasible_alpha(gamma: float, alpha_real: float) -> int:
    """Nearest feasible integer alpha (ties round down)."""
    frac = small_fraction(gamma)
    h = frac.denominator if frac is not None else None
    if h is None:
        raise ConfigError(
            f"gamma = {gamma} does not match a small rational; pass a feasible alpha explicitly"
        )
    k = alpha_real / h
    lo, hi = math.floor(k) * h, math.ceil(k) * h
    candidate = lo if alpha_real - lo <= hi - alpha_real else hi
    return max(h, candidate)


def integerized_alpha_epsilon(n: int, p: float, gamma: float, epsilon: float) -> int:
    """The integer near-threshold size (1-epsilon) * alpha_stat, rounded to a
    feasible split."""
    _check_probability(p)
    alpha_stat = log_base_b(n, p) / (gamma * (1.0 - gamma))
    return feasible_alpha(gamma, (1.0 - epsilon) * alpha_stat)


def log_first_moment(n: int, p: float, gamma: float, alpha: int) -> float:
    """ln of the expected number of gamma-balanced independent sets of size
    alpha whose gamma-fraction lies on the L side:
    C(n, alpha*gamma) * C(n, alpha*(1-gamma)) * (1-p)^(gamma*(1-gamma)*alpha^2).
    """
    _check_probability(p)
    l, r = split_of(gamma, alpha)
    if l > n or r > n:
        raise ConfigError(f"split ({l}, {r}) exceeds n = {n}")
    return _lchoose(n, l) + _lchoose(n, r) + l * r * math.log1p(-p)


def second_moment_ratio(n: int, p: float, gamma: float, epsilon: float) -> float:
    """E[Z^2] / E[Z]^2 at the integerized near-threshold size.

    Exact finite-n value of the overlap double sum: the (i1, i2) term is the
    product of two hypergeometric weights times b^(i1*i2).
    """
    alpha = integerized_alpha_epsilon(n, p, gamma, epsilon)
    return second_moment_ratio_at(n, p, gamma, alpha)


def second_moment_ratio_at(n: int, p: float, gamma: float, alpha: int) -> float:
    _check_probability(p)
    l, r = split_of(gamma, alpha)
    if l > n or r > n:
        raise ConfigError(f"split ({l}, {r}) exceeds n = {n}")
    ln_b = -math.log1p(-p)
    wl = _hypergeom_log_weights(n, l)
    wr = _hypergeom_log_weights(n, r)
    terms = [
        wl[i1] + wr[i2] + i1 * i2 * ln_b
        for i1 in range(l + 1)
        for i2 in range(r + 1)
        if wl[i1] > -math.inf and wr[i2] > -math.inf
    ]
    shift = max(terms)
    return math.exp(shift) * sum(math.exp(t - shift) for t in terms)


def _hypergeom_log_weights(n: int, k: int) -> list[float]:
    """log of C(k, i) * C(n-k, k-i) / C(n, k) for i = 0..k (sums to 1).

    Overlap classes that cannot occur (k - i > n - k) get weight -inf.
    """
    base = _lchoose(n, k)
    out = []
    for i in range(k + 1):
        if k - i > n - k:
            out.append(-math.inf)
        else:
            out.append(_lchoose(k, i) + _lchoose(n - k, k - i) - base)
    return out


def overlap_exponent(
    n: int, p: float, gamma: float, epsilon: float, i1: int, i2: int, *, log: bool = False
) -> float:
    """Decay factor of the (i1, i2) overlap class against the independent case:

        q(i1, i2) = exp(-i1*(ln n - 2 ln l) - i2*(ln n - 2 ln r) + i1*i2*ln b)

    with (l, r) the integer split of the near-threshold size. q(0, 0) = 1.
    """
    alpha = integerized_alpha_epsilon(n, p, gamma, epsilon)
    l, r = split_of(gamma, alpha)
    if not 0 <= i1 <= l:
        raise ConfigError(f"i1 must lie in [0, {l}], got {i1}")
    if not 0 <= i2 <= r:
        raise ConfigError(f"i2 must lie in [0, {r}], got {i2}")
    ln_n = math.log(n)
    ln_b = -math.log1p(-p)
    log_q = i1 * i2 * ln_b
    if i1:
        log_q -= i1 * (ln_n - 2.0 * math.log(l))
    if i2:
        log_q -= i2 * (ln_n - 2.0 * math.log(r))
    return log_q if log else math.exp(log_q)


def exponent_grid(n: int, p: float, gamma: float, epsilon: float) -> dict[tuple[int, int], float]:
    """q over the full overlap range 0 <= i1 <= l, 0 <= i2 <= r."""
    alpha = integerized_alpha_epsilon(n, p, gamma, epsilon)
    l, r = split_of(gamma, alpha)
    return {
        (i1, i2): overlap_exponent(n, p, gamma, epsilon, i1, i2)
        for i1 in range(l + 1)
        for i2 in range(r + 1)
    }


def first_moment_crossing(n: int, p: float, gamma: float, threshold: float) -> int:
    """Smallest feasible alpha with E[Z_alpha] <= threshold, scanning upward."""
    _check_probability(p)
    if threshold <= 0:
        raise ConfigError(f"threshold must be positive, got {threshold}")
    frac = small_fraction(gamma)
    if frac is None:
        raise ConfigError(f"gamma = {gamma} does not match a small rational")
    h = frac.denominator
    log_threshold = math.log(threshold)
    alpha = h
    while True:
        l, r = split_of(gamma, alpha)
        if l > n or r > n:
            raise ConfigError(
                f"no feasible alpha with E <= {threshold} before the split exceeded n = {n}"
            )
        if log_first_moment(n, p, gamma, alpha) <= log_threshold:
            return alpha
        alpha += h


@dataclass(frozen=True)
class MomentReport:
    """Bundle of the moment quantities at one parameter point."""

    n: int
    p: float
    gamma: float
    epsilon: float
    alpha: int
    log_first_moment: float
    ratio: float
    q_grid: dict[tuple[int, int], float] = field(repr=False)
    crossing_alpha: int = 0


def build_moment_report(
    n: int,
    p: float,
    gamma: float,
    epsilon: float,
    alpha: int | None = None,
    threshold: float = 1.0,
) -> MomentReport:
    if alpha is None:
        alpha = integerized_alpha_epsilon(n, p, gamma, epsilon)
    return MomentReport(
        n=n,
        p=p,
        gamma=gamma,
        epsilon=epsilon,
        alpha=alpha,
        log_first_moment=log_first_moment(n, p, gamma, alpha),
        ratio=second_moment_ratio(n, p, gamma, epsilon),
        q_grid=exponent_grid(n, p, gamma, epsilon),
        crossing_alpha=first_moment_crossing(n, p, gamma, threshold),
    )

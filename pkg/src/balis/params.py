"""Model parameters, the balancedness predicate, and threshold arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ConfigError

# gamma values that match a rational with denominator up to this bound get an
# exact integer-arithmetic balancedness check; everything else falls back to
# strict float comparison with no tolerance band.
_RATIONAL_MAX_DEN = 64

_SNAP = 1e-9


def small_fraction(x: float) -> Fraction | None:
    """The rational with denominator <= 64 equal to ``x`` as a float, if any."""
    if not 0 < x < 1:
        return None
    f = Fraction(x).limit_denominator(_RATIONAL_MAX_DEN)
    return f if float(f) == x else None


def snap_floor(x: float) -> int:
    """floor(x), except values within 1e-9 of an integer snap to it first.

    Threshold formulas mix logs and products whose real value is often an
    exact integer; this keeps float noise from knocking the floor down by one.
    """
    r = round(x)
    if abs(x - r) <= _SNAP * max(1.0, abs(x)):
        return int(r)
    return math.floor(x)


def is_gamma_balanced(l_count: int, r_count: int, gamma: float) -> bool:
    """True iff |l - gamma*(l+r)| < 1 or |r - gamma*(l+r)| < 1.

    Accepts any gamma in (0, 1) so the predicate can be evaluated with the
    sides swapped; :class:`Params` itself enforces gamma <= 1/2.
    """
    if l_count < 0 or r_count < 0:
        raise ConfigError("side counts must be nonnegative")
    if not 0 < gamma < 1:
        raise ConfigError(f"gamma must lie in (0, 1), got {gamma}")
    total = l_count + r_count
    frac = small_fraction(gamma)
    if frac is not None:
        g, h = frac.numerator, frac.denominator
        return abs(l_count * h - g * total) < h or abs(r_count * h - g * total) < h
    target = gamma * total
    return abs(l_count - target) < 1.0 or abs(r_count - target) < 1.0


@dataclass(frozen=True)
class Params:
    """Problem parameters: side size n, edge probability p, balance fraction
    gamma, slack epsilon, and the stopping-time slack mu (default epsilon^2/2)."""

    n: int
    p: float
    gamma: float
    epsilon: float
    mu: float | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"p must lie in [0, 1], got {self.p}")
        if not 0 < self.gamma:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if self.gamma > 0.5:
            raise ConfigError(
                f"gamma = {self.gamma} > 1/2: swap the roles of the two sides "
                f"and use gamma' = {1 - self.gamma}"
            )
        if not 0 < self.epsilon < 1:
            raise ConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.mu is None:
            object.__setattr__(self, "mu", self.epsilon**2 / 2)
        if not 0 < self.mu < 1:
            raise ConfigError(f"mu must lie in (0, 1), got {self.mu}")

    @property
    def b(self) -> float:
        """Logarithm base 1/(1-p); defined for p < 1 only."""
        if self.p >= 1.0:
            raise ConfigError("b = 1/(1-p) is undefined at p = 1")
        return 1.0 / (1.0 - self.p)


def log_base_b(n: int, p: float) -> float:
    """log of n in base 1/(1-p); exact for the power-of-two p = 1/2 cases."""
    if not 0.0 < p < 1.0:
        raise ConfigError(f"log base 1/(1-p) needs p in (0, 1), got {p}")
    return math.log2(n) / math.log2(1.0 / (1.0 - p))


@dataclass(frozen=True)
class Thresholds:
    """Size targets derived from the parameters.

    alpha_stat is the existence threshold, alpha_comp the online-achievable
    threshold; t1/t2 are the integer stage targets of the two-stage greedy,
    and tau_target the per-side count that triggers the stopping time.
    """

    alpha_stat: float
    alpha_comp: float
    t1: int
    t2: int
    tau_target: int


def compute_thresholds(params: Params) -> Thresholds:
    n, p, gamma = params.n, params.p, params.gamma
    if n < 2:
        raise ConfigError(f"thresholds need n >= 2, got {n}")
    if not 0.0 < p < 1.0:
        raise ConfigError(f"thresholds need p in (0, 1), got {p}")
    logb = log_base_b(n, p)
    alpha_stat = logb / (gamma * (1.0 - gamma))
    alpha_comp = logb / gamma
    t1 = max(1, snap_floor((1.0 - params.epsilon) * logb))
    t2 = _stage_two_target(t1, gamma)
    tau_target = max(1, snap_floor((1.0 - params.mu) * logb))
    return Thresholds(alpha_stat, alpha_comp, t1, t2, tau_target)


def _stage_two_target(t1: int, gamma: float) -> int:
    """Largest r <= floor(((1-gamma)/gamma) * t1) with (t1, r) gamma-balanced."""
    r = snap_floor(((1.0 - gamma) / gamma) * t1)
    while r >= 1:
        if is_gamma_balanced(t1, r, gamma):
            return r
        r -= 1
    raise ConfigError(
        f"no stage-two target r >= 1 is gamma-balanced with t1 = {t1} at gamma = {gamma}"
    )

"""Dictionary sizes that guarantee the optimal greedy rate.

All sizes scale with an unspecified rate constant ``C`` that the caller
supplies (default 1).  The rate exponent for ReLU^k in d dimensions is
``1/2 + (2k+1)/(2d)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def unit_ball_volume(d: int) -> float:
    """Volume of the Euclidean unit ball in R^d."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def lipschitz_bound(k: int, d: int) -> float:
    """Upper bound on the L2 Lipschitz modulus of (angles, bias) -> neuron.

    Valid on [0,1]^d with bias range ``[-sqrt d, sqrt d]``.
    """
    if k < 1 or d < 1:
        raise ValueError("need k >= 1 and d >= 1")
    return k * (2 * math.sqrt(d)) ** (k - 1) * math.sqrt(d / 3 + 1)


def rate_exponent(k: int, d: int, m: int = 0) -> float:
    """Exponent ``1/2 + (2(k-m)+1)/(2d)`` of the optimal H^m rate."""
    return 0.5 + (2 * (k - m) + 1) / (2 * d)


def param_volume(d: int, c1: float | None = None, c2: float | None = None) -> float:
    c1 = -math.sqrt(d) if c1 is None else c1
    c2 = math.sqrt(d) if c2 is None else c2
    return 2 * math.pi ** (d - 1) * (c2 - c1)


@dataclass(frozen=True)
class BoundsInput:
    """Inputs of the size bounds.

    ``r_volume`` and ``lip`` default to the unit-cube setting with bias range
    ``[-sqrt d, sqrt d]``.  ``delta`` only enters the deterministic bound.
    """

    n: int
    gamma: float
    eta: float = 0.1
    k: int = 1
    d: int = 1
    C: float = 1.0
    delta: float = 1.0
    r_volume: float | None = None
    lip: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if self.k < 1 or self.d < 1:
            raise ValueError("need k >= 1 and d >= 1")
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.delta < 1:
            raise ValueError("delta must be >= 1")
        if self.lip is not None and self.lip <= 0:
            raise ValueError("lip must be positive")
        if self.r_volume is not None and self.r_volume <= 0:
            raise ValueError("r_volume must be positive")

    @property
    def R(self) -> float:
        return param_volume(self.d) if self.r_volume is None else self.r_volume

    @property
    def L(self) -> float:
        return lipschitz_bound(self.k, self.d) if self.lip is None else self.lip

    @property
    def growth(self) -> float:
        """``n^((1/2 + (2k+1)/(2d)) d)``."""
        return self.n ** (rate_exponent(self.k, self.d) * self.d)


def required_size_deterministic(p: BoundsInput) -> float:
    """Grid size above which the discrete OGA realizes a gamma-weak OGA."""
    g = p.gamma / (1 - p.gamma)
    return p.R * (g * p.delta * math.sqrt(p.d) * p.L / (2 * p.C)) ** p.d * p.growth


def covering_lower_bound(p: BoundsInput) -> float:
    """Fewest balls of the required radius that can cover the parameter box."""
    g = p.gamma / (1 - p.gamma)
    return p.R / unit_ball_volume(p.d) * (g * p.L / p.C) ** p.d * p.growth


def required_size_randomized(p: BoundsInput) -> float:
    """Sample size giving a gamma-weak OGA with probability ``1 - eta``.

    Equals :func:`covering_lower_bound` times ``log(n / eta)``.
    """
    return covering_lower_bound(p) * math.log(p.n / p.eta)


def size_ratio_bound(d: int, n: int, eta: float) -> float:
    """Upper bound on randomized / deterministic size, ``(2/sqrt d)^d log(n/eta) / V_d``.

    For large d this behaves like ``sqrt(pi d) (2/(pi e))^(d/2) log(n/eta)``,
    i.e. it shrinks by a factor ``sqrt(2/(pi e)) ~ 0.484`` per dimension.
    """
    if d < 1 or n < 1 or not 0 < eta < 1:
        raise ValueError("need d >= 1, n >= 1, 0 < eta < 1")
    return (2 / math.sqrt(d)) ** d / unit_ball_volume(d) * math.log(n / eta)


def size_ratio_asymptotic(d: int, n: int, eta: float) -> float:
    """Stirling form of :func:`size_ratio_bound`."""
    return math.sqrt(math.pi * d) * (2 / (math.pi * math.e)) ** (d / 2) * math.log(n / eta)


#: per-dimension decay factor of the size ratio
RATIO_DECAY = math.sqrt(2 / (math.pi * math.e))

"""Clock chain model: full-rate sample edges from the divided half-rate clock.

Deterministic displacement has two components tied to the quarter-rate
mux architecture: a period-2 term from residual duty-cycle error after
correction and a period-4 term from residual quadrature error. Random
jitter is white Gaussian, generated from an explicit seed.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, InvalidDivisor

VALID_DIVISORS = (2, 4, 8, 16, 32)

# period-4 quadrature displacement pattern, zero mean over any 4 edges
_QUAD_PATTERN = np.array([0.5, 0.5, -0.5, -0.5])


@dataclass(frozen=True)
class ClockConfig:
    sample_rate: float
    duty_cycle_error: float = 0.0  # fraction of UI, period-2
    quadrature_error: float = 0.0  # fraction of UI, period-4
    rj_sigma: float = 0.0  # seconds
    rng_seed: int = 0

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise InvalidConfig("sample_rate must be positive")
        if abs(self.duty_cycle_error) >= 0.5:
            raise InvalidConfig("|duty_cycle_error| must be < 0.5 UI")
        if abs(self.quadrature_error) >= 0.5:
            raise InvalidConfig("|quadrature_error| must be < 0.5 UI")
        if self.rj_sigma < 0:
            raise InvalidConfig("rj_sigma must be >= 0")

    @property
    def period(self) -> float:
        return 1.0 / self.sample_rate


@dataclass(frozen=True)
class EdgeSchedule:
    edge_times: np.ndarray
    nominal_period: float


def derive_edges(n: int, cfg: ClockConfig) -> EdgeSchedule:
    """Edge times for n full-rate samples.

    edge_k = k*T + duty*T*(-1)^k + quad*T*q(k) + N(0, rj_sigma), with
    q the zero-mean period-4 pattern (+1,+1,-1,-1)/2. Deterministic for
    a fixed seed.
    """
    if n < 1:
        raise InvalidConfig("need at least one edge")
    if abs(cfg.duty_cycle_error) + abs(cfg.quadrature_error) >= 0.5:
        raise InvalidConfig("combined |duty| + |quad| displacement must be < 0.5 UI")

    t_ui = cfg.period
    k = np.arange(n)
    dj = cfg.duty_cycle_error * t_ui * (-1.0) ** k
    dj += cfg.quadrature_error * t_ui * _QUAD_PATTERN[k % 4]
    times = k / cfg.sample_rate + dj  # k/rate, not k*(1/rate): exact when dj = 0
    if cfg.rj_sigma > 0:
        rng = np.random.default_rng(cfg.rng_seed)
        times = times + rng.normal(0.0, cfg.rj_sigma, n)
    return EdgeSchedule(edge_times=times, nominal_period=t_ui)


def subrate_indices(rate_divisor: int, n: int) -> np.ndarray:
    """Full-rate edge indices on which the divided clock toggles.

    The divided clock toggles every divisor/2 full-rate edges, starting
    at edge 0.
    """
    if rate_divisor not in VALID_DIVISORS:
        raise InvalidDivisor(f"divisor must be one of {VALID_DIVISORS}")
    if n < 1:
        raise InvalidConfig("need at least one edge")
    return np.arange(0, n, rate_divisor // 2)

"""Log-space evaluators for the closed-form failure bounds.

Every evaluator returns a LogProb holding the natural log of the bound.
Bounds here can exceed 1 (the comparison harness flags those as vacuous
instead of celebrating a meaningless PASS).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class LogProb:
    log_value: float

    @property
    def linear(self) -> float:
        """Clamped to 1; use log_value when the scale matters."""
        return min(1.0, math.exp(min(self.log_value, 0.0)))

    @property
    def vacuous(self) -> bool:
        return self.log_value >= 0.0

    def __mul__(self, other: "LogProb") -> "LogProb":
        return LogProb(self.log_value + other.log_value)

    def __pow__(self, exponent: float) -> "LogProb":
        return LogProb(self.log_value * exponent)

    def __le__(self, other: "LogProb") -> bool:
        return self.log_value <= other.log_value

    def __repr__(self) -> str:
        return f"LogProb(log={self.log_value:.6g}, linear={self.linear:.6g})"


def bound_single_sl(p: float, k: int, t: int) -> LogProb:
    """(2 p k 2^k)^t for depth >= t after a uniform restriction."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0,1]")
    if k < 1 or t < 1:
        raise ValueError("k and t must be >= 1")
    if p == 0:
        return LogProb(-math.inf)
    return LogProb(t * (math.log(2) + math.log(p) + math.log(k) + k * math.log(2)))


def bound_path_tail(p: float, k: int, t: int, m: int = 1) -> LogProb:
    """Tail of the star count over m random paths in k-clipped trees.

    m = 1 uses the sharper (p k 2^k)^t; the general form is (30 p k 2^2k)^t.
    """
    if m > t:
        raise ValueError("requires m <= t")
    if p == 0:
        return LogProb(-math.inf)
    if m == 1:
        return LogProb(t * (math.log(p) + math.log(k) + k * math.log(2)))
    return LogProb(t * (math.log(30) + math.log(p) + math.log(k) + 2 * k * math.log(2)))


def bound_multi_uniform(s: int, ell: int, p: float, k: int, t: int) -> LogProb:
    """s^ceil(t/l) (8 p k 2^k)^t for the uniform common-tree depth event.

    The statement rounds the union-bound exponent up; the proof's final line
    uses t/l.  The weaker stated form is evaluated.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if p == 0:
        return LogProb(-math.inf)
    union = math.ceil(t / ell) * math.log(s) if s >= 1 else -math.inf
    per = t * (math.log(8) + math.log(p) + math.log(k) + k * math.log(2))
    return LogProb(union + per)


def grid_msl_subfamily_factor(k: int, delta: int, t: int) -> LogProb:
    """(305 k 2^2k / Delta)^(t/8), the per-subfamily grid factor."""
    return LogProb((t / 8) * (math.log(305) + math.log(k)
                              + 2 * k * math.log(2) - math.log(delta)))


def bound_grid_msl(s: int, ell: int, k: int, delta: int, t: int) -> LogProb:
    """Union bound s^ceil(t/l) times the per-subfamily grid factor."""
    if ell > k:
        raise ValueError("the grid bound assumes ell <= k")
    if ell < 1:
        raise ValueError("ell must be >= 1")
    union = math.ceil(t / ell) * math.log(s) if s >= 1 else -math.inf
    return LogProb(union + grid_msl_subfamily_factor(k, delta, t).log_value)


def bound_negbin_moment(q: float, s: int, t: int) -> float:
    """log of (10 t/(s q))^s (t/q)^t, a t-th moment bound for the trial
    count before s successes at rate q <= 1/2."""
    if not 0 < q <= 0.5:
        raise ValueError("q must lie in (0, 1/2]")
    if s < 1 or t < 1:
        raise ValueError("s and t must be >= 1")
    return s * math.log(10 * t / (s * q)) + t * math.log(t / q)


def bound_geo_sum(p: float, n: int, d: float, simplified: bool = False) -> LogProb:
    """exp(-d n (1 - 1/d)^2 / 2) for a geometric sum exceeding d times its
    mean; the d >= 2 simplification is exp(-d n / 8)."""
    if d <= 1:
        raise ValueError("d must exceed 1")
    if simplified:
        if d < 2:
            raise ValueError("the simplified form needs d >= 2")
        return LogProb(-d * n / 8)
    return LogProb(-d * n * (1 - 1 / d) ** 2 / 2)

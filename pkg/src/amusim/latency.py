"""Far-memory latency models.

Far-memory access latency is widely distributed (hundreds of nanoseconds to
tens of microseconds), so nodes are parameterized with a distribution rather
than a single number. Sampling is a pure function of (distribution params,
RNG state): the same seeded generator always yields the same sequence, which
is what makes whole runs reproducible.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Union

from .errors import BadParams


@dataclass(frozen=True)
class Constant:
    """Degenerate distribution; every sample equals ``value`` ns."""

    value: int

    def __post_init__(self) -> None:
        if self.value < 0:
            raise BadParams(f"constant latency must be >= 0, got {self.value}")


@dataclass(frozen=True)
class Uniform:
    """Integer-uniform on the inclusive range [lo, hi] ns."""

    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo < 0 or self.lo > self.hi:
            raise BadParams(f"uniform bounds invalid: lo={self.lo} hi={self.hi}")


@dataclass(frozen=True)
class Bimodal:
    """Two-mode mixture: with probability ``p_low`` sample ``low``, else ``high``.

    Models fast-path/slow-path media such as a DRAM cache in front of NVM.
    """

    p_low: float
    low: "LatencyDistribution"
    high: "LatencyDistribution"

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_low <= 1.0:
            raise BadParams(f"p_low must be in [0, 1], got {self.p_low}")


@dataclass(frozen=True)
class LogNormal:
    """Log-normal with underlying normal (mu, sigma), clamped to [clamp_lo, clamp_hi] ns."""

    mu: float
    sigma: float
    clamp_lo: int
    clamp_hi: int

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise BadParams(f"sigma must be >= 0, got {self.sigma}")
        if self.clamp_lo < 0 or self.clamp_lo > self.clamp_hi:
            raise BadParams(f"clamp bounds invalid: lo={self.clamp_lo} hi={self.clamp_hi}")


@dataclass
class Scripted:
    """Test-scenario distribution that replays an explicit sample sequence.

    Unlike the other kinds this one is stateful (it consumes its values in
    dispatch order) and exists so scripted scenarios can place completions
    at exact instants. Not accepted in run configs.
    """

    values: tuple[int, ...]
    _cursor: int = field(default=0, repr=False)

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.values):
            raise BadParams("scripted latencies must be >= 0")

    def next_value(self) -> int:
        if self._cursor >= len(self.values):
            raise BadParams("scripted latency sequence exhausted")
        v = self.values[self._cursor]
        self._cursor += 1
        return v


LatencyDistribution = Union[Constant, Uniform, Bimodal, LogNormal, Scripted]


def sample_latency(dist: LatencyDistribution, rng: random.Random) -> int:
    """Draw one latency in integer nanoseconds."""
    if isinstance(dist, Constant):
        return dist.value
    if isinstance(dist, Uniform):
        return rng.randint(dist.lo, dist.hi)
    if isinstance(dist, Bimodal):
        branch = dist.low if rng.random() < dist.p_low else dist.high
        return sample_latency(branch, rng)
    if isinstance(dist, LogNormal):
        raw = round(rng.lognormvariate(dist.mu, dist.sigma))
        return min(max(raw, dist.clamp_lo), dist.clamp_hi)
    if isinstance(dist, Scripted):
        return dist.next_value()
    raise BadParams(f"unknown latency distribution {dist!r}")


def scale_latency(dist: LatencyDistribution, factor: float) -> LatencyDistribution:
    """Return a copy of ``dist`` with all latencies scaled by ``factor``.

    Used by the latency-scale sweep axis. Integer parameters round to the
    nearest nanosecond.
    """
    if factor <= 0:
        raise BadParams(f"latency scale factor must be > 0, got {factor}")
    if isinstance(dist, Constant):
        return Constant(round(dist.value * factor))
    if isinstance(dist, Uniform):
        return Uniform(round(dist.lo * factor), round(dist.hi * factor))
    if isinstance(dist, Bimodal):
        return Bimodal(dist.p_low, scale_latency(dist.low, factor), scale_latency(dist.high, factor))
    if isinstance(dist, LogNormal):
        return LogNormal(
            dist.mu + math.log(factor),
            dist.sigma,
            round(dist.clamp_lo * factor),
            round(dist.clamp_hi * factor),
        )
    raise BadParams(f"cannot scale latency distribution {dist!r}")

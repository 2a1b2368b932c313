"""Source distribution models: uniform and discrete-boundary Gaussian.

The discrete-boundary Gaussian (DBG) is a Normal(mu, sigma^2) law clamped to
an interval [lo, hi]: inside the interval it keeps the Normal density, and
the two tails collapse into point masses sitting exactly on the boundaries.
It models a physical reading that saturates at its sensor limits, and it is
the natural source law for crossing-probability analysis because the
boundary atoms sit precisely where stage crossings originate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

__all__ = [
    "Uniform",
    "DiscreteBoundaryGaussian",
    "SourceDistribution",
    "pdf_mass",
    "boundary_masses",
    "sample",
    "cdf",
    "mean",
    "variance",
    "parse_source_spec",
    "format_source_spec",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.hi > self.lo:
            raise ValueError(f"uniform needs hi > lo, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class DiscreteBoundaryGaussian:
    lo: float
    hi: float
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.hi > self.lo:
            raise ValueError(f"DBG needs hi > lo, got [{self.lo}, {self.hi}]")
        if not self.sigma > 0:
            raise ValueError(f"DBG needs sigma > 0, got {self.sigma}")


SourceDistribution = Uniform | DiscreteBoundaryGaussian


def _phi(z: float) -> float:
    return math.exp(-0.5 * z * z) / _SQRT_2PI


def boundary_masses(dist: SourceDistribution) -> tuple[float, float]:
    """Point masses at lo and hi: the clamped lower and upper Normal tails."""
    if not isinstance(dist, DiscreteBoundaryGaussian):
        raise ValueError("boundary_masses is defined only for the DBG law")
    a = (dist.lo - dist.mu) / dist.sigma
    b = (dist.hi - dist.mu) / dist.sigma
    return float(ndtr(a)), float(ndtr(-b))


def pdf_mass(dist: SourceDistribution, s: float) -> tuple[float, float]:
    """Continuous density at s plus the point mass when s is exactly a boundary."""
    if isinstance(dist, Uniform):
        density = 1.0 / (dist.hi - dist.lo) if dist.lo <= s <= dist.hi else 0.0
        return density, 0.0
    density = 0.0
    if dist.lo < s < dist.hi:
        density = _phi((s - dist.mu) / dist.sigma) / dist.sigma
    p_lo, p_hi = boundary_masses(dist)
    if s == dist.lo:
        return density, p_lo
    if s == dist.hi:
        return density, p_hi
    return density, 0.0


def cdf(dist: SourceDistribution, s: float) -> float:
    """P(S <= s), boundary atoms included."""
    if isinstance(dist, Uniform):
        if s < dist.lo:
            return 0.0
        if s >= dist.hi:
            return 1.0
        return (s - dist.lo) / (dist.hi - dist.lo)
    if s < dist.lo:
        return 0.0
    if s >= dist.hi:
        return 1.0
    return float(ndtr((s - dist.mu) / dist.sigma))


def sample(dist: SourceDistribution, rng: np.random.Generator, size=None):
    """Draw from the law via inverse CDF on rng.random().

    The DBG draw is clamp(mu + sigma * ndtri(u)), exactly the definition of
    the clamped Gaussian. Built from rng.random() rather than rng.normal()
    so scalar draws reproduce the simulation kernels bit for bit.
    """
    u = rng.random(size)
    if isinstance(dist, Uniform):
        return dist.lo + u * (dist.hi - dist.lo)
    return np.clip(dist.mu + dist.sigma * ndtri(u), dist.lo, dist.hi)


def mean(dist: SourceDistribution) -> float:
    if isinstance(dist, Uniform):
        return 0.5 * (dist.lo + dist.hi)
    a = (dist.lo - dist.mu) / dist.sigma
    b = (dist.hi - dist.mu) / dist.sigma
    return (
        dist.lo * float(ndtr(a))
        + dist.hi * float(ndtr(-b))
        + dist.mu * float(ndtr(b) - ndtr(a))
        + dist.sigma * (_phi(a) - _phi(b))
    )


def variance(dist: SourceDistribution) -> float:
    if isinstance(dist, Uniform):
        w = dist.hi - dist.lo
        return w * w / 12.0
    a = (dist.lo - dist.mu) / dist.sigma
    b = (dist.hi - dist.mu) / dist.sigma
    body = float(ndtr(b) - ndtr(a))
    # E[X^2] of the clamped Normal, standardized x = mu + sigma*u.
    second = (
        dist.lo * dist.lo * float(ndtr(a))
        + dist.hi * dist.hi * float(ndtr(-b))
        + dist.mu * dist.mu * body
        + 2.0 * dist.mu * dist.sigma * (_phi(a) - _phi(b))
        + dist.sigma * dist.sigma * (body + a * _phi(a) - b * _phi(b))
    )
    m = mean(dist)
    return second - m * m


def parse_source_spec(text: str) -> SourceDistribution:
    """Parse 'uniform:lo,hi' or 'dbg:lo,hi,mu,sigma'."""
    kind, _, params = text.partition(":")
    try:
        vals = [float(p) for p in params.split(",")] if params else []
    except ValueError:
        raise ValueError(f"malformed source spec {text!r}") from None
    if kind == "uniform":
        if len(vals) != 2:
            raise ValueError(f"uniform spec needs lo,hi — got {text!r}")
        return Uniform(lo=vals[0], hi=vals[1])
    if kind == "dbg":
        if len(vals) != 4:
            raise ValueError(f"dbg spec needs lo,hi,mu,sigma — got {text!r}")
        return DiscreteBoundaryGaussian(lo=vals[0], hi=vals[1], mu=vals[2], sigma=vals[3])
    raise ValueError(f"unknown source kind {kind!r} in {text!r}")


def format_source_spec(dist: SourceDistribution) -> str:
    if isinstance(dist, Uniform):
        return f"uniform:{dist.lo!r},{dist.hi!r}"
    return f"dbg:{dist.lo!r},{dist.hi!r},{dist.mu!r},{dist.sigma!r}"

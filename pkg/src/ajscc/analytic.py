"""Closed-form and quadrature-based MSE predictors for the serpentine mapping.

Two regimes are covered. When channel noise is small relative to the stage
length d, the received arc length stays on the transmitted stage and the sum
MSE decomposes into a noise term plus one quantization term per folded
dimension (plus an ADC term for digital sensing):

    MSE_high = (R_1 * prod(L_k) / D_max)^2 * sigma_n^2
               + sum_k R_{k+1}^2 / (12 (L_k - 1)^2)        [+ ADC term]

When the noise is no longer negligible against d, the received point can
slide past either end of its stage onto an adjacent one ("left/right stage
crossings", LSC/RSC). Those events displace the decoded point by a
systematic amount: a reflected x error plus one level step in a lateral
dimension. This module evaluates the crossing probabilities and conditional
second moments by adaptive quadrature over the within-stage source law, and
assembles the medium/low-noise MSE:

    MSE_low = Pr{LSC} E{|e_LSC|^2} + Pr{RSC} E{|e_RSC|^2} + MSE_high terms.

All expectation integrals reduce to Gaussian tail moments with closed forms,
so only the outer integral over the source density is numeric.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from scipy.special import erf as _scipy_erf
from scipy.special import ndtr

from .curve import MappingConfig
from .dist import (
    DiscreteBoundaryGaussian,
    SourceDistribution,
    Uniform,
    boundary_masses,
    cdf,
)

__all__ = [
    "NoiseModel",
    "SnrSpec",
    "MseBreakdown",
    "QuadratureError",
    "snr_to_sigma",
    "mse_high_3d",
    "mse_high_nd",
    "mse_high_digital",
    "pr_lsc",
    "pr_rsc",
    "crossing_error_moments",
    "mse_low_3d",
    "mse_low_digital",
    "erf_eval",
    "quadrature",
    "x_source_from_s1",
    "adc_mse_term",
    "level_occupancy",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# SNR reference conventions, i.e. what "signal power" means in the dB ratio.
SNR_REF_MAPPED = "mapped"    # mean square of a mapped scalar uniform on [0, D_max]
SNR_REF_SOURCE = "source"    # mean square of a dim-1 source uniform on [0, R_1]
SNR_REF_EXPLICIT = "explicit"


@dataclass(frozen=True)
class NoiseModel:
    """Additive Gaussian noise on the transmitted scalar, std dev in signal units."""

    sigma_n: float

    def __post_init__(self) -> None:
        if self.sigma_n < 0:
            raise ValueError(f"sigma_n must be >= 0, got {self.sigma_n}")


@dataclass(frozen=True)
class SnrSpec:
    """SNR in dB together with the power reference that converts it to sigma_n."""

    snr_db: float = math.nan
    reference: str = SNR_REF_MAPPED
    sigma_n: float = math.nan

    @classmethod
    def mapped(cls, snr_db: float) -> "SnrSpec":
        return cls(snr_db=float(snr_db), reference=SNR_REF_MAPPED)

    @classmethod
    def source_power(cls, snr_db: float) -> "SnrSpec":
        return cls(snr_db=float(snr_db), reference=SNR_REF_SOURCE)

    @classmethod
    def explicit(cls, sigma_n: float) -> "SnrSpec":
        return cls(reference=SNR_REF_EXPLICIT, sigma_n=float(sigma_n))


def snr_to_sigma(config: MappingConfig, snr: SnrSpec) -> NoiseModel:
    """Resolve an SnrSpec to a concrete noise std dev for this mapping."""
    if snr.reference == SNR_REF_EXPLICIT:
        return NoiseModel(sigma_n=snr.sigma_n)
    if not math.isfinite(snr.snr_db):
        raise ValueError(f"snr_db must be finite, got {snr.snr_db}")
    if snr.reference == SNR_REF_MAPPED:
        power = config.d_max * config.d_max / 3.0
    elif snr.reference == SNR_REF_SOURCE:
        power = config.ranges[0] * config.ranges[0] / 3.0
    else:
        raise ValueError(f"unknown SNR reference {snr.reference!r}")
    var = power * 10.0 ** (-snr.snr_db / 10.0)
    return NoiseModel(sigma_n=math.sqrt(var))


@dataclass(frozen=True)
class MseBreakdown:
    """Per-term analytic sum MSE. total is the ordered sum of every term."""

    noise_term: float
    quant_terms: tuple[float, ...]
    adc_term: float
    lsc_term: float
    rsc_term: float
    total: float


def _assemble(noise_term: float, quant_terms: tuple[float, ...],
              lsc_term: float = 0.0, rsc_term: float = 0.0,
              adc_term: float = 0.0) -> MseBreakdown:
    total = noise_term
    for q in quant_terms:
        total = total + q
    total = total + lsc_term
    total = total + rsc_term
    total = total + adc_term
    return MseBreakdown(noise_term=noise_term, quant_terms=quant_terms,
                        adc_term=adc_term, lsc_term=lsc_term,
                        rsc_term=rsc_term, total=total)


def mse_high_nd(config: MappingConfig, noise: NoiseModel) -> MseBreakdown:
    """Small-noise sum MSE for the N-dimensional mapping, term for term."""
    amp = config.ranges[0] * config.n_stages / config.d_max
    noise_term = amp * amp * noise.sigma_n * noise.sigma_n
    quant = tuple(
        config.ranges[k + 1] ** 2 / (12.0 * (config.levels[k] - 1) ** 2)
        for k in range(config.n_dims - 1)
    )
    return _assemble(noise_term, quant)


def mse_high_3d(config: MappingConfig, noise: NoiseModel) -> MseBreakdown:
    """Small-noise sum MSE for the three-source mapping."""
    if config.n_dims != 3:
        raise ValueError(f"mse_high_3d needs n_dims == 3, got {config.n_dims}")
    return mse_high_nd(config, noise)


def adc_mse_term(range_r: float, n_bits: int) -> float:
    """Quantization MSE of the n_bits ADC on dim 1: R^2 / (12 (2^Nb - 1)^2)."""
    if not 1 <= n_bits <= 16:
        raise ValueError(f"n_bits must be in [1, 16], got {n_bits}")
    n = (1 << n_bits) - 1
    return range_r * range_r / (12.0 * n * n)


def mse_high_digital(config: MappingConfig, noise: NoiseModel, n_bits: int) -> MseBreakdown:
    """Small-noise sum MSE with an n_bits ADC sampling dim 1 before the mapping."""
    base = mse_high_3d(config, noise)
    adc = adc_mse_term(config.ranges[0], n_bits)
    return MseBreakdown(noise_term=base.noise_term, quant_terms=base.quant_terms,
                        adc_term=adc, lsc_term=0.0, rsc_term=0.0,
                        total=base.total + adc)


# ---------------------------------------------------------------------------
# Numerics: error function and adaptive Gauss-Kronrod quadrature.


def erf_eval(x: float) -> float:
    """Error function, accurate to <= 1e-12 absolute."""
    return float(_scipy_erf(x))


class QuadratureError(RuntimeError):
    """Raised when adaptive refinement exhausts its subdivision budget."""


# 15-point Kronrod rule with embedded 7-point Gauss rule on [-1, 1]:
# (node, Gauss weight, Kronrod weight); Gauss weight 0 marks Kronrod-only nodes.
_G7K15 = (
    (0.000000000000000, 0.417959183673469, 0.209482141084728),
    (0.207784955007898, 0.000000000000000, 0.204432940075298),
    (0.405845151377397, 0.381830050505119, 0.190350578064785),
    (0.586087235467691, 0.000000000000000, 0.169004726639267),
    (0.741531185599394, 0.279705391489277, 0.140653259715525),
    (0.864864423359769, 0.000000000000000, 0.104790010322250),
    (0.949107912342759, 0.129484966168870, 0.063092092629979),
    (0.991455371120813, 0.000000000000000, 0.022935322010529),
)


def _g7k15_segment(f, a: float, b: float) -> tuple[float, float]:
    """One Gauss-Kronrod pass over [a, b]: (estimate, error estimate)."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    gauss = 0.0
    kronrod = 0.0
    for node, wg, wk in _G7K15:
        if node == 0.0:
            fv = f(mid)
            gauss += wg * fv
            kronrod += wk * fv
            continue
        f_lo = f(mid - half * node)
        f_hi = f(mid + half * node)
        gauss += wg * (f_lo + f_hi)
        kronrod += wk * (f_lo + f_hi)
    gauss *= half
    kronrod *= half
    err = (200.0 * abs(kronrod - gauss)) ** 1.5
    return kronrod, err


def quadrature(f, lo: float, hi: float, tol: float = 1e-10,
               max_intervals: int = 1_000_000,
               points: tuple[float, ...] = ()) -> float:
    """Adaptive Gauss-Kronrod integral of f over [lo, hi] to absolute tolerance tol.

    Bisects the interval with the largest a-posteriori error estimate first.
    Raises QuadratureError if the estimate cannot be brought under tol within
    max_intervals subdivisions.

    points lists abscissae where the integrand changes scale (a narrow layer,
    a kink, a density peak). The initial partition is split there, so sharp
    features much thinner than [lo, hi] cannot slip between the sample nodes
    of a single opening pass and fake convergence. Points outside (lo, hi)
    are ignored.
    """
    if tol < 1e-12:
        raise ValueError(f"tol must be >= 1e-12, got {tol}")
    if lo == hi:
        return 0.0
    edges = [lo]
    edges.extend(sorted(p for p in set(points) if lo < p < hi))
    edges.append(hi)
    heap = []
    total_err = 0.0
    counter = 0
    for a, b in zip(edges, edges[1:]):
        val, err = _g7k15_segment(f, a, b)
        # Heap of (-error, order, a, b, value): worst interval first.
        heap.append((-err, counter, a, b, val))
        total_err += err
        counter += 1
    heapq.heapify(heap)
    n_intervals = len(heap)
    while total_err > tol:
        if n_intervals >= max_intervals:
            raise QuadratureError(
                f"no convergence: error {total_err:.3e} > tol {tol:.3e} "
                f"after {n_intervals} intervals"
            )
        neg_err, _, a, b, v = heapq.heappop(heap)
        total_err += neg_err  # neg_err is -err
        m = 0.5 * (a + b)
        v1, e1 = _g7k15_segment(f, a, m)
        v2, e2 = _g7k15_segment(f, m, b)
        counter += 1
        heapq.heappush(heap, (-e1, counter, a, m, v1))
        counter += 1
        heapq.heappush(heap, (-e2, counter, m, b, v2))
        total_err += e1 + e2
        n_intervals += 1
    return math.fsum(item[4] for item in heap)


# ---------------------------------------------------------------------------
# Crossing probabilities and conditional error moments.


def _phi(z: float) -> float:
    return math.exp(-0.5 * z * z) / _SQRT_2PI


def _tail_moments_lower(a: float, sigma: float) -> tuple[float, float, float]:
    """(P, E[n; n<a], E[n^2; n<a]) for n ~ Normal(0, sigma^2), unnormalized."""
    z = a / sigma
    p = float(ndtr(z))
    m1 = -sigma * _phi(z)
    m2 = sigma * sigma * (p - z * _phi(z))
    return p, m1, m2


def _tail_moments_upper(b: float, sigma: float) -> tuple[float, float, float]:
    """(P, E[n; n>b], E[n^2; n>b]) for n ~ Normal(0, sigma^2), unnormalized."""
    z = b / sigma
    p = float(ndtr(-z))
    m1 = sigma * _phi(z)
    m2 = sigma * sigma * (p + z * _phi(z))
    return p, m1, m2


def _require_stage_support(source: SourceDistribution) -> float:
    if source.lo != 0.0:
        raise ValueError(
            f"within-stage source law must start at 0, got lo={source.lo}"
        )
    return source.hi


def _crossing_breakpoints(source: SourceDistribution, d: float,
                          sig: float) -> tuple[float, ...]:
    """Initial-partition points for the crossing integrals over [0, d].

    The Gaussian tail factors live within a few sigma of a wall, and a
    narrow truncated-Normal density lives within a few sigma_s of its mean;
    both can be far thinner than the stage and must be pinned explicitly.
    """
    pts = [4.0 * sig, 32.0 * sig, d - 32.0 * sig, d - 4.0 * sig]
    if isinstance(source, DiscreteBoundaryGaussian):
        pts.extend((source.mu - 6.0 * source.sigma,
                    source.mu + 6.0 * source.sigma))
    return tuple(pts)


def _density(source: SourceDistribution, s: float) -> float:
    if isinstance(source, Uniform):
        return 1.0 / (source.hi - source.lo)
    return _phi((s - source.mu) / source.sigma) / source.sigma


def _masses(source: SourceDistribution) -> tuple[float, float]:
    if isinstance(source, DiscreteBoundaryGaussian):
        return boundary_masses(source)
    return 0.0, 0.0


def pr_lsc(source: SourceDistribution, noise: NoiseModel) -> float:
    """Probability the received arc length falls off the left (x < 0) end of its stage.

    source is the law of the within-stage coordinate x_s on [0, d]; the event
    is n < -x_s under Normal(0, sigma_n^2) noise, so the continuous part is
    the integral of the source density against the lower Gaussian tail, and
    DBG boundary atoms contribute their tail values at x_s = 0 and x_s = d.
    """
    d = _require_stage_support(source)
    sig = noise.sigma_n
    if sig <= 0:
        raise ValueError("pr_lsc needs sigma_n > 0")
    val = quadrature(lambda s: _density(source, s) * float(ndtr(-s / sig)), 0.0, d,
                     points=_crossing_breakpoints(source, d, sig))
    p0, pd = _masses(source)
    val += p0 * 0.5 + pd * float(ndtr(-d / sig))
    return min(max(val, 0.0), 1.0)


def pr_rsc(source: SourceDistribution, noise: NoiseModel) -> float:
    """Probability of falling off the right (x > d) end; mirror of pr_lsc."""
    d = _require_stage_support(source)
    sig = noise.sigma_n
    if sig <= 0:
        raise ValueError("pr_rsc needs sigma_n > 0")
    val = quadrature(lambda s: _density(source, s) * float(ndtr(-(d - s) / sig)), 0.0, d,
                     points=_crossing_breakpoints(source, d, sig))
    p0, pd = _masses(source)
    val += pd * 0.5 + p0 * float(ndtr(-d / sig))
    return min(max(val, 0.0), 1.0)


def _inner_lsc_x2(s: float, sig: float) -> float:
    """E[(-n - 2 x_s)^2 ; n < -x_s] at x_s = s (x-direction moment, unnormalized)."""
    p, m1, m2 = _tail_moments_lower(-s, sig)
    return m2 + 4.0 * s * m1 + 4.0 * s * s * p


def _inner_rsc_x2(s: float, d: float, sig: float) -> float:
    """E[(2d - 2 x_s - n)^2 ; n > d - x_s] at x_s = s (unnormalized)."""
    c = 2.0 * (d - s)
    p, m1, m2 = _tail_moments_upper(d - s, sig)
    return m2 - 2.0 * c * m1 + c * c * p


def _joint_x_moments(source: SourceDistribution, noise: NoiseModel) -> tuple[float, float]:
    """Unconditional E[(reflected x displacement)^2 ; crossing] for LSC and RSC."""
    d = _require_stage_support(source)
    sig = noise.sigma_n
    pts = _crossing_breakpoints(source, d, sig)
    jl = quadrature(lambda s: _density(source, s) * _inner_lsc_x2(s, sig), 0.0, d,
                    points=pts)
    jr = quadrature(lambda s: _density(source, s) * _inner_rsc_x2(s, d, sig), 0.0, d,
                    points=pts)
    p0, pd = _masses(source)
    if p0 > 0.0:
        jl += p0 * _inner_lsc_x2(0.0, sig)
        jr += p0 * _inner_rsc_x2(0.0, d, sig)
    if pd > 0.0:
        jl += pd * _inner_lsc_x2(d, sig)
        jr += pd * _inner_rsc_x2(d, d, sig)
    return jl, jr


def crossing_error_moments(source: SourceDistribution, noise: NoiseModel,
                           config: MappingConfig) -> tuple[float, float]:
    """Conditional second moments of the crossing error, x-frame convention.

    Returns (E{(-n - 2 x_s)^2 + Delta_y^2 | LSC}, E{(2d - 2 x_s - n)^2 +
    Delta_y^2 | RSC}): the reflected x displacement plus one lateral level
    step, conditioned on the crossing event so that Pr * moment reproduces
    the product terms of the low-SNR MSE. Returns zeros for an event whose
    probability is below 1e-300 (numerically impossible).
    """
    d = _require_stage_support(source)
    if not math.isclose(d, config.d, rel_tol=1e-9):
        raise ValueError(
            f"source support [0, {d}] does not match the stage length {config.d}"
        )
    if noise.sigma_n <= 0:
        return 0.0, 0.0
    pl = pr_lsc(source, noise)
    pr = pr_rsc(source, noise)
    jl, jr = _joint_x_moments(source, noise)
    dy2 = config.deltas[0] * config.deltas[0]
    e_lsc = jl / pl + dy2 if pl >= 1e-300 else 0.0
    e_rsc = jr / pr + dy2 if pr >= 1e-300 else 0.0
    return e_lsc, e_rsc


# ---------------------------------------------------------------------------
# Low/medium-SNR sum MSE.


def level_occupancy(source: SourceDistribution, delta: float, level_count: int) -> list[float]:
    """P(level index = j) for j = 0..level_count-1 under the given source law."""
    probs = []
    prev = 0.0
    for j in range(level_count - 1):
        c = cdf(source, (j + 0.5) * delta)
        probs.append(c - prev)
        prev = c
    probs.append(1.0 - prev)
    return probs


def _case_weighted_penalties(config: MappingConfig,
                             source_2: SourceDistribution,
                             source_3: SourceDistribution) -> tuple[float, float]:
    """Lateral crossing penalties weighted by which stage the event starts from.

    A right crossing always shifts the curve one level in dim 2. A left
    crossing does too from interior stages, but from the top or bottom stage
    of a dim-3 plane it jumps one plane instead (one Delta_z step), and from
    the bottom stage of the first or last plane it reflects off the curve end
    with no lateral displacement at all. Stage occupancy comes from the
    actual source laws of dims 2 and 3.
    """
    dy2 = config.deltas[0] * config.deltas[0]
    dz2 = config.deltas[1] * config.deltas[1]
    occ_y = level_occupancy(source_2, config.deltas[0], config.levels[0])
    occ_z = level_occupancy(source_3, config.deltas[1], config.levels[1])
    p_bot = occ_y[0]
    p_top = occ_y[-1]
    p_int = max(0.0, 1.0 - p_bot - p_top)
    p_edge_plane = occ_z[0] + occ_z[-1]
    pen_lsc = p_int * dy2 + p_top * dz2 + p_bot * (1.0 - p_edge_plane) * dz2
    pen_rsc = dy2
    return pen_lsc, pen_rsc


def mse_low_3d(config: MappingConfig, noise: NoiseModel,
               source_x: SourceDistribution, *,
               case_weighted: bool = False,
               source_2: SourceDistribution | None = None,
               source_3: SourceDistribution | None = None) -> MseBreakdown:
    """Medium/low-SNR sum MSE: crossing products plus the small-noise terms.

    source_x is the law of the within-stage coordinate on [0, d] (use
    x_source_from_s1 to push the dim-1 source law through the mapping). The
    x-direction crossing moments are converted from signal units to source
    units by the mapping gain R_1 prod(L)/D_max; the lateral penalty is one
    dim-2 level step, or, with case_weighted=True, the occupancy-weighted mix
    of dim-2 steps, dim-3 plane jumps, and curve-end reflections.
    """
    if config.n_dims != 3:
        raise ValueError(f"mse_low_3d needs n_dims == 3, got {config.n_dims}")
    base = mse_high_3d(config, noise)
    if noise.sigma_n == 0.0:
        return base
    d = _require_stage_support(source_x)
    if not math.isclose(d, config.d, rel_tol=1e-9):
        raise ValueError(
            f"source_x support [0, {d}] does not match the stage length {config.d}"
        )
    pl = pr_lsc(source_x, noise)
    pr = pr_rsc(source_x, noise)
    jl, jr = _joint_x_moments(source_x, noise)
    if case_weighted:
        s2 = source_2 if source_2 is not None else Uniform(0.0, config.ranges[1])
        s3 = source_3 if source_3 is not None else Uniform(0.0, config.ranges[2])
        pen_l, pen_r = _case_weighted_penalties(config, s2, s3)
    else:
        pen_l = pen_r = config.deltas[0] * config.deltas[0]
    amp = config.ranges[0] * config.n_stages / config.d_max
    amp2 = amp * amp
    lsc_term = amp2 * jl + pl * pen_l
    rsc_term = amp2 * jr + pr * pen_r
    return _assemble(base.noise_term, base.quant_terms, lsc_term, rsc_term)


def mse_low_digital(config: MappingConfig, noise: NoiseModel,
                    source_x: SourceDistribution, n_bits: int, *,
                    case_weighted: bool = False,
                    source_2: SourceDistribution | None = None,
                    source_3: SourceDistribution | None = None) -> MseBreakdown:
    """mse_low_3d plus the ADC term; digital total - analog total is exactly that term."""
    base = mse_low_3d(config, noise, source_x, case_weighted=case_weighted,
                      source_2=source_2, source_3=source_3)
    adc = adc_mse_term(config.ranges[0], n_bits)
    return MseBreakdown(noise_term=base.noise_term, quant_terms=base.quant_terms,
                        adc_term=adc, lsc_term=base.lsc_term,
                        rsc_term=base.rsc_term, total=base.total + adc)


def x_source_from_s1(config: MappingConfig, dist: SourceDistribution) -> SourceDistribution:
    """Push the dim-1 source law through x = (d/R_1) s_1 onto the stage interval."""
    c = config.d / config.ranges[0]
    if isinstance(dist, Uniform):
        return Uniform(lo=dist.lo * c, hi=dist.hi * c)
    return DiscreteBoundaryGaussian(lo=dist.lo * c, hi=dist.hi * c,
                                    mu=dist.mu * c, sigma=dist.sigma * c)

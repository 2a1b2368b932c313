"""Rectangular serpentine source-channel mapping: geometry, encode, decode.

N analog sources (s_1, ..., s_N), each confined to [0, R_k], are compressed
into a single transmitted scalar m. Dimensions 2..N are quantized onto
uniform level grids (L_k points including both endpoints for dim k+1); the
grid cells select one of Prod(L_k) parallel "stages", line segments of
length d = D_max / Prod(L_k) laid out as a boustrophedon curve that fills
the source box. Dimension 1 stays continuous: it picks the position x along
the selected stage. The transmitted value m is the accumulated arc length
from the curve origin to that point, so m is in [0, D_max] and the curve
geometry is what couples noise on m to errors in every source dimension.

Stage traversal is fixed as follows: the continuous coordinate x alternates
direction with global stage parity (even-index stages run left-to-right),
and each higher dimension reverses the traversal order of everything below
it on its odd levels. This is the unique choice that makes the curve
continuous (adjacent stage indices share an endpoint), which in turn makes
"accumulated length" well defined.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "MappingConfig",
    "SourcePoint",
    "LatticePoint",
    "MappedScalar",
    "build_config",
    "quantize_level",
    "encode",
    "decode",
    "adc_quantize",
    "stage_index",
    "stage_levels",
]


@dataclass(frozen=True)
class MappingConfig:
    """Full geometry of one rectangular serpentine mapping.

    Fields:
        n_dims: number of source dimensions N >= 2.
        ranges: (R_1, ..., R_N), positive, source units.
        levels: (L_1, ..., L_{N-1}), level counts for dims 2..N, each >= 2.
        d_max: total curve length (the modulation resource), signal units.
        d: stage length, d = d_max / prod(levels) exactly.
        deltas: (Delta_1, ..., Delta_{N-1}), level spacing R_{k+1}/(L_k - 1).
        n_stages: prod(levels).
        fold_weights: cumulative products (1, L_1, L_1*L_2, ...) used by the
            serpentine fold/unfold between level indices and stage index.
    """

    n_dims: int
    ranges: tuple[float, ...]
    levels: tuple[int, ...]
    d_max: float
    d: float
    deltas: tuple[float, ...]
    n_stages: int
    fold_weights: tuple[int, ...]


@dataclass(frozen=True)
class SourcePoint:
    """A raw reading (s_1, ..., s_N) in source units."""

    values: tuple[float, ...]


@dataclass(frozen=True)
class LatticePoint:
    """Quantized cell of a source point.

    x is the continuous coordinate along the stage (signal units, in [0, d]);
    level_indices are the 0-based level indices (k_1, ..., k_{N-1}) selecting
    the stage.
    """

    x: float
    level_indices: tuple[int, ...]


@dataclass(frozen=True)
class MappedScalar:
    """Arc length m in [0, d_max] from the curve origin to the mapped point."""

    m: float


def build_config(
    n_dims: int,
    ranges: "list[float] | tuple[float, ...]",
    levels: "list[int] | tuple[int, ...]",
    d_max: float,
) -> MappingConfig:
    """Validate parameters and derive the full mapping geometry."""
    if n_dims < 2:
        raise ValueError(f"n_dims must be >= 2, got {n_dims}")
    if len(ranges) != n_dims:
        raise ValueError(f"need {n_dims} ranges, got {len(ranges)}")
    if len(levels) != n_dims - 1:
        raise ValueError(f"need {n_dims - 1} level counts, got {len(levels)}")
    ranges = tuple(float(r) for r in ranges)
    if any(r <= 0 for r in ranges):
        raise ValueError(f"ranges must be positive, got {ranges}")
    levels = tuple(int(l) for l in levels)
    if any(l < 2 for l in levels):
        raise ValueError(f"every level count must be >= 2, got {levels}")
    d_max = float(d_max)
    if d_max <= 0:
        raise ValueError(f"d_max must be positive, got {d_max}")

    n_stages = math.prod(levels)
    d = d_max / n_stages
    deltas = tuple(ranges[k + 1] / (levels[k] - 1) for k in range(n_dims - 1))
    weights = [1]
    for l in levels[:-1]:
        weights.append(weights[-1] * l)
    return MappingConfig(
        n_dims=n_dims,
        ranges=ranges,
        levels=levels,
        d_max=d_max,
        d=d,
        deltas=deltas,
        n_stages=n_stages,
        fold_weights=tuple(weights),
    )


def quantize_level(value: float, delta: float, level_count: int) -> int:
    """Nearest level index round(value/delta), half-ties up, clamped to [0, level_count-1]."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    k = math.floor(value / delta + 0.5)
    if k < 0:
        return 0
    if k > level_count - 1:
        return level_count - 1
    return int(k)


def stage_index(config: MappingConfig, level_indices: "tuple[int, ...]") -> int:
    """Serpentine fold: level indices -> global stage index t.

    Each dimension appends its level index as the most significant digit,
    reflecting the whole lower-dimensional traversal on odd levels so that
    consecutive stage indices are always geometric neighbors.
    """
    ks = level_indices
    if len(ks) != config.n_dims - 1:
        raise ValueError(
            f"need {config.n_dims - 1} level indices, got {len(ks)}"
        )
    t = ks[0]
    for j in range(1, config.n_dims - 1):
        w = config.fold_weights[j]
        if ks[j] % 2 == 0:
            t = ks[j] * w + t
        else:
            t = ks[j] * w + (w - 1 - t)
    return t


def stage_levels(config: MappingConfig, t: int) -> tuple[int, ...]:
    """Serpentine unfold: global stage index t -> level indices (inverse of stage_index)."""
    if not 0 <= t < config.n_stages:
        raise ValueError(f"stage index {t} outside [0, {config.n_stages})")
    ks = [0] * (config.n_dims - 1)
    rem = t
    for j in range(config.n_dims - 2, 0, -1):
        w = config.fold_weights[j]
        kj = rem // w
        rem = rem - kj * w
        if kj % 2 == 1:
            rem = w - 1 - rem
        ks[j] = kj
    ks[0] = rem
    return tuple(ks)


def _clamp(v: float, lo: float, hi: float) -> float:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


def encode(config: MappingConfig, source: SourcePoint) -> tuple[LatticePoint, MappedScalar]:
    """Map a source point to its lattice cell and transmitted arc length.

    Inputs outside [0, R_k] are clamped. Dimension 1 maps continuously,
    x = (d/R_1) s_1; dims 2..N are rounded to their level grids and folded
    into the stage index t; on odd stages the x direction is reversed so the
    curve stays continuous: m = t*d + x on even stages, t*d + (d - x) on odd.
    """
    vals = source.values
    if len(vals) != config.n_dims:
        raise ValueError(f"need {config.n_dims} source values, got {len(vals)}")
    s1 = _clamp(vals[0], 0.0, config.ranges[0])
    ks = tuple(
        quantize_level(_clamp(vals[j + 1], 0.0, config.ranges[j + 1]),
                       config.deltas[j], config.levels[j])
        for j in range(config.n_dims - 1)
    )
    x = s1 * (config.d / config.ranges[0])
    t = stage_index(config, ks)
    if t % 2 == 0:
        m = t * config.d + x
    else:
        m = t * config.d + (config.d - x)
    m = _clamp(m, 0.0, config.d_max)
    return LatticePoint(x=x, level_indices=ks), MappedScalar(m=m)


def decode(config: MappingConfig, m: "MappedScalar | float") -> SourcePoint:
    """Invert the mapping: received arc length -> reconstructed source point.

    m is clamped to [0, d_max]; the stage index is t = min(floor(m/d),
    n_stages - 1) and the within-stage offset u = m - t*d gives back the
    continuous coordinate (u on even stages, d - u on odd). The level indices
    recovered from t yield the grid values of dims 2..N.
    """
    mv = m.m if isinstance(m, MappedScalar) else float(m)
    mv = _clamp(mv, 0.0, config.d_max)
    t = min(math.floor(mv / config.d), config.n_stages - 1)
    u = _clamp(mv - t * config.d, 0.0, config.d)
    x = u if t % 2 == 0 else config.d - u
    ks = stage_levels(config, t)
    out = [x * (config.ranges[0] / config.d)]
    out.extend(ks[j] * config.deltas[j] for j in range(config.n_dims - 1))
    return SourcePoint(values=tuple(out))


def adc_quantize(value: float, range_r: float, n_bits: int) -> float:
    """Uniform mid-tread quantizer with 2**n_bits levels {0, ..., range_r}.

    Level spacing is range_r / (2**n_bits - 1); nearest level wins with
    half-ties rounding up, so the error magnitude never exceeds half a step.
    """
    if not 1 <= n_bits <= 16:
        raise ValueError(f"n_bits must be in [1, 16], got {n_bits}")
    if range_r <= 0:
        raise ValueError(f"range_r must be positive, got {range_r}")
    n_levels = (1 << n_bits) - 1
    delta = range_r / n_levels
    k = math.floor(value / delta + 0.5)
    if k < 0:
        k = 0
    elif k > n_levels:
        k = n_levels
    return k * delta

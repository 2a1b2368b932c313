"""Level-count optimization: exhaustive grid search over (L_1, ..., L_{N-1}).

Grids are small (tens of points per axis), so every point is evaluated
exactly and the argmin is read off the surface; ties break toward the
lexicographically smallest level tuple (fewer levels = cheaper hardware).
Monte Carlo objectives reuse one seed across all grid points (common random
numbers), so surface comparisons see the same noise realizations and point
rankings are far less variance-dominated than independent runs would be.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from itertools import product

from .analytic import (
    MseBreakdown,
    SnrSpec,
    mse_high_3d,
    mse_high_digital,
    mse_high_nd,
    mse_low_3d,
    mse_low_digital,
    snr_to_sigma,
    x_source_from_s1,
)
from .curve import MappingConfig, build_config
from .dist import SourceDistribution, Uniform
from .mc import Analog, Digital, SimulationSpec
from .mc import run as mc_run

__all__ = [
    "AnalyticHigh",
    "AnalyticLow",
    "MonteCarlo",
    "SweepSpec",
    "GridEntry",
    "SweepResult",
    "TrendRow",
    "DimsRow",
    "grid_search",
    "optimal_l_trend",
    "optimal_l_vs_dims",
]


@dataclass(frozen=True)
class AnalyticHigh:
    """Closed-form high-SNR objective (noise + quantization terms)."""


@dataclass(frozen=True)
class AnalyticLow:
    """Closed-form medium/low-SNR objective including stage-crossing terms.

    source_1 is the dim-1 law (pushed onto the stage interval internally);
    source_2/source_3 feed the case-weighted lateral penalty and default to
    uniform laws over the dimension ranges.
    """

    source_1: SourceDistribution
    case_weighted: bool = False
    source_2: SourceDistribution | None = None
    source_3: SourceDistribution | None = None


@dataclass(frozen=True)
class MonteCarlo:
    """Simulated objective: mse_sum of a run with this many trials.

    The same seed is reused at every grid point (common random numbers).
    Sources are uniform over each dimension range.
    """

    trials: int
    seed: int

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")


Objective = "AnalyticHigh | AnalyticLow | MonteCarlo"


@dataclass(frozen=True)
class SweepSpec:
    n_dims: int
    ranges: tuple[float, ...]
    d_max: float
    snr: SnrSpec
    l_ranges: tuple[tuple[int, int, int], ...]  # per compressed dim: (lo, hi, step)
    objective: object
    sensor: "Analog | Digital" = Analog()

    def __post_init__(self) -> None:
        if len(self.l_ranges) != self.n_dims - 1:
            raise ValueError(
                f"need {self.n_dims - 1} level grids, got {len(self.l_ranges)}"
            )
        for lo, hi, step in self.l_ranges:
            if lo < 2:
                raise ValueError(f"level grids start at 2, got {lo}")
            if step < 1:
                raise ValueError(f"grid step must be >= 1, got {step}")
            if hi < lo:
                raise ValueError(f"empty level grid {lo}:{hi}:{step}")


@dataclass(frozen=True)
class GridEntry:
    levels: tuple[int, ...]
    mse: float
    breakdown: "MseBreakdown | None"


@dataclass(frozen=True)
class SweepResult:
    grid: tuple[GridEntry, ...]
    argmin: tuple[int, ...]
    mse_min: float


@dataclass(frozen=True)
class TrendRow:
    d_max: float
    snr_db: float
    argmin: tuple[int, ...]
    mse_min: float


@dataclass(frozen=True)
class DimsRow:
    n_dims: int
    d_max: float
    argmin: tuple[int, ...]
    mse_min: float


def _axis(l_range: tuple[int, int, int]) -> list[int]:
    lo, hi, step = l_range
    return list(range(lo, hi + 1, step))


def _evaluate(sweep: SweepSpec, config: MappingConfig) -> GridEntry:
    noise = snr_to_sigma(config, sweep.snr)
    obj = sweep.objective
    digital = isinstance(sweep.sensor, Digital)
    if isinstance(obj, AnalyticHigh):
        if digital:
            bd = mse_high_digital(config, noise, sweep.sensor.n_bits)
        elif config.n_dims == 3:
            bd = mse_high_3d(config, noise)
        else:
            bd = mse_high_nd(config, noise)
        return GridEntry(levels=config.levels, mse=bd.total, breakdown=bd)
    if isinstance(obj, AnalyticLow):
        source_x = x_source_from_s1(config, obj.source_1)
        if digital:
            bd = mse_low_digital(config, noise, source_x, sweep.sensor.n_bits,
                                 case_weighted=obj.case_weighted,
                                 source_2=obj.source_2, source_3=obj.source_3)
        else:
            bd = mse_low_3d(config, noise, source_x,
                            case_weighted=obj.case_weighted,
                            source_2=obj.source_2, source_3=obj.source_3)
        return GridEntry(levels=config.levels, mse=bd.total, breakdown=bd)
    if isinstance(obj, MonteCarlo):
        sources = tuple(Uniform(0.0, r) for r in config.ranges)
        spec = SimulationSpec(config=config, noise=noise, sources=sources,
                              sensor=sweep.sensor, trials=obj.trials,
                              seed=obj.seed)
        report = mc_run(spec)
        return GridEntry(levels=config.levels, mse=report.mse_sum, breakdown=None)
    raise ValueError(f"unknown objective {obj!r}")


def grid_search(sweep: SweepSpec) -> SweepResult:
    """Evaluate the objective at every level tuple; return surface and argmin."""
    axes = [_axis(r) for r in sweep.l_ranges]
    entries = []
    for levels in product(*axes):
        config = build_config(sweep.n_dims, sweep.ranges, levels, sweep.d_max)
        entries.append(_evaluate(sweep, config))
    if not entries:
        raise ValueError("empty level grid")
    best = min(entries, key=lambda e: (e.mse, e.levels))
    return SweepResult(grid=tuple(entries), argmin=best.levels, mse_min=best.mse)


def optimal_l_trend(sweep: SweepSpec, d_max_list, snr_db_list) -> tuple[TrendRow, ...]:
    """Optimal levels per (D_max, SNR dB) pair, scanning the sweep's grid."""
    if not d_max_list or not snr_db_list:
        raise ValueError("d_max_list and snr_db_list must be non-empty")
    if sweep.snr.reference == "explicit":
        raise ValueError("trend sweeps need a dB-referenced SNR spec")
    rows = []
    for d_max in d_max_list:
        for snr_db in snr_db_list:
            spec = dataclasses.replace(
                sweep, d_max=float(d_max),
                snr=dataclasses.replace(sweep.snr, snr_db=float(snr_db)),
            )
            result = grid_search(spec)
            rows.append(TrendRow(d_max=float(d_max), snr_db=float(snr_db),
                                 argmin=result.argmin, mse_min=result.mse_min))
    return tuple(rows)


def _extend_ranges(ranges: tuple[float, ...], n_dims: int) -> tuple[float, ...]:
    if n_dims <= len(ranges):
        return tuple(ranges[:n_dims])
    return tuple(ranges) + (ranges[-1],) * (n_dims - len(ranges))


def optimal_l_vs_dims(sweep: SweepSpec, n_list, d_max_list,
                      equal_l: bool = True) -> tuple[DimsRow, ...]:
    """Optimal level count per (N, D_max) under the closed-form objective.

    With equal_l (the default) all compressed dimensions share one level
    count scanned over the sweep's first grid; otherwise the full product
    grid is searched. Ranges extend to higher N by repeating the last one.
    """
    if not n_list or not d_max_list:
        raise ValueError("n_list and d_max_list must be non-empty")
    rows = []
    for n_dims in n_list:
        if n_dims < 2:
            raise ValueError(f"n_dims must be >= 2, got {n_dims}")
        ranges = _extend_ranges(sweep.ranges, n_dims)
        for d_max in d_max_list:
            base = dataclasses.replace(
                sweep, n_dims=n_dims, ranges=ranges, d_max=float(d_max),
                objective=AnalyticHigh(),
                l_ranges=(sweep.l_ranges[0],) * (n_dims - 1),
            )
            if equal_l:
                best = None
                for level in _axis(sweep.l_ranges[0]):
                    levels = (level,) * (n_dims - 1)
                    config = build_config(n_dims, ranges, levels, float(d_max))
                    entry = _evaluate(base, config)
                    if best is None or (entry.mse, entry.levels) < (best.mse, best.levels):
                        best = entry
                rows.append(DimsRow(n_dims=n_dims, d_max=float(d_max),
                                    argmin=best.levels, mse_min=best.mse))
            else:
                result = grid_search(base)
                rows.append(DimsRow(n_dims=n_dims, d_max=float(d_max),
                                    argmin=result.argmin, mse_min=result.mse_min))
    return tuple(rows)

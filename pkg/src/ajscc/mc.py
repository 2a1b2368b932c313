"""Monte Carlo end-to-end channel simulator — the independent oracle.

Each trial samples one source point, encodes it, perturbs the transmitted
arc length with Gaussian noise (clamping at the curve ends), decodes, and
accumulates squared per-dimension errors plus a classification of the
stage-crossing event (if any) against the twenty labeled single-crossing
sub-cases.

Determinism contract: a report is a pure function of (spec, seed). Trials
are partitioned into fixed blocks of 2**16; block b draws all of its
randomness from an independent counter-based stream keyed (seed, b), blocks
are reduced with exactly-rounded summation (math.fsum), and every per-block
partial is computed by the kernel backends in a fixed operation order. Worker
count (AJSCC_THREADS) therefore cannot change any output bit.

For n_dims == 3 the classifier distinguishes, per crossing direction, the
stage's within-plane parity (a-cases), top/bottom stages of interior planes
(b-cases), and the four plane-boundary corners including curve-end
reflections (c-cases). The tabulated lateral displacements of the b/c cases
describe the geometry exactly when L_1 and L_2 are both even (each plane
transition then lands at a left-crossing end and the curve terminates at a
bottom stage); for odd level counts the positional taxonomy still applies
but a transition stage's true neighbor can differ from the tabulated one.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .analytic import NoiseModel
from .curve import LatticePoint, MappingConfig, stage_index, stage_levels
from .dist import SourceDistribution

__all__ = [
    "Analog",
    "Digital",
    "SimulationSpec",
    "SimulationReport",
    "CrossingCase",
    "CaseRate",
    "CASE_LABELS",
    "run",
    "classify_crossing",
    "empirical_crossing_rates",
]

BLOCK_TRIALS = 1 << 16
_Z95 = 1.959963984540054  # two-sided 95% normal quantile

_ROWS = ("a1", "a2", "b1", "b2", "b3", "b4", "c1", "c2", "c3", "c4")
CASE_LABELS = tuple(f"{row}_{d}" for row in _ROWS for d in ("LSC", "RSC"))

# row -> ((lateral axis, sign) for LSC, same for RSC); None = curve-end
# reflection with no lateral displacement.
_LATERAL = {
    0: (("y", -1.0), ("y", +1.0)),   # a1: interior stage, odd within-plane number
    1: (("y", +1.0), ("y", -1.0)),   # a2: interior stage, even within-plane number
    2: (("z", +1.0), ("y", -1.0)),   # b1: top stage, odd interior plane
    3: (("z", -1.0), ("y", +1.0)),   # b2: bottom stage, odd interior plane
    4: (("z", -1.0), ("y", -1.0)),   # b3: top stage, even interior plane
    5: (("z", +1.0), ("y", +1.0)),   # b4: bottom stage, even interior plane
    6: (None, ("y", +1.0)),          # c1: bottom stage, first plane (curve start)
    7: (None, ("y", +1.0)),          # c2: bottom stage, last plane (curve end)
    8: (("z", +1.0), ("y", -1.0)),   # c3: top stage, first plane
    9: (("z", -1.0), ("y", -1.0)),   # c4: top stage, last plane
}


@dataclass(frozen=True)
class Analog:
    pass


@dataclass(frozen=True)
class Digital:
    n_bits: int

    def __post_init__(self) -> None:
        if not 1 <= self.n_bits <= 16:
            raise ValueError(f"n_bits must be in [1, 16], got {self.n_bits}")


@dataclass(frozen=True)
class SimulationSpec:
    config: MappingConfig
    noise: NoiseModel
    sources: tuple[SourceDistribution, ...]
    sensor: "Analog | Digital"
    trials: int
    seed: int

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if len(self.sources) != self.config.n_dims:
            raise ValueError(
                f"need {self.config.n_dims} source laws, got {len(self.sources)}"
            )
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        for k, dist in enumerate(self.sources):
            if dist.lo < 0.0 or dist.hi > self.config.ranges[k]:
                raise ValueError(
                    f"source {k + 1} supported on [{dist.lo}, {dist.hi}] exceeds "
                    f"the dimension range [0, {self.config.ranges[k]}]"
                )


@dataclass(frozen=True)
class CrossingCase:
    label: str
    nu: tuple[float, float, float]


@dataclass(frozen=True)
class CaseRate:
    count: int
    rate: float
    ci_halfwidth: float


@dataclass(frozen=True)
class SimulationReport:
    mse_per_dim: tuple[float, ...]
    mse_sum: float
    ci_halfwidth: float
    crossing_counts: dict
    multi_crossing_count: int
    none_count: int
    lsc_event_count: int
    rsc_event_count: int
    trials_run: int
    sigma_n: float
    backend: str

    @property
    def lsc_rate(self) -> float:
        return self.lsc_event_count / self.trials_run

    @property
    def rsc_rate(self) -> float:
        return self.rsc_event_count / self.trials_run

    @property
    def multi_rate(self) -> float:
        return self.multi_crossing_count / self.trials_run


def _worker_count(n_blocks: int) -> int:
    env = os.environ.get("AJSCC_THREADS")
    if env:
        cap = int(env)
        if cap < 1:
            raise ValueError(f"AJSCC_THREADS must be >= 1, got {env!r}")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_blocks))


def _block_partial(p, seed: int, b: int, n_b: int, backend: str):
    rng = np.random.Generator(np.random.Philox(key=[seed, b]))
    u = rng.random((p.n_dims + 1, n_b))
    sq = np.empty((p.n_dims, n_b))
    ids = np.empty(n_b, dtype=np.uint8)
    _kernels.simulate_block(u, p, sq, ids, backend=backend)
    dim_sums = [float(np.sum(sq[k])) for k in range(p.n_dims)]
    esum = sq[0].copy()
    for k in range(1, p.n_dims):
        esum += sq[k]
    sumsq = float(np.sum(esum * esum))
    counts = np.bincount(ids, minlength=_kernels.N_CASE_IDS)
    return dim_sums, sumsq, counts


def run(spec: SimulationSpec, backend: str | None = None) -> SimulationReport:
    """Simulate spec.trials channel uses; deterministic for fixed (spec, seed)."""
    used = backend if backend is not None else _kernels.resolve_backend()
    digital = isinstance(spec.sensor, Digital)
    p = _kernels.kernel_params(
        spec.config, spec.noise.sigma_n, spec.sources,
        digital, spec.sensor.n_bits if digital else 0,
    )
    trials = spec.trials
    n_blocks = (trials + BLOCK_TRIALS - 1) // BLOCK_TRIALS

    def job(b: int):
        n_b = min(BLOCK_TRIALS, trials - b * BLOCK_TRIALS)
        return _block_partial(p, spec.seed, b, n_b, used)

    if n_blocks == 1 or _worker_count(n_blocks) == 1:
        partials = [job(b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=_worker_count(n_blocks)) as pool:
            partials = list(pool.map(job, range(n_blocks)))

    n = spec.config.n_dims
    mse_per_dim = tuple(
        math.fsum(part[0][k] for part in partials) / trials for k in range(n)
    )
    mse_sum = sum(mse_per_dim)
    m2 = math.fsum(part[1] for part in partials) / trials
    if trials > 1:
        var = max(0.0, m2 - mse_sum * mse_sum) * (trials / (trials - 1))
        ci = _Z95 * math.sqrt(var / trials)
    else:
        ci = math.inf
    counts = np.zeros(_kernels.N_CASE_IDS, dtype=np.int64)
    for part in partials:
        counts += part[2]

    if n == 3:
        crossing_counts = {CASE_LABELS[i]: int(counts[i]) for i in range(20)}
    else:
        crossing_counts = {
            "nd_LSC": int(counts[_kernels.ID_ND_LSC]),
            "nd_RSC": int(counts[_kernels.ID_ND_RSC]),
        }
    multi = int(counts[_kernels.ID_MULTI_LSC] + counts[_kernels.ID_MULTI_RSC])
    lsc_events = int(
        sum(counts[i] for i in range(0, 20, 2))
        + counts[_kernels.ID_MULTI_LSC] + counts[_kernels.ID_ND_LSC]
    )
    rsc_events = int(
        sum(counts[i] for i in range(1, 20, 2))
        + counts[_kernels.ID_MULTI_RSC] + counts[_kernels.ID_ND_RSC]
    )
    return SimulationReport(
        mse_per_dim=mse_per_dim,
        mse_sum=mse_sum,
        ci_halfwidth=ci,
        crossing_counts=crossing_counts,
        multi_crossing_count=multi,
        none_count=int(counts[_kernels.ID_NONE]),
        lsc_event_count=lsc_events,
        rsc_event_count=rsc_events,
        trials_run=trials,
        sigma_n=spec.noise.sigma_n,
        backend=used,
    )


def _case_row(config: MappingConfig, t: int) -> int:
    """Positional sub-case row (0..9) of stage t for a 3-D mapping."""
    l1, l2 = config.levels
    k_y, k_z = stage_levels(config, t)
    if 0 < k_y < l1 - 1:
        return 0 if k_y % 2 == 0 else 1
    if k_y == 0:
        if k_z == 0:
            return 6
        if k_z == l2 - 1:
            return 7
        return 3 if k_z % 2 == 0 else 5
    if k_z == 0:
        return 8
    if k_z == l2 - 1:
        return 9
    return 2 if k_z % 2 == 0 else 4


def classify_crossing(config: MappingConfig, tx: LatticePoint, rx: LatticePoint,
                      n: float) -> CrossingCase:
    """Label the crossing event for transmitted tx, received rx, x-frame noise n.

    n is the noise expressed in the transmitted stage's x direction (the
    received within-stage coordinate before folding is x_s + n). Returns the
    'None' case when the noise keeps the point on its stage, 'Multi' when it
    jumps beyond an adjacent stage (or rx is inconsistent with a single
    crossing), and otherwise one of the twenty labeled sub-cases together
    with its displacement triple (nu_x, nu_y, nu_z).
    """
    if config.n_dims != 3:
        raise ValueError("classify_crossing is defined for n_dims == 3")
    d = config.d
    x_s = tx.x
    t_s = stage_index(config, tx.level_indices)
    lsc = n < -x_s
    rsc = n > d - x_s
    if not (lsc or rsc):
        return CrossingCase(label="None", nu=(0.0, 0.0, 0.0))
    t_r = stage_index(config, rx.level_indices)
    n_arc = n if t_s % 2 == 0 else -n
    m_s = t_s * d + (x_s if t_s % 2 == 0 else d - x_s)
    t_raw = math.floor((m_s + n_arc) / d)
    if abs(t_raw - t_s) > 1 or abs(t_r - t_s) > 1:
        return CrossingCase(label="Multi", nu=(math.nan, math.nan, math.nan))
    row = _case_row(config, t_s)
    lat_lsc, lat_rsc = _LATERAL[row]
    if lsc:
        nu_x = -x_s if lat_lsc is None else -n - 2.0 * x_s
        lat = lat_lsc
        label = CASE_LABELS[2 * row]
    else:
        nu_x = 2.0 * (d - x_s) - n
        lat = lat_rsc
        label = CASE_LABELS[2 * row + 1]
    nu_y = nu_z = 0.0
    if lat is not None:
        axis, sign = lat
        if axis == "y":
            nu_y = sign * config.deltas[0]
        else:
            nu_z = sign * config.deltas[1]
    return CrossingCase(label=label, nu=(nu_x, nu_y, nu_z))


def empirical_crossing_rates(spec: SimulationSpec, backend: str | None = None):
    """(lsc_hat, rsc_hat, per-case rates) with binomial 95% half-widths.

    The direction totals count every trial whose noise carried it past the
    left/right stage end, including multi-stage jumps and curve-end
    reflections — the same events the quadrature probabilities integrate.
    """
    report = run(spec, backend=backend)
    t = report.trials_run

    def rate(count: int) -> CaseRate:
        r = count / t
        ci = _Z95 * math.sqrt(r * (1.0 - r) / t)
        return CaseRate(count=count, rate=r, ci_halfwidth=ci)

    per_case = {label: rate(cnt) for label, cnt in report.crossing_counts.items()}
    per_case["Multi"] = rate(report.multi_crossing_count)
    per_case["None"] = rate(report.none_count)
    return report.lsc_rate, report.rsc_rate, per_case


def _trace(spec: SimulationSpec, block: int = 0):
    """Reference-backend per-trial intermediates for one block (diagnostics)."""
    digital = isinstance(spec.sensor, Digital)
    p = _kernels.kernel_params(
        spec.config, spec.noise.sigma_n, spec.sources,
        digital, spec.sensor.n_bits if digital else 0,
    )
    n_b = min(BLOCK_TRIALS, spec.trials - block * BLOCK_TRIALS)
    if n_b <= 0:
        raise ValueError(f"block {block} is outside the run's {spec.trials} trials")
    rng = np.random.Generator(np.random.Philox(key=[spec.seed, block]))
    u = rng.random((p.n_dims + 1, n_b))
    return _kernels.trace_block(u, p)

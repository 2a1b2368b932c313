"""Command-line front end: analyze / simulate / optimize / compare.

Outputs are CSV with a fixed column order and numbers printed via
format(x, '.{precision}g') (default 9 significant digits), so identical
inputs produce byte-identical files regardless of worker count.

Config files are flat key=value lines (# comments allowed); keys mirror the
long flag names. Explicit CLI flags override config values. Repeatable
values (source, l-range) join with ';' in a config file, numeric lists
(dmax, snr, nbits) with ','.

Exit codes: 0 success; 2 flag/config parse errors; 3 numeric validation
errors; 4 I/O errors.
"""
from __future__ import annotations

import argparse
import sys

from .analytic import (
    QuadratureError,
    SnrSpec,
    adc_mse_term,
    mse_high_3d,
    mse_high_digital,
    mse_high_nd,
    mse_low_3d,
    mse_low_digital,
    snr_to_sigma,
    x_source_from_s1,
)
from .curve import build_config
from .dist import Uniform, parse_source_spec
from .mc import Analog, Digital, SimulationSpec
from .mc import run as mc_run
from .opt import (
    AnalyticHigh,
    AnalyticLow,
    MonteCarlo,
    SweepSpec,
    grid_search,
    optimal_l_trend,
)

__all__ = ["main"]


class _ConfigError(Exception):
    """Config-file or flag-structure problem (exit 2)."""


_SCALAR_KEYS = (
    "out", "save_config", "precision", "snr_ref", "sigma", "n", "ranges",
    "levels", "sensor", "trials", "seed", "mode", "case_weighted",
)
_LIST_KEYS = ("dmax", "snr", "nbits", "source", "l_range")
_ALL_KEYS = _SCALAR_KEYS + _LIST_KEYS
# ';' separates repeated values in config files (source specs contain ',').
_SEMI_KEYS = ("source", "l_range")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ajscc",
        description="Serpentine N:1 analog mapping: analytic MSE, channel "
                    "simulation, and level-count optimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (
        ("analyze", "closed-form MSE breakdown for one configuration"),
        ("simulate", "Monte Carlo channel simulation report"),
        ("optimize", "grid search over level counts (surface or trend)"),
        ("compare", "paired analog vs digital-sensor MSE rows"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--save-config", dest="save_config",
                       help="write the resolved config to this path")
        p.add_argument("--out", help="output CSV path (default: stdout)")
        p.add_argument("--precision", help="CSV significant digits (default 9)")
        p.add_argument("--dmax", action="append",
                       help="total curve length; repeat or comma-join for sweeps")
        p.add_argument("--snr", action="append",
                       help="channel SNR in dB; repeat or comma-join for sweeps")
        p.add_argument("--snr-ref", dest="snr_ref", choices=("mapped", "source"),
                       help="power reference for --snr: 'mapped' (default) uses "
                            "the transmitted-value power D_max^2/3, 'source' "
                            "uses the dim-1 power R_1^2/3")
        p.add_argument("--sigma", help="explicit noise std dev (instead of --snr)")
        p.add_argument("--n", help="number of source dimensions (default 3)")
        p.add_argument("--ranges", help="comma-separated dimension ranges")
        p.add_argument("--levels", help="comma-separated level counts (N-1 values)")
        p.add_argument("--l-range", dest="l_range", action="append",
                       help="level grid lo:hi[:step] per compressed dim "
                            "(one value is shared by all)")
        p.add_argument("--source", action="append",
                       help="source law per dim: uniform:lo,hi or dbg:lo,hi,mu,sigma")
        p.add_argument("--sensor", choices=("analog", "digital"),
                       help="sensing front end (default analog)")
        p.add_argument("--nbits", action="append",
                       help="ADC bits; repeatable for compare")
        p.add_argument("--trials", help="Monte Carlo trials")
        p.add_argument("--seed", help="64-bit RNG seed (default 0)")
        p.add_argument("--mode", choices=("high", "low", "mc"),
                       help="objective: high-SNR formula, crossing-aware "
                            "formula, or simulation")
        p.add_argument("--case-weighted", dest="case_weighted",
                       action="store_const", const="true",
                       help="use occupancy-weighted lateral penalties in low mode")
    return parser


def _read_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as e:
        raise _ConfigError(f"cannot read config {path}: {e}") from e
    out: dict = {}
    for i, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise _ConfigError(f"{path}:{i}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _ALL_KEYS:
            raise _ConfigError(f"{path}:{i}: unknown key {key!r}")
        value = value.strip()
        if key in _LIST_KEYS:
            sep = ";" if key in _SEMI_KEYS else ","
            out[key] = [tok.strip() for tok in value.split(sep) if tok.strip()]
        else:
            out[key] = value
    return out


def _merge(ns: argparse.Namespace) -> dict:
    cfg = _read_config(ns.config) if ns.config else {}
    vals: dict = {}
    for key in _ALL_KEYS:
        cli = getattr(ns, key, None)
        if cli is not None:
            if key in _LIST_KEYS:
                flat: list = []
                for tok in cli:
                    sep = ";" if key in _SEMI_KEYS else ","
                    flat.extend(t.strip() for t in tok.split(sep) if t.strip())
                vals[key] = flat
            else:
                vals[key] = cli
        elif key in cfg:
            vals[key] = cfg[key]
    return vals


def _save_config(vals: dict, path: str) -> None:
    lines = []
    for key in _ALL_KEYS:
        if key in ("save_config",) or key not in vals:
            continue
        value = vals[key]
        if key in _LIST_KEYS:
            sep = ";" if key in _SEMI_KEYS else ","
            value = sep.join(value)
        lines.append(f"{key}={value}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _int(vals: dict, key: str, default=None) -> "int | None":
    if key not in vals:
        return default
    try:
        return int(vals[key])
    except ValueError:
        raise ValueError(f"--{key.replace('_', '-')} expects an integer, "
                         f"got {vals[key]!r}") from None


def _float_list(vals: dict, key: str) -> list:
    try:
        return [float(tok) for tok in vals.get(key, [])]
    except ValueError:
        raise ValueError(f"--{key} expects numbers, got {vals[key]!r}") from None


def _parse_l_range(text: str) -> tuple:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"--l-range expects lo:hi[:step], got {text!r}")
    try:
        lo, hi = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
    except ValueError:
        raise ValueError(f"--l-range expects integers, got {text!r}") from None
    return lo, hi, step


def _resolve_geometry(vals: dict):
    n_dims = _int(vals, "n")
    ranges_text = vals.get("ranges")
    if ranges_text:
        ranges = tuple(float(tok) for tok in ranges_text.split(",") if tok.strip())
        if n_dims is None:
            n_dims = len(ranges)
        elif len(ranges) != n_dims:
            raise ValueError(f"--ranges has {len(ranges)} values but --n is {n_dims}")
    else:
        if n_dims is None:
            n_dims = 3
        ranges = (1.0,) * n_dims
    return n_dims, ranges


def _resolve_levels(vals: dict, n_dims: int) -> tuple:
    text = vals.get("levels")
    if not text:
        raise ValueError("--levels is required for this command")
    levels = tuple(int(tok) for tok in text.split(",") if tok.strip())
    if len(levels) != n_dims - 1:
        raise ValueError(f"--levels needs {n_dims - 1} values, got {len(levels)}")
    return levels


def _resolve_snr(vals: dict) -> list:
    """List of SnrSpec (one per --snr value, or a single explicit sigma)."""
    sigma = vals.get("sigma")
    snr_list = _float_list(vals, "snr")
    if sigma is not None and snr_list:
        raise ValueError("give either --sigma or --snr, not both")
    if sigma is not None:
        return [SnrSpec.explicit(float(sigma))]
    if not snr_list:
        raise ValueError("a noise level is required: --snr DB or --sigma VALUE")
    ref = vals.get("snr_ref", "mapped")
    make = SnrSpec.mapped if ref == "mapped" else SnrSpec.source_power
    return [make(db) for db in snr_list]


def _resolve_sources(vals: dict, n_dims: int, ranges: tuple) -> tuple:
    texts = vals.get("source", [])
    sources = [parse_source_spec(t) for t in texts]
    if len(sources) > n_dims:
        raise ValueError(f"got {len(sources)} --source laws for {n_dims} dims")
    for k in range(len(sources), n_dims):
        sources.append(Uniform(0.0, ranges[k]))
    return tuple(sources)


def _resolve_sensor(vals: dict, nbits_list: list):
    sensor = vals.get("sensor", "analog")
    if sensor == "analog":
        return Analog()
    if len(nbits_list) != 1:
        raise ValueError("--sensor digital needs exactly one --nbits value")
    return Digital(n_bits=nbits_list[0])


def _quant_cols(n_dims: int) -> list:
    if n_dims == 3:
        return ["mse_quant_y", "mse_quant_z"]
    return [f"mse_quant_{k}" for k in range(2, n_dims + 1)]


def _fmt(x, prec: int) -> str:
    return format(x, f".{prec}g")


def _breakdown_row(levels: tuple, bd, mse_total: float, prec: int) -> list:
    cells = [str(l) for l in levels]
    if bd is None:
        comps = [0.0] * (len(levels) + 3)  # noise, quants, lsc, rsc
        cells += [_fmt(v, prec) for v in comps] + ["0", _fmt(mse_total, prec)]
    else:
        cells += [_fmt(bd.noise_term, prec)]
        cells += [_fmt(q, prec) for q in bd.quant_terms]
        cells += [_fmt(bd.lsc_term, prec), _fmt(bd.rsc_term, prec),
                  _fmt(bd.adc_term, prec), _fmt(mse_total, prec)]
    return cells


def _cmd_analyze(vals: dict, prec: int) -> str:
    n_dims, ranges = _resolve_geometry(vals)
    levels = _resolve_levels(vals, n_dims)
    d_max_list = _float_list(vals, "dmax")
    if len(d_max_list) != 1:
        raise ValueError("analyze needs exactly one --dmax")
    snr = _resolve_snr(vals)
    if len(snr) != 1:
        raise ValueError("analyze needs exactly one --snr (or --sigma)")
    config = build_config(n_dims, ranges, levels, d_max_list[0])
    noise = snr_to_sigma(config, snr[0])
    mode = vals.get("mode", "high")
    nbits_list = [int(t) for t in vals.get("nbits", [])]
    sensor = _resolve_sensor(vals, nbits_list)
    digital = isinstance(sensor, Digital)
    if mode == "high":
        if digital:
            bd = mse_high_digital(config, noise, sensor.n_bits)
        else:
            bd = mse_high_3d(config, noise) if n_dims == 3 else mse_high_nd(config, noise)
    elif mode == "low":
        if n_dims != 3:
            raise ValueError("--mode low models three-dimensional mappings only")
        sources = _resolve_sources(vals, n_dims, ranges)
        source_x = x_source_from_s1(config, sources[0])
        cw = vals.get("case_weighted", "false") == "true"
        if digital:
            bd = mse_low_digital(config, noise, source_x, sensor.n_bits,
                                 case_weighted=cw, source_2=sources[1],
                                 source_3=sources[2])
        else:
            bd = mse_low_3d(config, noise, source_x, case_weighted=cw,
                            source_2=sources[1], source_3=sources[2])
    else:
        raise ValueError("analyze supports --mode high|low")
    header = [f"L{i}" for i in range(1, n_dims)] + ["mse_noise"] + \
        _quant_cols(n_dims) + ["mse_lsc", "mse_rsc", "mse_adc", "mse_total"]
    row = _breakdown_row(levels, bd, bd.total, prec)
    return ",".join(header) + "\n" + ",".join(row) + "\n"


def _cmd_simulate(vals: dict, prec: int) -> str:
    n_dims, ranges = _resolve_geometry(vals)
    levels = _resolve_levels(vals, n_dims)
    d_max_list = _float_list(vals, "dmax")
    if len(d_max_list) != 1:
        raise ValueError("simulate needs exactly one --dmax")
    snr = _resolve_snr(vals)
    if len(snr) != 1:
        raise ValueError("simulate needs exactly one --snr (or --sigma)")
    config = build_config(n_dims, ranges, levels, d_max_list[0])
    noise = snr_to_sigma(config, snr[0])
    sources = _resolve_sources(vals, n_dims, ranges)
    nbits_list = [int(t) for t in vals.get("nbits", [])]
    sensor = _resolve_sensor(vals, nbits_list)
    trials = _int(vals, "trials", 100_000)
    seed = _int(vals, "seed", 0)
    spec = SimulationSpec(config=config, noise=noise, sources=sources,
                          sensor=sensor, trials=trials, seed=seed)
    report = mc_run(spec)
    header = ["trials", "seed", "sigma_n"] + \
        [f"mse_dim{k}" for k in range(1, n_dims + 1)] + \
        ["mse_sum", "ci95", "lsc_rate", "rsc_rate", "multi_rate"]
    row = [str(trials), str(seed), _fmt(report.sigma_n, prec)]
    row += [_fmt(v, prec) for v in report.mse_per_dim]
    row += [_fmt(report.mse_sum, prec), _fmt(report.ci_halfwidth, prec),
            _fmt(report.lsc_rate, prec), _fmt(report.rsc_rate, prec),
            _fmt(report.multi_rate, prec)]
    return ",".join(header) + "\n" + ",".join(row) + "\n"


def _resolve_objective(vals: dict, n_dims: int, ranges: tuple):
    mode = vals.get("mode", "high")
    if mode == "high":
        return AnalyticHigh()
    if mode == "low":
        if n_dims != 3:
            raise ValueError("--mode low models three-dimensional mappings only")
        sources = _resolve_sources(vals, n_dims, ranges)
        cw = vals.get("case_weighted", "false") == "true"
        return AnalyticLow(source_1=sources[0], case_weighted=cw,
                           source_2=sources[1], source_3=sources[2])
    return MonteCarlo(trials=_int(vals, "trials", 100_000),
                      seed=_int(vals, "seed", 0))


def _cmd_optimize(vals: dict, prec: int) -> str:
    n_dims, ranges = _resolve_geometry(vals)
    d_max_list = _float_list(vals, "dmax")
    if not d_max_list:
        raise ValueError("optimize needs --dmax")
    snr_list = _resolve_snr(vals)
    l_texts = vals.get("l_range", [])
    if not l_texts:
        raise ValueError("optimize needs --l-range lo:hi[:step]")
    l_ranges = [_parse_l_range(t) for t in l_texts]
    if len(l_ranges) == 1:
        l_ranges = l_ranges * (n_dims - 1)
    if len(l_ranges) != n_dims - 1:
        raise ValueError(f"--l-range needs 1 or {n_dims - 1} values, "
                         f"got {len(l_ranges)}")
    nbits_list = [int(t) for t in vals.get("nbits", [])]
    sensor = _resolve_sensor(vals, nbits_list)
    objective = _resolve_objective(vals, n_dims, ranges)
    sweep = SweepSpec(n_dims=n_dims, ranges=ranges, d_max=d_max_list[0],
                      snr=snr_list[0], l_ranges=tuple(l_ranges),
                      objective=objective, sensor=sensor)
    if len(d_max_list) > 1 or len(snr_list) > 1:
        if vals.get("sigma") is not None:
            raise ValueError("trend sweeps need --snr values, not --sigma")
        snr_dbs = [s.snr_db for s in snr_list]
        rows = optimal_l_trend(sweep, d_max_list, snr_dbs)
        header = ["D_max", "snr_db"] + \
            [f"L{i}_opt" for i in range(1, n_dims)] + ["mse_min"]
        lines = [",".join(header)]
        for row in rows:
            cells = [_fmt(row.d_max, prec), _fmt(row.snr_db, prec)]
            cells += [str(l) for l in row.argmin]
            cells.append(_fmt(row.mse_min, prec))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"
    result = grid_search(sweep)
    header = [f"L{i}" for i in range(1, n_dims)] + ["mse_noise"] + \
        _quant_cols(n_dims) + ["mse_lsc", "mse_rsc", "mse_adc", "mse_total"]
    lines = [",".join(header)]
    for entry in result.grid:
        lines.append(",".join(_breakdown_row(entry.levels, entry.breakdown,
                                             entry.mse, prec)))
    return "\n".join(lines) + "\n"


def _cmd_compare(vals: dict, prec: int) -> str:
    n_dims, ranges = _resolve_geometry(vals)
    levels = _resolve_levels(vals, n_dims)
    d_max_list = _float_list(vals, "dmax")
    if len(d_max_list) != 1:
        raise ValueError("compare needs exactly one --dmax")
    snr = _resolve_snr(vals)
    if len(snr) != 1:
        raise ValueError("compare needs exactly one --snr (or --sigma)")
    nbits_list = [int(t) for t in vals.get("nbits", [])]
    if not nbits_list:
        raise ValueError("compare needs at least one --nbits")
    config = build_config(n_dims, ranges, levels, d_max_list[0])
    noise = snr_to_sigma(config, snr[0])
    mode = vals.get("mode", "high")
    sources = _resolve_sources(vals, n_dims, ranges)
    cw = vals.get("case_weighted", "false") == "true"
    trials = _int(vals, "trials", 100_000)
    seed = _int(vals, "seed", 0)
    header = [f"L{i}" for i in range(1, n_dims)] + \
        ["nbits", "mode", "mse_analog", "mse_digital", "gap", "adc_term"]
    lines = [",".join(header)]
    for n_bits in nbits_list:
        if mode == "high":
            analog = (mse_high_3d(config, noise) if n_dims == 3
                      else mse_high_nd(config, noise)).total
            digital = mse_high_digital(config, noise, n_bits).total
        elif mode == "low":
            if n_dims != 3:
                raise ValueError("--mode low models three-dimensional mappings only")
            source_x = x_source_from_s1(config, sources[0])
            analog = mse_low_3d(config, noise, source_x, case_weighted=cw,
                                source_2=sources[1], source_3=sources[2]).total
            digital = mse_low_digital(config, noise, source_x, n_bits,
                                      case_weighted=cw, source_2=sources[1],
                                      source_3=sources[2]).total
        else:
            base = dict(config=config, noise=noise, sources=sources,
                        trials=trials, seed=seed)
            analog = mc_run(SimulationSpec(sensor=Analog(), **base)).mse_sum
            digital = mc_run(SimulationSpec(sensor=Digital(n_bits=n_bits),
                                            **base)).mse_sum
        cells = [str(l) for l in levels] + [str(n_bits), mode]
        cells += [_fmt(analog, prec), _fmt(digital, prec),
                  _fmt(digital - analog, prec),
                  _fmt(adc_mse_term(config.ranges[0], n_bits), prec)]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


_COMMANDS = {
    "analyze": _cmd_analyze,
    "simulate": _cmd_simulate,
    "optimize": _cmd_optimize,
    "compare": _cmd_compare,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        code = e.code
        return int(code) if code else 0
    try:
        vals = _merge(ns)
        if "save_config" in vals:
            _save_config(vals, vals["save_config"])
        prec = _int(vals, "precision", 9)
        if prec < 1 or prec > 17:
            raise ValueError(f"--precision must be in [1, 17], got {prec}")
        text = _COMMANDS[ns.command](vals, prec)
        out = vals.get("out")
        if out:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    except _ConfigError as e:
        print(f"ajscc: config error: {e}", file=sys.stderr)
        return 2
    except (ValueError, QuadratureError) as e:
        print(f"ajscc: invalid run: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"ajscc: i/o error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

"""Kernel backend selection: compiled Cython loop or vectorized NumPy.

Both backends implement the same per-trial arithmetic in the same operation
order and produce bit-identical results; the compiled one is simply faster
per block. Selection:

    AJSCC_BACKEND=auto    (default) compiled if available, else NumPy
    AJSCC_BACKEND=cython  require the compiled kernel (error if missing)
    AJSCC_BACKEND=python  force the NumPy reference kernel
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import _ref
from ._ref import (
    ID_MULTI_LSC,
    ID_MULTI_RSC,
    ID_ND_LSC,
    ID_ND_RSC,
    ID_NONE,
    N_CASE_IDS,
)

try:
    from . import _serpentine as _compiled
except ImportError:  # built without a compiler / AJSCC_PURE_PYTHON=1
    _compiled = None

__all__ = [
    "KernelParams",
    "kernel_params",
    "simulate_block",
    "trace_block",
    "resolve_backend",
    "have_compiled",
    "N_CASE_IDS",
    "ID_NONE",
    "ID_MULTI_LSC",
    "ID_MULTI_RSC",
    "ID_ND_LSC",
    "ID_ND_RSC",
]


@dataclass(frozen=True, eq=False)
class KernelParams:
    """Flattened per-run constants shared by both kernel backends."""

    n_dims: int
    digital: int
    adc_delta: float
    adc_max: float
    dr1: float
    rd1: float
    d: float
    d_max: float
    t_last: float
    sigma_n: float
    n_stages: int
    weights: np.ndarray = field(repr=False)
    deltas: np.ndarray = field(repr=False)
    levels: np.ndarray = field(repr=False)
    src_kind: np.ndarray = field(repr=False)
    src_lo: np.ndarray = field(repr=False)
    src_hi: np.ndarray = field(repr=False)
    src_mu: np.ndarray = field(repr=False)
    src_sigma: np.ndarray = field(repr=False)


def kernel_params(config, sigma_n: float, sources, digital: bool, n_bits: int) -> KernelParams:
    """Build the flat parameter block from a MappingConfig and source laws."""
    n = config.n_dims
    kind = np.zeros(n, dtype=np.int64)
    lo = np.zeros(n)
    hi = np.zeros(n)
    mu = np.zeros(n)
    sg = np.ones(n)
    for k, dist in enumerate(sources):
        if hasattr(dist, "sigma"):
            kind[k] = 1
            mu[k] = dist.mu
            sg[k] = dist.sigma
        lo[k] = dist.lo
        hi[k] = dist.hi
    if digital:
        adc_max = float((1 << n_bits) - 1)
        adc_delta = config.ranges[0] / adc_max
    else:
        adc_max = 0.0
        adc_delta = 1.0
    return KernelParams(
        n_dims=n,
        digital=int(digital),
        adc_delta=adc_delta,
        adc_max=adc_max,
        dr1=config.d / config.ranges[0],
        rd1=config.ranges[0] / config.d,
        d=config.d,
        d_max=config.d_max,
        t_last=float(config.n_stages - 1),
        sigma_n=float(sigma_n),
        n_stages=config.n_stages,
        weights=np.asarray(config.fold_weights, dtype=np.int64),
        deltas=np.asarray(config.deltas, dtype=np.float64),
        levels=np.asarray(config.levels, dtype=np.int64),
        src_kind=kind,
        src_lo=lo,
        src_hi=hi,
        src_mu=mu,
        src_sigma=sg,
    )


def have_compiled() -> bool:
    return _compiled is not None


def resolve_backend() -> str:
    """Active backend name, re-reading AJSCC_BACKEND on every call."""
    choice = os.environ.get("AJSCC_BACKEND", "auto").lower()
    if choice in ("auto", ""):
        return "cython" if _compiled is not None else "python"
    if choice == "cython":
        if _compiled is None:
            raise RuntimeError(
                "AJSCC_BACKEND=cython but the compiled kernel is not installed"
            )
        return "cython"
    if choice == "python":
        return "python"
    raise ValueError(f"unknown AJSCC_BACKEND value {choice!r}")


def simulate_block(u, p: KernelParams, sq, ids, backend: str | None = None):
    """Run one block of trials on the selected backend, writing sq and ids."""
    b = backend if backend is not None else resolve_backend()
    if b == "cython":
        _compiled.simulate_block(
            u, p.src_kind, p.src_lo, p.src_hi, p.src_mu, p.src_sigma,
            p.digital, p.adc_delta, p.adc_max, p.dr1, p.rd1, p.d, p.d_max,
            p.t_last, p.weights, p.deltas, p.levels, p.sigma_n, sq, ids,
        )
        return sq, ids
    return _ref.simulate_block(u, p, sq, ids)


def trace_block(u, p: KernelParams):
    """Per-trial intermediates (reference backend); for geometry diagnostics."""
    return _ref.trace_block(u, p)

"""Vectorized NumPy simulation kernel (reference backend).

Transforms one block of pre-drawn uniforms into per-trial squared decoding
errors and crossing-case ids. The compiled backend performs the same
arithmetic in the same order, one trial at a time; keep the two in lockstep
op for op (including clamp style and parenthesization) — backend bit
equality is a tested contract.

Crossing-case id map (uint8):
    0..19  the twenty labeled 3-D single-crossing sub-cases,
           2*row + dir with rows [a1 a2 b1 b2 b3 b4 c1 c2 c3 c4],
           dir 0 = LSC, 1 = RSC
    20     no crossing
    21/22  multi-stage crossing, left / right
    23/24  generic single crossing, left / right (n_dims != 3)
"""
from __future__ import annotations

import numpy as np
from scipy.special import ndtri

N_CASE_IDS = 25
ID_NONE = 20
ID_MULTI_LSC = 21
ID_MULTI_RSC = 22
ID_ND_LSC = 23
ID_ND_RSC = 24


def simulate_block(u, p, sq, ids):
    """Fill sq (n_dims, B) and ids (B,) from uniforms u ((n_dims+1, B))."""
    n = p.n_dims
    b = u.shape[1]

    s = np.empty((n, b))
    for k in range(n):
        if p.src_kind[k] == 0:
            s[k] = p.src_lo[k] + u[k] * (p.src_hi[k] - p.src_lo[k])
        else:
            v = p.src_mu[k] + p.src_sigma[k] * ndtri(u[k])
            s[k] = np.minimum(np.maximum(v, p.src_lo[k]), p.src_hi[k])

    if p.digital:
        q = np.floor(s[0] / p.adc_delta + 0.5)
        q = np.minimum(np.maximum(q, 0.0), p.adc_max)
        s1e = q * p.adc_delta
    else:
        s1e = s[0]
    x = s1e * p.dr1

    ks = np.empty((n - 1, b), dtype=np.int64)
    for j in range(n - 1):
        kf = np.floor(s[j + 1] / p.deltas[j] + 0.5)
        kf = np.minimum(np.maximum(kf, 0.0), float(p.levels[j] - 1))
        ks[j] = kf.astype(np.int64)

    t = ks[0].copy()
    for j in range(1, n - 1):
        w = int(p.weights[j])
        t = np.where(ks[j] % 2 == 0, ks[j] * w + t, ks[j] * w + (w - 1 - t))

    t_even = t % 2 == 0
    td = t * p.d
    m = np.where(t_even, td + x, td + (p.d - x))
    m = np.minimum(np.maximum(m, 0.0), p.d_max)

    if p.sigma_n == 0.0:
        n_arc = np.zeros(b)
    else:
        n_arc = p.sigma_n * ndtri(u[n])
    m_raw = m + n_arc
    m_r = np.minimum(np.maximum(m_raw, 0.0), p.d_max)

    trf = np.floor(m_r / p.d)
    trf = np.minimum(trf, p.t_last)
    tr = trf.astype(np.int64)
    ur = m_r - trf * p.d
    ur = np.minimum(np.maximum(ur, 0.0), p.d)
    x_r = np.where(tr % 2 == 0, ur, p.d - ur)

    e = s[0] - x_r * p.rd1
    sq[0] = e * e
    rem = tr.copy()
    for j in range(n - 2, 0, -1):
        w = int(p.weights[j])
        kj = rem // w
        rem = rem - kj * w
        rem = np.where(kj % 2 == 1, w - 1 - rem, rem)
        e = s[j + 1] - kj * p.deltas[j]
        sq[j + 1] = e * e
    e = s[1] - rem * p.deltas[0]
    sq[1] = e * e

    _classify(p, t, t_even, x, n_arc, m_raw, ids)
    return sq, ids


def _classify(p, t, t_even, x, n_arc, m_raw, ids):
    n_x = np.where(t_even, n_arc, -n_arc)
    lsc = n_x < -x
    rsc = n_x > p.d - x
    t_raw = np.floor(m_raw / p.d)
    multi = np.abs(t_raw - t) > 1.0

    if p.n_dims == 3:
        l1 = int(p.levels[0])
        l2 = int(p.levels[1])
        k_z = t // l1
        j = t - k_z * l1
        k_y = np.where(k_z % 2 == 0, j, l1 - 1 - j)
        top = k_y == l1 - 1
        bot = k_y == 0
        first = k_z == 0
        last = k_z == l2 - 1
        interior_plane = ~first & ~last
        plane_odd = k_z % 2 == 0  # 1-based plane number is odd
        row = np.where(k_y % 2 == 0, 0, 1)
        row = np.where(top & interior_plane, np.where(plane_odd, 2, 4), row)
        row = np.where(bot & interior_plane, np.where(plane_odd, 3, 5), row)
        row = np.where(bot & first, 6, row)
        row = np.where(bot & last, 7, row)
        row = np.where(top & first, 8, row)
        row = np.where(top & last, 9, row)
        single = 2 * row + np.where(lsc, 0, 1)
    else:
        single = np.where(lsc, ID_ND_LSC, ID_ND_RSC)

    out = np.where(
        lsc | rsc,
        np.where(multi, np.where(lsc, ID_MULTI_LSC, ID_MULTI_RSC), single),
        ID_NONE,
    )
    ids[:] = out.astype(np.uint8)


def trace_block(u, p):
    """Debug variant: full per-trial intermediates for geometry tests."""
    n = p.n_dims
    b = u.shape[1]
    sq = np.empty((n, b))
    ids = np.empty(b, dtype=np.uint8)
    simulate_block(u, p, sq, ids)

    # Recompute the forward pass to expose intermediates (same arithmetic).
    s = np.empty((n, b))
    for k in range(n):
        if p.src_kind[k] == 0:
            s[k] = p.src_lo[k] + u[k] * (p.src_hi[k] - p.src_lo[k])
        else:
            v = p.src_mu[k] + p.src_sigma[k] * ndtri(u[k])
            s[k] = np.minimum(np.maximum(v, p.src_lo[k]), p.src_hi[k])
    if p.digital:
        q = np.floor(s[0] / p.adc_delta + 0.5)
        q = np.minimum(np.maximum(q, 0.0), p.adc_max)
        s1e = q * p.adc_delta
    else:
        s1e = s[0]
    x = s1e * p.dr1
    ks = np.empty((n - 1, b), dtype=np.int64)
    for j in range(n - 1):
        kf = np.floor(s[j + 1] / p.deltas[j] + 0.5)
        kf = np.minimum(np.maximum(kf, 0.0), float(p.levels[j] - 1))
        ks[j] = kf.astype(np.int64)
    t = ks[0].copy()
    for j in range(1, n - 1):
        w = int(p.weights[j])
        t = np.where(ks[j] % 2 == 0, ks[j] * w + t, ks[j] * w + (w - 1 - t))
    t_even = t % 2 == 0
    m = np.where(t_even, t * p.d + x, t * p.d + (p.d - x))
    m = np.minimum(np.maximum(m, 0.0), p.d_max)
    if p.sigma_n == 0.0:
        n_arc = np.zeros(b)
    else:
        n_arc = p.sigma_n * ndtri(u[n])
    m_raw = m + n_arc
    m_r = np.minimum(np.maximum(m_raw, 0.0), p.d_max)
    trf = np.minimum(np.floor(m_r / p.d), p.t_last)
    tr = trf.astype(np.int64)
    ur = np.minimum(np.maximum(m_r - trf * p.d, 0.0), p.d)
    x_r = np.where(tr % 2 == 0, ur, p.d - ur)
    sdec = np.empty((n, b))
    sdec[0] = x_r * p.rd1
    rem = tr.copy()
    for j in range(n - 2, 0, -1):
        w = int(p.weights[j])
        kj = rem // w
        rem = rem - kj * w
        rem = np.where(kj % 2 == 1, w - 1 - rem, rem)
        sdec[j + 1] = kj * p.deltas[j]
    sdec[1] = rem * p.deltas[0]
    return {
        "s": s, "x": x, "ks": ks, "t": t, "m": m, "n_arc": n_arc,
        "m_raw": m_raw, "m_r": m_r, "t_r": tr, "x_r": x_r,
        "sdec": sdec, "sq": sq, "ids": ids,
    }

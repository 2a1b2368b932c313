# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled per-trial simulation kernel.

Scalar mirror of the vectorized NumPy reference backend; every floating
operation is written in the same order with the same parenthesization so the
two backends produce bit-identical output (the build disables FMA
contraction for the same reason). See _ref.py for the case-id map.
"""
from libc.math cimport fabs, floor

from scipy.special.cython_special cimport ndtri

DEF MAX_DIMS = 32

cdef inline double _clampd(double v, double lo, double hi) nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


def simulate_block(double[:, ::1] u,
                   long[::1] src_kind, double[::1] src_lo, double[::1] src_hi,
                   double[::1] src_mu, double[::1] src_sigma,
                   int digital, double adc_delta, double adc_max,
                   double dr1, double rd1, double d, double d_max,
                   double t_last, long[::1] weights, double[::1] deltas,
                   long[::1] levels, double sigma_n,
                   double[:, ::1] sq, unsigned char[::1] ids):
    cdef Py_ssize_t b = u.shape[1]
    cdef int n = <int> (u.shape[0] - 1)
    cdef Py_ssize_t i
    cdef int k, j
    cdef double s[MAX_DIMS]
    cdef long ks[MAX_DIMS]
    cdef double v, s1e, q, x, td, m, n_arc, m_raw, m_r, trf, ur, x_r, e, kf
    cdef double n_x, t_rawf
    cdef long t, w, kj, rem, tr, l1, l2, k_z, k_y, jj, row
    cdef bint lsc, rsc
    cdef unsigned char cid

    if n + 1 > MAX_DIMS:
        raise ValueError("too many dimensions for the compiled kernel")

    l1 = levels[0]
    l2 = levels[1] if n >= 3 else 0

    with nogil:
        for i in range(b):
            for k in range(n):
                if src_kind[k] == 0:
                    s[k] = src_lo[k] + u[k, i] * (src_hi[k] - src_lo[k])
                else:
                    v = src_mu[k] + src_sigma[k] * ndtri(u[k, i])
                    s[k] = _clampd(v, src_lo[k], src_hi[k])

            if digital:
                q = floor(s[0] / adc_delta + 0.5)
                q = _clampd(q, 0.0, adc_max)
                s1e = q * adc_delta
            else:
                s1e = s[0]
            x = s1e * dr1

            for j in range(n - 1):
                kf = floor(s[j + 1] / deltas[j] + 0.5)
                kf = _clampd(kf, 0.0, <double> (levels[j] - 1))
                ks[j] = <long> kf

            t = ks[0]
            for j in range(1, n - 1):
                w = weights[j]
                if ks[j] % 2 == 0:
                    t = ks[j] * w + t
                else:
                    t = ks[j] * w + (w - 1 - t)

            td = t * d
            if t % 2 == 0:
                m = td + x
            else:
                m = td + (d - x)
            m = _clampd(m, 0.0, d_max)

            if sigma_n == 0.0:
                n_arc = 0.0
            else:
                n_arc = sigma_n * ndtri(u[n, i])
            m_raw = m + n_arc
            m_r = _clampd(m_raw, 0.0, d_max)

            trf = floor(m_r / d)
            if trf > t_last:
                trf = t_last
            tr = <long> trf
            ur = m_r - trf * d
            ur = _clampd(ur, 0.0, d)
            if tr % 2 == 0:
                x_r = ur
            else:
                x_r = d - ur

            e = s[0] - x_r * rd1
            sq[0, i] = e * e
            rem = tr
            for j in range(n - 2, 0, -1):
                w = weights[j]
                kj = rem // w
                rem = rem - kj * w
                if kj % 2 == 1:
                    rem = w - 1 - rem
                e = s[j + 1] - kj * deltas[j]
                sq[j + 1, i] = e * e
            e = s[1] - rem * deltas[0]
            sq[1, i] = e * e

            # -- crossing classification --
            if t % 2 == 0:
                n_x = n_arc
            else:
                n_x = -n_arc
            lsc = n_x < -x
            rsc = n_x > d - x
            if not (lsc or rsc):
                cid = 20
            else:
                t_rawf = floor(m_raw / d)
                if fabs(t_rawf - <double> t) > 1.0:
                    cid = 21 if lsc else 22
                elif n != 3:
                    cid = 23 if lsc else 24
                else:
                    k_z = t // l1
                    jj = t - k_z * l1
                    if k_z % 2 == 0:
                        k_y = jj
                    else:
                        k_y = l1 - 1 - jj
                    if 0 < k_y < l1 - 1:
                        row = 0 if k_y % 2 == 0 else 1
                    elif k_y == 0:
                        if k_z == 0:
                            row = 6
                        elif k_z == l2 - 1:
                            row = 7
                        else:
                            row = 3 if k_z % 2 == 0 else 5
                    else:
                        if k_z == 0:
                            row = 8
                        elif k_z == l2 - 1:
                            row = 9
                        else:
                            row = 2 if k_z % 2 == 0 else 4
                    cid = <unsigned char> (2 * row + (0 if lsc else 1))
            ids[i] = cid
    return None

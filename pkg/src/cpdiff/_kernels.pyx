# cython: language_level=3
"""Compiled hot loops. ``_pykernels`` mirrors every function here."""

import numpy as np
cimport numpy as cnp
from libc.math cimport ceil, floor, sqrt, sin, cos, fabs, round as cround, M_PI

cnp.import_array()


cdef inline void _neumaier(double *s, double *c, double x) noexcept nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


def compensated_sum(const double[::1] values):
    cdef Py_ssize_t i, n = values.shape[0]
    cdef double s = 0.0, c = 0.0
    with nogil:
        for i in range(n):
            _neumaier(&s, &c, values[i])
    return s + c


def phase_sum(const double[:, ::1] positions, const double[::1] w_re,
              const double[::1] w_im, const double[::1] k):
    """Compensated sum of w_j * exp(-2 pi i k.x_j)."""
    cdef Py_ssize_t i, j, n = positions.shape[0], d = positions.shape[1]
    cdef double sr = 0.0, cr = 0.0, si = 0.0, ci = 0.0
    cdef double t, ph, cs, sn
    with nogil:
        for i in range(n):
            t = 0.0
            for j in range(d):
                t += k[j] * positions[i, j]
            t = t - cround(t)
            ph = -2.0 * M_PI * t
            cs = cos(ph)
            sn = sin(ph)
            _neumaier(&sr, &cr, w_re[i] * cs - w_im[i] * sn)
            _neumaier(&si, &ci, w_re[i] * sn + w_im[i] * cs)
    return complex(sr + cr, si + ci)


cdef inline bint _interval(const double *u, const double *v, Py_ssize_t n,
                           double rad, double *lo, double *hi) noexcept nogil:
    # {t : |u + t v| <= rad}, intersected into [lo, hi]; False if empty
    cdef double a = 0.0, b = 0.0, c = 0.0, disc, sq, t0, t1
    cdef Py_ssize_t j
    for j in range(n):
        a += v[j] * v[j]
        b += u[j] * v[j]
        c += u[j] * u[j]
    c -= rad * rad
    if a == 0.0:
        return c <= 0.0
    disc = b * b - a * c
    if disc < 0.0:
        return False
    sq = sqrt(disc)
    t0 = (-b - sq) / a
    t1 = (-b + sq) / a
    if t0 > lo[0]:
        lo[0] = t0
    if t1 < hi[0]:
        hi[0] = t1
    return lo[0] <= hi[0]


def enumerate_candidates(const double[:, ::1] basis, Py_ssize_t d,
                         const double[::1] a, double r,
                         const double[::1] u, double t,
                         const long[::1] box_lo, const long[::1] box_hi,
                         Py_ssize_t cap):
    """Integer coordinates whose image may lie in B_r(a) x B_t(u).

    The first n-1 coordinates range over the box; the admissible range of
    the last one is solved exactly per prefix and padded by one step.
    """
    cdef Py_ssize_t n = basis.shape[0], m = n - d
    cdef Py_ssize_t i, j, p, count = 0, cap_out = 1024
    cdef long c_last, c_lo, c_hi
    cdef double lo, hi
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out = np.empty((cap_out, n), dtype=np.int64)
    cdef long[::1] prefix = np.array(box_lo[: n - 1], dtype=np.int_)
    cdef double[::1] ud = np.empty(max(d, 1)), vd = np.empty(max(d, 1))
    cdef double[::1] ui = np.empty(max(m, 1)), vi = np.empty(max(m, 1))
    cdef bint done = False
    for j in range(d):
        vd[j] = basis[j, n - 1]
    for j in range(m):
        vi[j] = basis[d + j, n - 1]
    while not done:
        for j in range(d):
            ud[j] = -a[j]
            for p in range(n - 1):
                ud[j] += basis[j, p] * prefix[p]
        for j in range(m):
            ui[j] = -u[j]
            for p in range(n - 1):
                ui[j] += basis[d + j, p] * prefix[p]
        lo = <double> box_lo[n - 1]
        hi = <double> box_hi[n - 1]
        if (_interval(&ud[0], &vd[0], d, r, &lo, &hi)
                and _interval(&ui[0], &vi[0], m, t, &lo, &hi)):
            c_lo = <long> ceil(lo) - 1
            c_hi = <long> floor(hi) + 1
            if c_lo < box_lo[n - 1]:
                c_lo = box_lo[n - 1]
            if c_hi > box_hi[n - 1]:
                c_hi = box_hi[n - 1]
            for c_last in range(c_lo, c_hi + 1):
                if count >= cap:
                    raise OverflowError(count)
                if count == cap_out:
                    cap_out *= 2
                    out = np.resize(out, (cap_out, n))
                for p in range(n - 1):
                    out[count, p] = prefix[p]
                out[count, n - 1] = c_last
                count += 1
        # odometer over the prefix box
        i = n - 2
        while i >= 0:
            prefix[i] += 1
            if prefix[i] <= box_hi[i]:
                break
            prefix[i] = box_lo[i]
            i -= 1
        if i < 0:
            done = True
    return out[:count].copy()


def walk_histogram(const cnp.uint8_t[:, ::1] is_u, double step_u, double step_v,
                   double lo, double width, Py_ssize_t nbins):
    """Bin every vertex of every walk; returns (counts, overflow, sum, sumsq)."""
    cdef Py_ssize_t s, j, idx, M = is_u.shape[0], N = is_u.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(nbins, dtype=np.int64)
    cdef cnp.int64_t[::1] cv = counts
    cdef long long overflow = 0
    cdef double x, q, tot = 0.0, tot2 = 0.0
    with nogil:
        for s in range(M):
            x = 0.0
            for j in range(N + 1):
                if j > 0:
                    x = x + (step_u if is_u[s, j - 1] else step_v)
                q = floor((x - lo) / width)
                if q >= 0 and q < nbins:
                    cv[<Py_ssize_t> q] += 1
                else:
                    overflow += 1
                tot += x
                tot2 += x * x
    return counts, int(overflow), tot, tot2

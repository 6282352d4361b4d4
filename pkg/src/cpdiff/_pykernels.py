"""Pure-Python/numpy versions of the kernels in ``_kernels.pyx``.

Same signatures and same results up to floating-point rounding; the walk
histogram is bit-identical because both accumulate sequentially.
"""

import math

import numpy as np


def compensated_sum(values):
    return math.fsum(np.asarray(values, dtype=float))


def phase_sum(positions, w_re, w_im, k):
    t = np.asarray(positions) @ np.asarray(k)
    t = t - np.round(t)
    ph = -2.0 * np.pi * t
    cs, sn = np.cos(ph), np.sin(ph)
    re = math.fsum(w_re * cs - w_im * sn)
    im = math.fsum(w_re * sn + w_im * cs)
    return complex(re, im)


def _interval(u, v, rad, lo, hi):
    # vectorized over rows of u: {t : |u + t v| <= rad} intersected with [lo, hi]
    a = float(v @ v)
    c = np.einsum("ij,ij->i", u, u) - rad * rad
    if a == 0.0:
        ok = c <= 0.0
        return lo, hi, ok
    b = u @ v
    disc = b * b - a * c
    ok = disc >= 0.0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    lo = np.maximum(lo, (-b - sq) / a)
    hi = np.minimum(hi, (-b + sq) / a)
    return lo, hi, ok & (lo <= hi)


def enumerate_candidates(basis, d, a, r, u, t, box_lo, box_hi, cap):
    n = basis.shape[0]
    axes = [np.arange(box_lo[i], box_hi[i] + 1) for i in range(n - 1)]
    if axes:
        grid = np.meshgrid(*axes, indexing="ij")
        prefix = np.stack([g.ravel() for g in grid], axis=1)
    else:
        prefix = np.zeros((1, 0), dtype=np.int64)
    partial = prefix @ basis[:, : n - 1].T
    last = basis[:, n - 1]
    lo = np.full(len(prefix), float(box_lo[n - 1]))
    hi = np.full(len(prefix), float(box_hi[n - 1]))
    lo, hi, ok_d = _interval(partial[:, :d] - a, last[:d], r, lo, hi)
    lo, hi, ok_i = _interval(partial[:, d:] - u, last[d:], t, lo, hi)
    ok = ok_d & ok_i
    c_lo = np.maximum(np.ceil(lo[ok]).astype(np.int64) - 1, box_lo[n - 1])
    c_hi = np.minimum(np.floor(hi[ok]).astype(np.int64) + 1, box_hi[n - 1])
    lengths = np.maximum(c_hi - c_lo + 1, 0)
    total = int(lengths.sum())
    if total > cap:
        raise OverflowError(total)
    rows = np.repeat(prefix[ok], lengths, axis=0)
    starts = np.repeat(c_lo, lengths)
    offsets = np.arange(total) - np.repeat(np.cumsum(lengths) - lengths, lengths)
    return np.concatenate([rows, (starts + offsets)[:, None]], axis=1).astype(np.int64)


def walk_histogram(is_u, step_u, step_v, lo, width, nbins):
    M, N = is_u.shape
    steps = np.where(is_u.astype(bool), step_u, step_v)
    x = np.zeros((M, N + 1))
    np.cumsum(steps, axis=1, out=x[:, 1:])
    q = np.floor((x - lo) / width)
    inside = (q >= 0) & (q < nbins)
    counts = np.bincount(q[inside].astype(np.int64), minlength=nbins).astype(np.int64)
    overflow = int(x.size - inside.sum())
    return counts, overflow, float(x.sum()), float((x * x).sum())

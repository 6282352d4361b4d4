"""Fibonacci random tilings and their averaged internal-space distribution.

A tiling is a sequence of intervals u (length 1) and v (length tau). Vertex
j has Z[tau] coordinates (#u, #v) among the first j tiles, so its star is
the partial sum of steps +1 (u) and 1 - tau (v), starting from 0.

With u-frequency p the mean star step is p + (1 - p)(1 - tau), which is
zero only for p = 1/tau^2. The histogram therefore bins each vertex star
relative to the predicted drift line j * mean_step (``detrend=True``); the
step variance p(1 - p) tau^2 equals 1/tau for both p = 1/tau and 1/tau^2.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .cps import TAU
from .errors import ResourceCapError, ValidationError
from .numerics import erfc

__all__ = [
    "Histogram",
    "TilingSample",
    "asymptotic_profile",
    "averaged_histogram",
    "internal_walk",
    "mean_step",
    "predicted_width",
    "profile_distance",
    "profile_shape",
    "sample",
    "width_scaling",
]

STEP_U = 1.0
STEP_V = 1.0 - TAU
MAX_STEPS = 2 * 10**9
CHUNK = 128


@dataclass(frozen=True)
class TilingSample:
    tiles: np.ndarray  # bool, True for u
    p_u: float
    seed: int

    @property
    def N(self) -> int:
        return len(self.tiles)

    def word(self) -> str:
        return "".join("u" if t else "v" for t in self.tiles)

    def vertex_coords(self) -> np.ndarray:
        """Integer (#u, #v) coordinates of vertices 0..N."""
        nu = np.concatenate([[0], np.cumsum(self.tiles)])
        nv = np.arange(self.N + 1) - nu
        return np.stack([nu, nv], axis=1)


def _check_p(p_u):
    if not 0.0 <= p_u <= 1.0:
        raise ValidationError("p_u must lie in [0, 1]")


def _rng(seed: int, index: int) -> np.random.Generator:
    # counter-based split: the stream of sample i depends only on (seed, i)
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _draw(rng, N, p_u, composition):
    if composition == "bernoulli":
        return rng.random(N) < p_u
    if composition == "fixed":
        tiles = np.zeros(N, dtype=bool)
        tiles[: int(round(p_u * N))] = True
        return rng.permutation(tiles)
    raise ValidationError(f"unknown composition {composition!r}")


def sample(N: int, p_u: float = 1 / TAU, seed: int = 0, composition: str = "bernoulli",
           index: int = 0) -> TilingSample:
    """One random tiling of N tiles with independent u/v choices."""
    _check_p(p_u)
    if N < 1:
        raise ValidationError("N must be at least 1")
    return TilingSample(_draw(_rng(seed, index), N, p_u, composition), p_u, seed)


def internal_walk(s: TilingSample) -> np.ndarray:
    steps = np.where(s.tiles, STEP_U, STEP_V)
    return np.concatenate([[0.0], np.cumsum(steps)])


def mean_step(p_u: float) -> float:
    return p_u * STEP_U + (1 - p_u) * STEP_V


def predicted_width(N: int) -> float:
    """Standard deviation sqrt(2N/tau)/2 of the asymptotic profile."""
    return math.sqrt(2 * N / TAU) / 2


@dataclass
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    n_samples: int
    n_tiles: int
    p_u: float
    detrended: bool
    drift: float
    overflow: int
    vertex_mean: float
    vertex_std: float
    u_frequency: float
    final_step_mean: float
    final_step_se: float
    meta: dict = field(default_factory=dict)

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.n_samples * (self.n_tiles + 1) * self.bin_width)


def _chunk_stats(args):
    seed, start, stop, N, p_u, composition, lo, width, bins, drift = args
    tiles = np.empty((stop - start, N), dtype=np.uint8)
    for i in range(start, stop):
        tiles[i - start] = _draw(_rng(seed, i), N, p_u, composition)
    counts, overflow, tot, tot2 = kernels.walk_histogram(
        tiles, STEP_U - drift, STEP_V - drift, lo, width, bins)
    n_u = tiles.sum(axis=1, dtype=np.int64)
    step = (n_u * STEP_U + (N - n_u) * STEP_V) / N
    return counts, overflow, tot, tot2, int(n_u.sum()), float(step.sum()), float((step**2).sum())


def averaged_histogram(M: int, N: int, p_u: float = 1 / TAU, bins: int = 200, seed: int = 0,
                       detrend: bool = True, half_width: float | None = None,
                       composition: str = "bernoulli", threads: int = 1) -> Histogram:
    """Average the vertex stars of M independent N-tile tilings into a density.

    Bins are uniform and centred on the drift line; the default half-width
    is 10 predicted standard deviations so that overflow is negligible
    (overflow is counted, never dropped silently). Results do not depend
    on ``threads``.
    """
    _check_p(p_u)
    if M < 1 or N < 1 or bins < 1:
        raise ValidationError("M, N and bins must be at least 1")
    if M * N > MAX_STEPS:
        raise ResourceCapError(f"M*N = {M * N} exceeds {MAX_STEPS}")
    mu = mean_step(p_u)
    drift = mu if detrend else 0.0
    center = 0.0 if detrend else 0.5 * mu * N
    if half_width is None:
        half_width = 10 * predicted_width(N) + (0.0 if detrend else 0.5 * abs(mu) * N)
    lo = center - half_width
    width = 2 * half_width / bins

    jobs = [(seed, a, min(a + CHUNK, M), N, p_u, composition, lo, width, bins, drift)
            for a in range(0, M, CHUNK)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_chunk_stats, jobs))
    else:
        results = [_chunk_stats(j) for j in jobs]

    counts = np.zeros(bins, dtype=np.int64)
    overflow = n_u = 0
    tot = tot2 = fs = fs2 = 0.0
    for c, o, t, t2, nu, s1, s2 in results:  # fixed chunk order
        counts += c
        overflow += o
        tot += t
        tot2 += t2
        n_u += nu
        fs += s1
        fs2 += s2
    n_vert = M * (N + 1)
    mean = tot / n_vert
    std = math.sqrt(max(tot2 / n_vert - mean * mean, 0.0))
    fmean = fs / M
    fse = math.sqrt(max(fs2 / M - fmean * fmean, 0.0) / M)
    edges = lo + width * np.arange(bins + 1)
    return Histogram(edges, counts, M, N, p_u, detrend, drift, overflow, mean, std,
                     n_u / (M * N), fmean, fse,
                     meta={"seed": seed, "composition": composition, "bins": bins,
                           "half_width": half_width})


def profile_shape(z):
    """f(z) = 2 (exp(-z^2)/sqrt(pi) - |z| erfc(|z|)), unit mass on R."""
    z = np.abs(np.asarray(z, dtype=float))
    out = 2.0 * (np.exp(-z * z) / math.sqrt(math.pi) - z * erfc(z))
    return np.maximum(out, 0.0)


def asymptotic_profile(y, N: int):
    """Leading-order averaged distribution of vertex stars for N tiles."""
    if N < 1:
        raise ValidationError("N must be at least 1")
    scale = math.sqrt(TAU / (2 * N))
    out = scale * profile_shape(np.asarray(y, dtype=float) * scale)
    return float(out) if np.ndim(out) == 0 else out


def profile_distance(h: Histogram, N: int) -> float:
    """L1 distance between the histogram density and the profile at bin centres."""
    if h.n_tiles != N:
        raise ValidationError(f"histogram was built for N = {h.n_tiles}, not {N}")
    if not h.detrended and h.drift == 0 and mean_step(h.p_u) != 0:
        raise ValidationError("profile comparison needs a detrended histogram")
    diff = np.abs(h.density - asymptotic_profile(h.centers, N))
    return float(np.sum(diff) * h.bin_width)


def width_scaling(Ns, M: int, p_u: float = 1 / TAU, seed: int = 0, threads: int = 1) -> dict:
    """Fit log(std of detrended vertex stars) against log N."""
    Ns = [int(n) for n in Ns]
    stds = [averaged_histogram(M, n, p_u, bins=50, seed=seed + i, threads=threads).vertex_std
            for i, n in enumerate(Ns)]
    slope, intercept = np.polyfit(np.log(Ns), np.log(stds), 1)
    return {"N": Ns, "std": stds, "exponent": float(slope), "log_prefactor": float(intercept)}

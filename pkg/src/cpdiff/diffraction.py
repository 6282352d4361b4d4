"""Autocorrelation, pure point diffraction and generalized Poisson summation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import cps
from .comb import (
    DenseComb,
    SumResult,
    fourier_bohr_finite,
    fourier_transform,
    truncation_bound,
    truncation_radius,
)
from .envelopes import GaussianEnvelope, shifted_tail
from .errors import ToleranceError, ValidationError
from .model_set import Box, Window, windowed_transform
from .numerics import ball_volume, compensated_sum, integrate_decaying, integrate_interval
from .weights import WeightFunction

__all__ = [
    "AutocorrelationTable",
    "DiffractionSpectrum",
    "FiniteAutocorrelation",
    "PoissonReport",
    "UNDERFLOW",
    "autocorr",
    "autocorr_finite",
    "autocorrelation_table",
    "poisson_check",
    "poisson_check_regular",
    "spectrum",
    "spectrum_regular",
]

UNDERFLOW = 1e-300
DEFAULT_K_RADIUS = 3.0


def _row_keys(coords: np.ndarray) -> np.ndarray:
    c = np.ascontiguousarray(coords, dtype=np.int64)
    return c.view(np.dtype((np.void, c.dtype.itemsize * c.shape[1]))).ravel()


class FiniteAutocorrelation:
    """Truncated comb on L cap B_n with |x*| <= s, for repeated eta_n(z) lookups.

    The same truncation is applied to both factors, so the finite
    coefficients are exactly those of a finite positive-definite measure.
    """

    def __init__(self, comb: DenseComb, n: float, epsilon=None, cap=cps.DEFAULT_POINT_CAP):
        sch = comb.scheme
        self.comb = comb
        self.n = n
        eps = epsilon if epsilon is not None else (
            1e-6 * abs(comb.rho) if comb.rho else math.inf)
        self.s = truncation_radius(comb.weight, eps, 1.0, sch)
        self.coords = cps.enumerate_points(sch, (np.zeros(sch.d), n), (np.zeros(sch.m), self.s),
                                           cap=cap)
        pos = self.coords @ sch.basis.T
        self.weights = comb.weight(pos[:, sch.d:])
        keys = _row_keys(self.coords)
        self._order = np.argsort(keys, kind="stable")
        self._keys = keys[self._order]
        self.vol = ball_volume(sch.d, n)
        sup = comb.weight.sup_norm if comb.weight.sup_norm is not None else comb.weight.decay_C
        self.bound = 2 * sup * truncation_bound(comb.weight, self.s, sch)

    def eta(self, z) -> complex:
        z = np.asarray(getattr(z, "coords", z), dtype=np.int64)
        if len(self.coords) == 0:
            return 0j
        targets = _row_keys(self.coords - z)
        idx = np.searchsorted(self._keys, targets)
        idx = np.minimum(idx, len(self._keys) - 1)
        hit = self._keys[idx] == targets
        partner = self._order[idx[hit]]
        terms = self.weights[hit] * np.conj(self.weights[partner])
        return compensated_sum(terms) / self.vol


def autocorr_finite(comb: DenseComb, z, n: float, epsilon=None,
                    cap: int = cps.DEFAULT_POINT_CAP) -> SumResult:
    """eta_n(z) = vol(B_n)^-1 sum_{x, x - z in L cap B_n} f(x*) conj f((x - z)*)."""
    if comb.weight.is_zero:
        return SumResult(0j, 0.0, 3, 0, n)
    fa = FiniteAutocorrelation(comb, n, epsilon, cap)
    return SumResult(complex(fa.eta(z)), fa.bound, fa.s, len(fa.coords), n)


def _selfconv_quad(f: WeightFunction, w: float, tol: float = 1e-13) -> complex:
    def g(u):
        return f(u) * np.conj(f(u - w))

    if f.support is not None:
        c, h = f.support
        lo, hi = max(c - h, c - h + w), min(c + h, c + h + w)
        if hi <= lo:
            return 0j
        return integrate_interval(g, lo, hi, tol=tol).value
    p = f.m + 1 + f.decay_alpha
    sup = f.sup_norm if f.sup_norm is not None else f.decay_C
    C = sup * 2**p * max(f.decay_C, sup)
    return integrate_decaying(g, C, p - 1, tol=tol).value


def autocorr(comb: DenseComb, z) -> complex:
    """eta(z) = covolume^-1 int f(u) conj f(u - z*) du (closed form when known)."""
    sch, f = comb.scheme, comb.weight
    zs = sch.internal(getattr(z, "coords", z))
    if f.is_zero:
        return 0j
    if f.selfconv is not None:
        arg = zs if sch.m > 1 else zs[..., 0]
        val = complex(np.asarray(f.selfconv(np.atleast_1d(arg) if sch.m == 1 else arg[None, :]))[0])
    elif sch.m == 1:
        val = _selfconv_quad(f, float(zs[0]))
    else:
        raise ValidationError("numerical self-convolution is implemented for m = 1 only")
    return val / sch.covolume


@dataclass
class AutocorrelationTable:
    """eta(z) keyed by integer difference coordinates."""

    scheme: cps.CutProjectScheme
    weight: WeightFunction
    mode: str  # "finite_n" or "closed_form"
    entries: dict = field(default_factory=dict)
    flushed: set = field(default_factory=set)
    n: float | None = None

    def __getitem__(self, z) -> complex:
        return self.entries[tuple(int(v) for v in z)]

    def gram(self, zs) -> np.ndarray:
        zs = [tuple(int(v) for v in z) for z in zs]
        return np.array([[self[tuple(a - b for a, b in zip(zi, zj))] for zj in zs] for zi in zs])

    def min_eigenvalue(self, zs) -> float:
        G = self.gram(zs)
        return float(np.min(np.linalg.eigvalsh(0.5 * (G + G.conj().T))))

    def check(self, zs, tol: float = 1e-8) -> list:
        """Violated invariants (empty when all hold)."""
        problems = []
        zero = tuple([0] * self.scheme.n)
        eta0 = self.entries.get(zero)
        if eta0 is not None and (abs(eta0.imag) > 1e-12 * max(1.0, abs(eta0)) or eta0.real < 0):
            problems.append("eta(0) is not real nonnegative")
        for z, v in self.entries.items():
            mz = tuple(-c for c in z)
            if mz in self.entries and abs(self.entries[mz] - np.conj(v)) > 1e-12 * max(1.0, abs(v)):
                problems.append(f"eta(-z) != conj eta(z) at {z}")
            if eta0 is not None and abs(v) > abs(eta0) * (1 + 1e-12):
                problems.append(f"|eta(z)| > eta(0) at {z}")
        if eta0 is not None and self.min_eigenvalue(zs) < -tol * abs(eta0):
            problems.append("Gram matrix is not positive semidefinite")
        return problems


def autocorrelation_table(comb: DenseComb, zs, mode: str = "closed_form", n: float | None = None,
                          epsilon=None) -> AutocorrelationTable:
    """eta on all pairwise differences of ``zs`` (so Gram matrices are available)."""
    zs = [tuple(int(v) for v in getattr(z, "coords", z)) for z in zs]
    diffs = sorted({tuple(a - b for a, b in zip(zi, zj)) for zi in zs for zj in zs})
    table = AutocorrelationTable(comb.scheme, comb.weight, mode, n=n)
    if mode == "finite_n":
        if n is None:
            raise ValidationError("finite_n mode needs n")
        fa = FiniteAutocorrelation(comb, n, epsilon)
        compute = fa.eta
    elif mode == "closed_form":
        def compute(z):
            return autocorr(comb, z)
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    for z in diffs:
        v = complex(compute(np.array(z)))
        if 0 < abs(v) < UNDERFLOW:
            table.flushed.add(z)
            v = 0j
        table.entries[z] = v
    return table


@dataclass
class DiffractionSpectrum:
    """Bragg peaks above ``threshold`` with exact integer dual coordinates."""

    coords: np.ndarray
    k_direct: np.ndarray
    k_star: np.ndarray
    intensity: np.ndarray
    threshold: float
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.intensity)

    @property
    def peaks(self) -> list:
        return [(tuple(int(v) for v in c), kd, ks, float(i))
                for c, kd, ks, i in zip(self.coords, self.k_direct, self.k_star, self.intensity)]


def _radius_for_floor(envelope, level: float) -> float:
    """Smallest t with envelope(t) < level (envelope non-increasing)."""
    if envelope(0.0) < level:
        return 0.0
    hi = 1.0
    while envelope(hi) >= level:
        hi *= 2.0
        if hi > 1e8:
            raise ValidationError("transform envelope does not fall below the floor")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if envelope(mid) >= level:
            lo = mid
        else:
            hi = mid
    return hi


def _kstar_radius(f: WeightFunction, floor: float, det: float, kstar_radius):
    level = math.sqrt(floor) * det
    if f.ft_envelope is None:
        if kstar_radius is None:
            raise ValidationError(
                f"weight {f.name!r} has no transform envelope; pass kstar_radius explicitly")
        return float(kstar_radius), False
    needed = _radius_for_floor(f.ft_envelope, level)
    if kstar_radius is None:
        return max(needed, 1e-9), True
    if kstar_radius < needed:
        raise ValidationError(
            f"kstar_radius {kstar_radius:g} is too small for floor {floor:g}; need >= {needed:.6g}")
    return float(kstar_radius), True


def _build_spectrum(scheme, intensity_of, floor, R, k_radius, meta):
    dual = scheme.dual()
    coords = cps.enumerate_points(dual, (np.zeros(scheme.d), k_radius), (np.zeros(scheme.m), R))
    pos = coords @ dual.basis.T
    inten = intensity_of(pos[:, scheme.d:]) if len(coords) else np.zeros(0)
    keep = inten >= floor
    coords, pos, inten = coords[keep], pos[keep], inten[keep]
    # descending intensity, ties broken by lexicographic dual coordinates
    order = np.lexsort(tuple(coords.T[::-1]) + (-inten,))
    coords, pos, inten = coords[order], pos[order], inten[order]
    return DiffractionSpectrum(coords, pos[:, : scheme.d], pos[:, scheme.d:], inten, floor, meta)


def spectrum(comb: DenseComb, intensity_floor: float, kstar_radius=None,
             k_radius: float = DEFAULT_K_RADIUS) -> DiffractionSpectrum:
    """Peaks k in L* with |k| <= k_radius and intensity |f^(-k*)|^2 / det^2 >= floor.

    ``kstar_radius`` defaults to the smallest radius beyond which the
    transform envelope guarantees every intensity is below the floor.
    """
    if not intensity_floor > 0:
        raise ValidationError("intensity_floor must be positive")
    sch, f = comb.scheme, comb.weight
    det = sch.covolume
    R, certified = _kstar_radius(f, intensity_floor, det, kstar_radius)

    def intensity_of(kstar):
        arg = -kstar[:, 0] if sch.m == 1 else -kstar
        return np.abs(fourier_transform(f, arg)) ** 2 / det**2

    meta = {"weight": f.describe(), "scheme": sch.name, "floor": intensity_floor,
            "kstar_radius": R, "k_radius": k_radius, "complete_in_kstar": certified}
    if f.is_zero:
        e = np.zeros((0, sch.n), dtype=np.int64)
        return DiffractionSpectrum(e, np.zeros((0, sch.d)), np.zeros((0, sch.m)), np.zeros(0),
                                   intensity_floor, meta)
    return _build_spectrum(sch, intensity_of, intensity_floor, R, k_radius, meta)


def spectrum_regular(s: cps.CutProjectScheme, w: Window, f: WeightFunction,
                     intensity_floor: float, kstar_radius=None,
                     k_radius: float = DEFAULT_K_RADIUS) -> DiffractionSpectrum:
    """Peaks of the weighted regular model set: |(f|_W)^(-k*)|^2 / det^2."""
    from .model_set import _check_support

    if not intensity_floor > 0:
        raise ValidationError("intensity_floor must be positive")
    _check_support(w, f)
    det = s.covolume
    R, certified = _kstar_radius(f, intensity_floor, det, kstar_radius)

    def intensity_of(kstar):
        return np.abs(windowed_transform(w, f, -kstar[:, 0])) ** 2 / det**2

    meta = {"weight": f.describe(), "scheme": s.name, "window": getattr(w, "describe", str)(),
            "floor": intensity_floor, "kstar_radius": R, "k_radius": k_radius,
            "complete_in_kstar": certified}
    return _build_spectrum(s, intensity_of, intensity_floor, R, k_radius, meta)


@dataclass(frozen=True)
class PoissonReport:
    lhs: complex
    rhs: complex
    defect: float
    lhs_bound: float
    rhs_bound: float
    radii: dict
    passed: bool
    tol: float


def _tail_bound(env_direct, env_internal, R, s, lam):
    """Sum of env_direct(|x|) env_internal(|x*|) over lattice points with |x| > R or |x*| > s."""
    delta = 0.5 * lam
    vol = ball_volume(2, delta)
    full_d = shifted_tail(env_direct, 0.0, delta)
    full_i = shifted_tail(env_internal, 0.0, delta)
    return (shifted_tail(env_direct, R, delta) * full_i
            + full_d * shifted_tail(env_internal, s, delta)) / vol


def _poisson(scheme, eta_of, intensity_of, eta_env, int_env, sigma, tol, radii, max_doublings=40):
    if scheme.d != 1 or scheme.m != 1:
        raise ValidationError("poisson_check is implemented for d = m = 1")
    if not sigma > 0:
        raise ValidationError("sigma must be positive")
    dual = scheme.dual()
    lam, lam_dual = cps.shortest_vector_length(scheme), cps.shortest_vector_length(dual)
    g_env = GaussianEnvelope(1.0, math.pi / sigma**2)  # g(x) = exp(-pi x^2 / sigma^2)
    gh_env = GaussianEnvelope(sigma, math.pi * sigma**2)  # its transform

    def bounds(rd):
        return (_tail_bound(g_env, eta_env, rd["R_z"], rd["s_z"], lam),
                _tail_bound(gh_env, int_env, rd["R_k"], rd["s_k"], lam_dual))

    if radii is None:
        rd = {"R_z": 1.0, "s_z": 1.0, "R_k": 1.0, "s_k": 1.0}
        budget = tol / 4
        for _ in range(max_doublings):
            lb, rb = bounds(rd)
            if lb <= budget and rb <= budget:
                break
            if lb > budget:
                a = _tail_bound(g_env, eta_env, rd["R_z"], math.inf, lam)
                rd["R_z" if a >= lb / 2 else "s_z"] *= 2
            if rb > budget:
                a = _tail_bound(gh_env, int_env, rd["R_k"], math.inf, lam_dual)
                rd["R_k" if a >= rb / 2 else "s_k"] *= 2
        else:
            raise ToleranceError(f"truncation bounds cannot reach tol {tol:g}")
    else:
        rd = {k: float(radii[k]) for k in ("R_z", "s_z", "R_k", "s_k")}
    lb, rb = bounds(rd)

    z = cps.enumerate_points(scheme, (0.0, rd["R_z"]), (0.0, rd["s_z"]))
    zpos = z @ scheme.basis.T
    lhs = compensated_sum(eta_of(z, zpos[:, 1]) * np.exp(-math.pi * zpos[:, 0] ** 2 / sigma**2))
    k = cps.enumerate_points(dual, (0.0, rd["R_k"]), (0.0, rd["s_k"]))
    kpos = k @ dual.basis.T
    rhs = compensated_sum(intensity_of(kpos[:, 1]) * sigma
                          * np.exp(-math.pi * sigma**2 * kpos[:, 0] ** 2))
    defect = abs(lhs - rhs)
    return PoissonReport(complex(lhs), complex(rhs), defect, lb, rb, rd,
                         defect < tol * max(abs(lhs), 1.0), tol)


def poisson_check(comb: DenseComb, sigma: float = 1.0, tol: float = 1e-3,
                  radii: dict | None = None) -> PoissonReport:
    """Compare sum_{z in L} eta(z) g(z) with sum_{k in L*} |c(k)|^2 g^(k).

    g(x) = exp(-pi x^2 / sigma^2). Both sums are truncated to
    |z| <= R_z, |z*| <= s_z and |k| <= R_k, |k*| <= s_k; the reported bounds
    dominate the omitted terms. Radii are grown until both bounds are at
    most tol/4, unless given explicitly.
    """
    sch, f = comb.scheme, comb.weight
    det = sch.covolume
    if f.is_zero:
        return PoissonReport(0j, 0j, 0.0, 0.0, 0.0, {}, True, tol)
    if f.selfconv_envelope is None or f.ft_envelope is None:
        raise ValidationError(f"weight {f.name!r} lacks the envelopes needed for certified tails")

    def eta_of(z, zstar):
        if f.selfconv is not None:
            return np.asarray(f.selfconv(zstar), dtype=complex) / det
        return np.array([autocorr(comb, zi) for zi in z])

    def intensity_of(kstar):
        return np.abs(fourier_transform(f, -kstar)) ** 2 / det**2

    return _poisson(sch, eta_of, intensity_of, f.selfconv_envelope.scaled(1 / det),
                    f.ft_envelope.squared().scaled(1 / det**2), sigma, tol, radii)


def poisson_check_regular(s: cps.CutProjectScheme, w: Window, f: WeightFunction,
                          sigma: float = 1.0, tol: float = 1e-3,
                          radii: dict | None = None) -> PoissonReport:
    """The regular-model-set identity: sum over Delta of eta_W(z) g(z) vs |c_W(k)|^2 g^(k)."""
    from .model_set import _check_support

    _check_support(w, f)
    if not isinstance(w, Box) or w.m != 1:
        raise ValidationError("poisson_check_regular needs an interval window")
    if f.selfconv_envelope is None or f.ft_envelope is None:
        raise ValidationError(f"weight {f.name!r} lacks the envelopes needed for certified tails")
    det = s.covolume
    lo, hi = float(w.intervals[0].lo), float(w.intervals[0].hi)

    def eta_of(z, zstar):
        out = np.zeros(len(zstar), dtype=complex)
        for i, t in enumerate(zstar):
            a, b = max(lo, lo + t), min(hi, hi + t)
            if b > a:
                out[i] = integrate_interval(lambda u, t=t: f(u) * np.conj(f(u - t)), a, b,
                                            tol=1e-13).value / det
        return out

    def intensity_of(kstar):
        return np.abs(windowed_transform(w, f, -kstar, tol=1e-13)) ** 2 / det**2

    return _poisson(s, eta_of, intensity_of, f.selfconv_envelope.scaled(1 / det),
                    f.ft_envelope.squared().scaled(1 / det**2), sigma, tol, radii)

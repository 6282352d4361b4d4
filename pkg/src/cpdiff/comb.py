"""Weighted dense Dirac combs sum_{x in L} f(x*) delta_x.

Sums over the dense module are truncated in internal space at |x*| <= s,
with s taken from the shell-counting tail bound

    2^m c C sum_{n >= s-1} n^-(1+alpha),   c = 2 vol(B_1^m) / covolume,

per unit direct-space volume. Every finite sum reports that bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import cps
from ._backend import kernels
from .errors import ToleranceError, ValidationError
from .numerics import ball_volume, integrate_decaying, tail_sum_bound
from .weights import WeightFunction

__all__ = [
    "DecayReport",
    "DenseComb",
    "Frequency",
    "SumResult",
    "decay_check",
    "fourier_bohr",
    "fourier_bohr_finite",
    "fourier_transform",
    "truncation_bound",
    "truncation_radius",
    "weighted_phase_sum",
    "weyl_dense",
]

MAX_TRUNCATION = 10**9
DEFAULT_DECAY_RADII = tuple(np.geomspace(0.25, 1e3, 40))


@dataclass(frozen=True)
class DecayReport:
    radii: np.ndarray
    values: np.ndarray
    exponent: float
    C: float
    passed: bool


def _sphere(m: int, radius: float) -> np.ndarray:
    if m == 1:
        return np.array([-radius, radius])
    if m == 2:
        th = np.linspace(0, 2 * np.pi, 256, endpoint=False)
        return radius * np.stack([np.cos(th), np.sin(th)], axis=1)
    axes = np.concatenate([np.eye(m), -np.eye(m), np.ones((1, m)) / math.sqrt(m),
                           -np.ones((1, m)) / math.sqrt(m)])
    return radius * axes


def decay_check(f: WeightFunction, radii=DEFAULT_DECAY_RADII, dim: int | None = None) -> DecayReport:
    """Sample max |y|^(dim+1+alpha) |f(y)| on spheres; pass iff all <= C."""
    radii = np.asarray(radii, dtype=float)
    if radii.size == 0:
        raise ValidationError("radii must be nonempty")
    p = (dim if dim is not None else f.m) + 1 + f.decay_alpha
    vals = np.array([
        float(np.max(np.abs(f(_sphere(f.m, r))))) * r**p for r in radii
    ])
    return DecayReport(radii, vals, p, f.decay_C, bool(np.all(vals <= f.decay_C)))


def _count_constant(scheme: cps.CutProjectScheme) -> float:
    # 2^m * c with c = 2 S_m / |det|
    return 2**scheme.m * 2 * ball_volume(scheme.m) / scheme.covolume


def truncation_bound(f: WeightFunction, s: float, scheme, window_volume: float = 1.0) -> float:
    """Bound on the internal tail |x*| > s of sum |f(x*)|, per unit volume."""
    if f.is_zero:
        return 0.0
    return (_count_constant(scheme) * f.decay_C * window_volume
            * tail_sum_bound(f.decay_alpha, s - 1))


def truncation_radius(f: WeightFunction, epsilon: float, window_volume: float = 1.0,
                      scheme=None) -> int:
    """Smallest integer s >= 3 whose tail bound is below epsilon."""
    scheme = scheme or cps.fibonacci_scheme()
    if not epsilon > 0:
        raise ValidationError("epsilon must be positive")
    if math.isinf(epsilon) or f.is_zero:
        return 3
    K = _count_constant(scheme) * f.decay_C * window_volume
    a = f.decay_alpha
    log_x = math.log(K / (a * epsilon)) / a
    if not log_x < math.log(MAX_TRUNCATION):
        raise ToleranceError(f"epsilon {epsilon:g} needs truncation radius above {MAX_TRUNCATION}")
    s = max(3, int(math.floor(math.exp(log_x))) + 2)
    while s > 3 and truncation_bound(f, s - 1, scheme, window_volume) < epsilon:
        s -= 1
    while truncation_bound(f, s, scheme, window_volume) >= epsilon:
        s += 1
    return s


def fourier_transform(f: WeightFunction, xi, tol: float = 1e-12) -> np.ndarray:
    """f^(xi) = int exp(-2 pi i xi y) f(y) dy; analytic when available."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if f.fourier is not None:
        return np.asarray(f.fourier(xi), dtype=complex)
    if f.m != 1:
        raise ValidationError("numerical transforms are implemented for m = 1 only")
    out = np.empty(len(xi), dtype=complex)
    for i, x in enumerate(xi):
        out[i] = _quad_transform(f, float(x), tol)
    return out


def _quad_transform(f: WeightFunction, xi: float, tol: float) -> complex:
    from .numerics import integrate_interval

    def g(y):
        return f(y) * np.exp(-2j * math.pi * xi * y)

    if f.support is not None:
        c, h = f.support
        return integrate_interval(g, c - h, c + h, tol=tol).value
    p = f.m + 1 + f.decay_alpha
    C = 2**p * max(f.decay_C, f.sup_norm or f.decay_C)
    return integrate_decaying(g, C, p - 1, tol=tol).value


@dataclass(frozen=True, eq=False)
class DenseComb:
    scheme: cps.CutProjectScheme
    weight: WeightFunction
    rho: complex = field(init=False)

    def __post_init__(self):
        if self.weight.m != self.scheme.m:
            raise ValidationError("weight and scheme internal dimensions differ")
        dim = max(self.scheme.d, self.scheme.m)
        report = decay_check(self.weight, dim=dim)
        if not report.passed:
            worst = float(np.max(report.values))
            raise ValidationError(
                f"weight {self.weight.name!r} fails its decay certificate: "
                f"max |y|^{report.exponent:g}|f| = {worst:.3g} > C = {self.weight.decay_C:.3g}"
            )
        zero = np.zeros((1, self.scheme.m)) if self.scheme.m > 1 else np.zeros(1)
        rho = complex(fourier_transform(self.weight, zero)[0]) / self.scheme.covolume
        object.__setattr__(self, "rho", rho)


@dataclass(frozen=True)
class Frequency:
    """A direct-space frequency, optionally certified as an element of L*."""

    direct: np.ndarray
    dual_coords: tuple | None = None
    star: np.ndarray | None = None

    @classmethod
    def from_dual(cls, scheme: cps.CutProjectScheme, coords) -> "Frequency":
        dual = scheme.dual()
        c = dual._coords(coords)
        return cls(dual.direct(c), tuple(int(v) for v in c), dual.internal(c))

    @classmethod
    def off_module(cls, value) -> "Frequency":
        """A frequency the caller asserts is not in L*."""
        return cls(np.atleast_1d(np.asarray(value, dtype=float)))

    @property
    def in_module(self) -> bool:
        return self.dual_coords is not None


@dataclass(frozen=True)
class SumResult:
    value: complex
    truncation_bound: float
    s: int
    n_points: int
    r: float


def weighted_phase_sum(positions: np.ndarray, weights: np.ndarray, k) -> complex:
    """Compensated sum of weights * exp(-2 pi i k.x) over direct positions."""
    positions = np.ascontiguousarray(positions, dtype=float)
    if positions.ndim == 1:
        positions = positions[:, None]
    w = np.asarray(weights, dtype=complex)
    k = np.ascontiguousarray(np.atleast_1d(np.asarray(k, dtype=float)))
    return kernels.phase_sum(positions, np.ascontiguousarray(w.real),
                             np.ascontiguousarray(w.imag), k)


def _epsilon(comb: DenseComb, epsilon):
    if epsilon is not None:
        return epsilon
    return 1e-6 * abs(comb.rho) if comb.rho else math.inf


def fourier_bohr_finite(comb: DenseComb, k, r: float, a=0.0, epsilon=None,
                        cap: int = cps.DEFAULT_POINT_CAP) -> SumResult:
    """c_r(k) = vol(B_r)^-1 sum_{x in L cap B_r(a), |x*| <= s} f(x*) exp(-2 pi i k.x)."""
    s_ = comb.scheme
    if comb.weight.is_zero:
        return SumResult(0j, 0.0, 3, 0, r)
    kd = k.direct if isinstance(k, Frequency) else np.atleast_1d(np.asarray(k, dtype=float))
    s = truncation_radius(comb.weight, _epsilon(comb, epsilon), 1.0, s_)
    pts = cps.enumerate_points(s_, (a, r), (0.0, s), cap=cap)
    pos = pts @ s_.basis.T
    w = comb.weight(pos[:, s_.d:])
    total = weighted_phase_sum(pos[:, : s_.d], w, kd)
    vol = ball_volume(s_.d, r)
    return SumResult(total / vol, truncation_bound(comb.weight, s, s_), s, len(pts), r)


def weyl_dense(comb: DenseComb, r: float, a=0.0, epsilon=None,
               cap: int = cps.DEFAULT_POINT_CAP) -> SumResult:
    """Weighted point average over L cap B_r(a); tends to rho as r grows."""
    return fourier_bohr_finite(comb, np.zeros(comb.scheme.d), r, a, epsilon, cap)


def fourier_bohr(comb: DenseComb, k) -> complex:
    """Limit coefficient: f^(-k*) / covolume for k in L*, else 0.

    ``k`` is a ``Frequency``, or integer coordinates in the dual basis.
    """
    if not isinstance(k, Frequency):
        k = Frequency.from_dual(comb.scheme, k)
    if not k.in_module or comb.weight.is_zero:
        return 0j
    xi = -k.star if comb.scheme.m > 1 else -k.star[..., 0]
    val = fourier_transform(comb.weight, np.atleast_1d(xi) if comb.scheme.m == 1 else xi[None, :])
    return complex(val[0]) / comb.scheme.covolume

"""Windows, regular model sets, the density formula and Weyl averages.

Box endpoints may be floats or exact ``GoldenInteger`` values; the latter
are compared exactly against the star map of golden (Fibonacci) schemes,
so half-open windows such as (-1, tau-1] produce reproducible point sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cps
from .comb import SumResult, weighted_phase_sum
from .cps import BOUNDARY_TOL, GoldenInteger, golden_sign
from .errors import ValidationError
from .numerics import ball_volume, integrate_interval
from .weights import WeightFunction

__all__ = [
    "Ball",
    "Box",
    "Interval",
    "Window",
    "density_empirical",
    "density_exact",
    "fibonacci_window",
    "fourier_bohr_finite_regular",
    "model_set_points",
    "parse_window",
    "weyl_average",
    "windowed_transform",
]


def _val(e) -> float:
    return float(e)


@dataclass(frozen=True)
class Interval:
    lo: float | GoldenInteger
    hi: float | GoldenInteger
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        if not _val(self.hi) > _val(self.lo):
            raise ValidationError(f"empty interval [{_val(self.lo)}, {_val(self.hi)}]")

    @property
    def length(self) -> float:
        return _val(self.hi) - _val(self.lo)

    def shifted(self, u) -> "Interval":
        def add(e):
            if isinstance(e, GoldenInteger) and isinstance(u, GoldenInteger):
                return GoldenInteger(e.a + u.a, e.b + u.b)
            return _val(e) + _val(u)
        return Interval(add(self.lo), add(self.hi), self.lo_closed, self.hi_closed)

    def contains(self, x: np.ndarray, exact=None) -> np.ndarray:
        """Membership of float coordinates x; ``exact`` = (a, b) Z[tau] parts."""
        return (self._side(x, exact, self.lo, self.lo_closed, +1)
                & self._side(x, exact, self.hi, self.hi_closed, -1))

    @staticmethod
    def _side(x, exact, e, closed, direction):
        # direction +1: x >= e (lower end); -1: x <= e (upper end)
        if exact is not None and isinstance(e, GoldenInteger):
            sgn = direction * golden_sign(exact[0] - e.a, exact[1] - e.b)
            return sgn >= 0 if closed else sgn > 0
        diff = direction * (x - _val(e))
        return diff >= -BOUNDARY_TOL if closed else diff > BOUNDARY_TOL

    def describe(self) -> str:
        return (("[" if self.lo_closed else "(") + f"{self.lo}, {self.hi}"
                + ("]" if self.hi_closed else ")"))


class Window:
    m: int

    @property
    def volume(self) -> float:
        raise NotImplementedError

    def bounding_ball(self) -> tuple:
        raise NotImplementedError

    def contains(self, scheme, coords) -> np.ndarray:
        raise NotImplementedError

    def shifted(self, u) -> "Window":
        raise NotImplementedError


@dataclass(frozen=True)
class Box(Window):
    intervals: tuple

    def __post_init__(self):
        object.__setattr__(self, "intervals", tuple(self.intervals))
        if not self.intervals:
            raise ValidationError("box needs at least one interval")

    @property
    def m(self) -> int:
        return len(self.intervals)

    @property
    def volume(self) -> float:
        return math.prod(iv.length for iv in self.intervals)

    def bounding_ball(self):
        center = np.array([0.5 * (_val(iv.lo) + _val(iv.hi)) for iv in self.intervals])
        radius = 0.5 * math.sqrt(sum(iv.length**2 for iv in self.intervals))
        return center, radius * (1 + 1e-12) + BOUNDARY_TOL

    def contains(self, scheme, coords) -> np.ndarray:
        x = scheme.internal(coords)
        exact = scheme.star_exact(coords) if scheme.golden else None
        ok = np.ones(len(coords), dtype=bool)
        for j, iv in enumerate(self.intervals):
            ok &= iv.contains(x[:, j], exact if j == 0 else None)
        return ok

    def shifted(self, u) -> "Box":
        us = u if isinstance(u, (list, tuple, np.ndarray)) else [u] * self.m
        return Box(tuple(iv.shifted(v) for iv, v in zip(self.intervals, us)))

    def describe(self) -> str:
        return " x ".join(iv.describe() for iv in self.intervals)


@dataclass(frozen=True)
class Ball(Window):
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise ValidationError("window radius must be positive")

    @property
    def m(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        return ball_volume(self.m, self.radius)

    def bounding_ball(self):
        return np.array(self.center), self.radius + BOUNDARY_TOL

    def contains(self, scheme, coords) -> np.ndarray:
        x = scheme.internal(coords)
        return np.linalg.norm(x - np.array(self.center), axis=1) <= self.radius + BOUNDARY_TOL

    def shifted(self, u) -> "Ball":
        return Ball(tuple(np.array(self.center) + np.asarray(u, dtype=float)), self.radius)

    def describe(self) -> str:
        return f"ball({list(self.center)}, {self.radius})"


def fibonacci_window() -> Box:
    """The half-open window (-1, tau - 1] with exact endpoints."""
    return Box((Interval(GoldenInteger(-1, 0), GoldenInteger(-1, 1), False, True),))


def _parse_endpoint(text: str):
    try:
        return float(text)
    except ValueError:
        try:
            return GoldenInteger.parse(text)
        except (ValueError, ValidationError):
            raise ValidationError(f"bad window endpoint {text!r}") from None


def parse_window(spec: str) -> Window:
    """Parse ``interval:LO:HI[:open-closed]``, ``ball:C:R`` or ``fibonacci``.

    Endpoints are decimals or Z[tau] expressions such as ``tau-1``.
    """
    if spec == "fibonacci":
        return fibonacci_window()
    parts = spec.split(":")
    kind = parts[0]
    if kind == "interval" and len(parts) in (3, 4):
        flags = parts[3] if len(parts) == 4 else "closed-closed"
        try:
            lo_f, hi_f = flags.split("-")
            lo_closed = {"open": False, "closed": True}[lo_f]
            hi_closed = {"open": False, "closed": True}[hi_f]
        except (ValueError, KeyError):
            raise ValidationError(f"bad endpoint flags {flags!r}") from None
        return Box((Interval(_parse_endpoint(parts[1]), _parse_endpoint(parts[2]),
                             lo_closed, hi_closed),))
    if kind == "ball" and len(parts) == 3:
        try:
            center = [float(v) for v in parts[1].split(",")]
            return Ball(tuple(center), float(parts[2]))
        except ValueError:
            raise ValidationError(f"bad ball window {spec!r}") from None
    raise ValidationError(f"cannot parse window {spec!r}")


def model_set_points(s: cps.CutProjectScheme, w: Window, r: float, a=0.0,
                     cap: int = cps.DEFAULT_POINT_CAP) -> np.ndarray:
    """Integer coordinates of {x in L cap B_r(a) : x* in W}, sorted."""
    if w.m != s.m:
        raise ValidationError("window dimension does not match the scheme")
    center, radius = w.bounding_ball()
    pts = cps.enumerate_points(s, (a, r), (center, radius), cap=cap)
    return pts[w.contains(s, pts)]


def density_empirical(s, w: Window, r: float, a=0.0, cap: int = cps.DEFAULT_POINT_CAP) -> float:
    return len(model_set_points(s, w, r, a, cap)) / ball_volume(s.d, r)


def density_exact(s, w: Window) -> float:
    return w.volume / s.covolume


def _check_support(w: Window, f: WeightFunction, per_dim: int = 1000):
    center, radius = w.bounding_ball()
    axes = [np.linspace(c - 2 * radius, c + 2 * radius, per_dim) for c in center]
    grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    if isinstance(w, Box):
        inside = np.ones(len(grid), dtype=bool)
        for j, iv in enumerate(w.intervals):
            inside &= iv.contains(grid[:, j])
    else:
        inside = np.linalg.norm(grid - center, axis=1) <= w.radius
    outside = grid[~inside]
    vals = f(outside if w.m > 1 else outside[:, 0])
    if np.any(vals != 0):
        raise ValidationError(f"weight {f.name!r} is nonzero outside the window")


def fourier_bohr_finite_regular(s, w: Window, f: WeightFunction, k, r: float, a=0.0,
                                cap: int = cps.DEFAULT_POINT_CAP) -> SumResult:
    """vol(B_r)^-1 sum over Lambda(W) cap B_r(a) of f(x*) exp(-2 pi i k.x)."""
    _check_support(w, f)
    pts = model_set_points(s, w, r, a, cap)
    pos = pts @ s.basis.T
    kd = getattr(k, "direct", k)
    total = weighted_phase_sum(pos[:, : s.d], f(pos[:, s.d:]), np.atleast_1d(kd))
    return SumResult(total / ball_volume(s.d, r), 0.0, 0, len(pts), r)


def weyl_average(s, w: Window, f: WeightFunction, r: float, a=0.0,
                 cap: int = cps.DEFAULT_POINT_CAP) -> complex:
    """vol(B_r)^-1 sum_{x in Lambda(W) cap B_r(a)} f(x*); f must vanish off W."""
    return fourier_bohr_finite_regular(s, w, f, np.zeros(s.d), r, a, cap).value


def windowed_transform(w: Window, f: WeightFunction, xi, tol: float = 1e-11) -> np.ndarray:
    """(f restricted to W)^(xi) = int_W exp(-2 pi i xi u) f(u) du, m = 1."""
    if w.m != 1:
        raise ValidationError("windowed transforms are implemented for m = 1 only")
    center, radius = w.bounding_ball()
    lo, hi = center[0] - radius, center[0] + radius
    if isinstance(w, Box):
        lo, hi = _val(w.intervals[0].lo), _val(w.intervals[0].hi)
    if f.support is not None:
        c, h = f.support
        lo, hi = max(lo, c - h), min(hi, c + h)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    out = np.zeros(len(xi), dtype=complex)
    if hi <= lo:
        return out
    for i, x in enumerate(xi):
        # oscillation: keep about one period per panel
        n_panels = max(1, int(math.ceil(abs(x) * (hi - lo))))
        edges = np.linspace(lo, hi, n_panels + 1)[1:-1]
        g = (lambda u, x=x: f(u) * np.exp(-2j * math.pi * x * u))
        out[i] = integrate_interval(g, lo, hi, tol=tol, breakpoints=edges).value
    return out

"""Internal-space weight functions and the built-in weight library.

A weight carries a decay certificate (C, alpha) asserting
|y|^(m+1+alpha) |f(y)| <= C, and optionally its Fourier transform
f^(xi) = int exp(-2 pi i xi.y) f(y) dy, its self-convolution
u -> int f(v) conj(f(v - u)) dv, and radial envelopes for both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .envelopes import BoxEnvelope, GaussianEnvelope, PowerEnvelope
from .errors import ValidationError
from .numerics import integrate_interval

__all__ = [
    "WeightFunction",
    "bump",
    "gaussian",
    "lorentzian",
    "make_weight",
    "tabulated",
    "zero",
]


@dataclass(frozen=True, eq=False)
class WeightFunction:
    name: str
    func: Callable
    decay_C: float
    decay_alpha: float
    m: int = 1
    params: dict = field(default_factory=dict)
    fourier: Optional[Callable] = None
    selfconv: Optional[Callable] = None
    ft_envelope: object = None
    selfconv_envelope: object = None
    sup_norm: Optional[float] = None
    support: Optional[tuple] = None  # (center, radius) ball containing supp f
    real: bool = True
    is_zero: bool = False

    def __post_init__(self):
        if not (self.decay_C > 0 and self.decay_alpha > 0):
            raise ValidationError("decay certificate needs C > 0 and alpha > 0")

    def __call__(self, y) -> np.ndarray:
        """Evaluate at internal points: shape (n, m), or (n,) when m == 1."""
        y = np.asarray(y, dtype=float)
        if self.m == 1 and y.ndim == 2:
            y = y[:, 0]
        return np.asarray(self.func(y), dtype=complex)

    def describe(self) -> dict:
        return {"name": self.name, **self.params,
                "decay_C": self.decay_C, "decay_alpha": self.decay_alpha}


def _sqnorm(y, m):
    return y * y if m == 1 else np.sum(y * y, axis=-1)


def _dot(xi, c, m):
    return xi * c if m == 1 else xi @ np.asarray(c)


def gaussian(width: float = 1.0, center=0.0, alpha: float = 8.0, m: int = 1) -> WeightFunction:
    """f(y) = exp(-pi |y - center|^2 / width^2); self-dual at width 1.

    The certificate constant is the exact maximum of
    |y|^(m+1+alpha) f(y), attained along the direction of ``center``.
    """
    if width <= 0:
        raise ValidationError("width must be positive")
    c = np.broadcast_to(np.asarray(center, dtype=float), (m,)).copy()
    c_arg = float(c[0]) if m == 1 else c
    cn = float(np.linalg.norm(c))
    p = m + 1 + alpha
    w2 = width * width
    rho = 0.5 * (cn + math.sqrt(cn * cn + 2 * p * w2 / math.pi))
    C = math.exp(p * math.log(rho) - math.pi * (rho - cn) ** 2 / w2) * (1 + 1e-12)

    def func(y):
        d = y - c_arg
        return np.exp(-math.pi * _sqnorm(d, m) / w2)

    def fourier(xi):
        xi = np.asarray(xi, dtype=float)
        out = width**m * np.exp(-math.pi * w2 * _sqnorm(xi, m))
        if cn:
            out = out * np.exp(-2j * math.pi * _dot(xi, c_arg, m))
        return out

    def selfconv(u):
        u = np.asarray(u, dtype=float)
        return (width / math.sqrt(2)) ** m * np.exp(-math.pi * _sqnorm(u, m) / (2 * w2))

    return WeightFunction(
        name="gaussian",
        func=func,
        decay_C=C,
        decay_alpha=alpha,
        m=m,
        params={"width": width, "center": c.tolist() if m > 1 else float(c[0])},
        fourier=fourier,
        selfconv=selfconv,
        ft_envelope=GaussianEnvelope(width**m, math.pi * w2),
        selfconv_envelope=GaussianEnvelope((width / math.sqrt(2)) ** m, math.pi / (2 * w2)),
        sup_norm=1.0,
    )


def _bump_profile(s):
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    si = s[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - si * si))
    return out


def _bump_second_derivative(s):
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    si = s[inside]
    q = 1.0 - si * si
    d1 = -2 * si / q**2
    d2 = -2 / q**2 - 8 * si * si / q**3
    out[inside] = (d1 * d1 + d2) * np.exp(1.0 - 1.0 / q)
    return out


def bump(center: float = 0.0, halfwidth: float = 1.0, alpha: float = 1.0) -> WeightFunction:
    """Smooth compactly supported bump exp(1 - 1/(1 - s^2)), s = (y - center)/halfwidth.

    Only m = 1. Its transform has no closed form; the transform envelope
    min(int f, ||f''||_1 / (2 pi t)^2) uses L1 norms computed numerically.
    """
    if halfwidth <= 0:
        raise ValidationError("halfwidth must be positive")
    h = float(halfwidth)
    c = float(center)
    p = 2 + alpha
    C = (abs(c) + h) ** p

    def func(y):
        return _bump_profile((np.asarray(y, dtype=float) - c) / h)

    mass = integrate_interval(lambda s: _bump_profile(s), -1.0, 1.0, tol=1e-13).value.real * h
    sq = integrate_interval(lambda s: _bump_profile(s) ** 2, -1.0, 1.0, tol=1e-13).value.real * h
    grid = np.linspace(-1.0, 1.0, 200_001)
    d2 = np.abs(_bump_second_derivative(grid))
    l1_d2 = float(np.sum(0.5 * (d2[1:] + d2[:-1]) * np.diff(grid))) / h * 1.01
    t0 = math.sqrt(l1_d2 / (4 * math.pi**2 * mass))
    return WeightFunction(
        name="bump",
        func=func,
        decay_C=C,
        decay_alpha=alpha,
        m=1,
        params={"center": c, "halfwidth": h},
        ft_envelope=PowerEnvelope(mass, 2.0, t0),
        selfconv_envelope=BoxEnvelope(sq, 2 * h),
        sup_norm=1.0,
        support=(c, h),
    )


def lorentzian(C: float = 1.0, alpha: float = 1.0) -> WeightFunction:
    """1 / (1 + y^2) with a certificate it cannot satisfy; a negative test case."""

    def fourier(xi):
        return math.pi * np.exp(-2 * math.pi * np.abs(np.asarray(xi, dtype=float)))

    return WeightFunction(
        name="lorentzian",
        func=lambda y: 1.0 / (1.0 + y * y),
        decay_C=C,
        decay_alpha=alpha,
        params={},
        fourier=fourier,
        sup_norm=1.0,
    )


def zero(m: int = 1) -> WeightFunction:
    def func(y):
        return np.zeros(np.shape(y)[:1] if m > 1 else np.shape(y))

    def fourier(xi):
        return np.zeros(np.shape(xi)[:1] if m > 1 else np.shape(xi))

    return WeightFunction(
        name="zero",
        func=func,
        decay_C=1.0,
        decay_alpha=1.0,
        m=m,
        fourier=fourier,
        selfconv=fourier,
        ft_envelope=BoxEnvelope(0.0, 0.0),
        selfconv_envelope=BoxEnvelope(0.0, 0.0),
        sup_norm=0.0,
        is_zero=True,
    )


def tabulated(path, C: float, alpha: float) -> WeightFunction:
    """Weight from a CSV of (y, Re f, Im f) samples, cubic-spline interpolated.

    The function is zero outside the tabulated range. The decay certificate
    is supplied by the caller and verified later by ``decay_check``.
    """
    from scipy.interpolate import CubicSpline

    try:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot read weight table {path}: {exc}") from None
    if data.shape[1] != 3 or len(data) < 4:
        raise ValidationError("weight table needs >= 4 rows of (y, Re f, Im f)")
    y = data[:, 0]
    if np.any(np.diff(y) <= 0):
        raise ValidationError("weight table abscissae must be strictly increasing")
    re = CubicSpline(y, data[:, 1])
    im = CubicSpline(y, data[:, 2])
    lo, hi = float(y[0]), float(y[-1])
    real = not np.any(data[:, 2])

    def func(t):
        t = np.asarray(t, dtype=float)
        inside = (t >= lo) & (t <= hi)
        out = np.zeros(t.shape, dtype=complex)
        out[inside] = re(t[inside]) + 1j * im(t[inside])
        return out

    fine = np.linspace(lo, hi, 20 * len(y))
    sup = float(np.max(np.abs(func(fine))))
    return WeightFunction(
        name="tabulated",
        func=func,
        decay_C=C,
        decay_alpha=alpha,
        params={"path": str(path)},
        sup_norm=sup,
        support=(0.5 * (lo + hi), 0.5 * (hi - lo)),
        real=real,
    )


_LIBRARY = {"gaussian": gaussian, "bump": bump, "lorentzian": lorentzian, "zero": zero}


def make_weight(name: str, **params) -> WeightFunction:
    """Build a library weight by name; ``tabulated`` needs path, C, alpha."""
    if name == "tabulated":
        missing = {"path", "C", "alpha"} - set(params)
        if missing:
            raise ValidationError(f"tabulated weight needs {sorted(missing)}")
        return tabulated(params["path"], float(params["C"]), float(params["alpha"]))
    try:
        factory = _LIBRARY[name]
    except KeyError:
        raise ValidationError(f"unknown weight {name!r}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ValidationError(f"bad parameters for weight {name!r}: {exc}") from None

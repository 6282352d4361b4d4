"""Cut-and-project schemes: lattice, projections, star map, dual, enumeration.

Lattice points are carried as integer coordinate vectors with respect to the
basis columns. Point sets are ``(n_points, d + m)`` int64 arrays; direct and
internal positions are derived from them on demand.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._backend import kernels
from .errors import ResourceCapError, ValidationError
from .numerics import ball_volume

__all__ = [
    "TAU",
    "SQRT5",
    "BOUNDARY_TOL",
    "DEFAULT_POINT_CAP",
    "CutProjectScheme",
    "GoldenInteger",
    "LatticePoint",
    "covolume",
    "dual_scheme",
    "enumerate_points",
    "fibonacci_scheme",
    "from_basis",
    "load_scheme",
    "project_direct",
    "save_scheme",
    "shortest_vector_length",
    "star",
]

TAU = (1.0 + math.sqrt(5.0)) / 2.0
SQRT5 = math.sqrt(5.0)
BOUNDARY_TOL = 1e-12
DEFAULT_POINT_CAP = 20_000_000
MAX_CONDITION = 1e12


@dataclass(frozen=True, order=True)
class GoldenInteger:
    """Exact element a + b*tau of Z[tau]."""

    a: int
    b: int

    def __float__(self):
        return self.a + self.b * TAU

    def sign(self) -> int:
        return int(golden_sign(np.array([self.a]), np.array([self.b]))[0])

    @classmethod
    def parse(cls, text: str) -> "GoldenInteger":
        """Parse forms like ``-1``, ``tau``, ``tau-1``, ``2-3*tau``."""
        s = text.replace(" ", "").lower()
        if not s:
            raise ValidationError("empty golden integer")
        a = b = 0
        for term in s.replace("-", "+-").split("+"):
            if not term:
                continue
            if term.endswith("tau"):
                coef = term[:-3].rstrip("*")
                b += -1 if coef == "-" else 1 if coef == "" else int(coef)
            else:
                a += int(term)
        return cls(a, b)


def golden_sign(a, b):
    """Exact sign of a + b*tau for int arrays (|a|, |b| < 2**30)."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    # a + b tau = (2a + b + b sqrt5) / 2
    p = 2 * a + b
    sp, sb = np.sign(p), np.sign(b)
    # opposite signs: the larger of p^2 and 5 b^2 wins (never equal unless both 0)
    dominant = np.where(p * p > 5 * b * b, sp, sb)
    return np.where(sb == 0, sp, np.where((sp == 0) | (sp == sb), sb, dominant))


@dataclass(frozen=True)
class LatticePoint:
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    def __add__(self, other):
        return LatticePoint(tuple(x + y for x, y in zip(self.coords, other.coords)))

    def __neg__(self):
        return LatticePoint(tuple(-x for x in self.coords))


@dataclass(frozen=True, eq=False)
class CutProjectScheme:
    """A lattice in R^d x R^m given by the columns of ``basis``.

    ``certified`` is set only by algebraic constructors, which guarantee
    that the direct projection is injective on the lattice and the internal
    projection has dense image. ``golden`` marks schemes whose star map is
    exact in Z[tau] (the Fibonacci family).
    """

    d: int
    m: int
    basis: np.ndarray
    name: str = "custom"
    certified: bool = False
    golden: bool = False
    _inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        B = np.array(self.basis, dtype=float)
        n = self.d + self.m
        if self.d < 1 or self.m < 1:
            raise ValidationError("d and m must be at least 1")
        if B.shape != (n, n):
            raise ValidationError(f"basis must be {n}x{n}, got {B.shape}")
        if not abs(np.linalg.det(B)) > 1e-300:
            raise ValidationError("basis is singular")
        if np.linalg.cond(B) > MAX_CONDITION:
            raise ValidationError("basis is numerically singular")
        B.setflags(write=False)
        inv = np.linalg.inv(B)
        inv.setflags(write=False)
        object.__setattr__(self, "basis", B)
        object.__setattr__(self, "_inv", inv)

    @property
    def n(self) -> int:
        return self.d + self.m

    @property
    def covolume(self) -> float:
        return covolume(self)

    def dual(self) -> "CutProjectScheme":
        return dual_scheme(self)

    def positions(self, coords) -> np.ndarray:
        c = self._coords(coords)
        return c @ self.basis.T

    def direct(self, coords) -> np.ndarray:
        return self.positions(coords)[..., : self.d]

    def internal(self, coords) -> np.ndarray:
        return self.positions(coords)[..., self.d :]

    def star_exact(self, coords):
        """(a, b) int arrays with star = a + b*tau; golden schemes only."""
        if not self.golden:
            raise ValidationError(f"scheme {self.name!r} has no exact star map")
        c = self._coords(coords)
        return c[..., 0] + c[..., 1], -c[..., 1]

    def _coords(self, coords) -> np.ndarray:
        if isinstance(coords, LatticePoint):
            coords = coords.coords
        c = np.asarray(coords)
        if c.shape[-1:] != (self.n,):
            raise ValidationError(
                f"coordinates of length {c.shape[-1:]} do not match scheme dimension {self.n}"
            )
        if not np.issubdtype(c.dtype, np.integer):
            if not np.all(c == np.round(c)):
                raise ValidationError("lattice coordinates must be integers")
            c = c.astype(np.int64)
        return c.astype(np.int64, copy=False)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "d": self.d,
            "m": self.m,
            "basis": [f"{v:.17g}" for v in self.basis.ravel()],
            "certified": self.certified,
        }


def fibonacci_scheme() -> CutProjectScheme:
    """Z[tau] embedded as {(x, x*)}: basis columns (1, 1) and (tau, 1 - tau)."""
    basis = np.array([[1.0, TAU], [1.0, 1.0 - TAU]])
    return CutProjectScheme(1, 1, basis, name="fibonacci", certified=True, golden=True)


def from_basis(basis, d: int, m: int, name: str = "custom") -> CutProjectScheme:
    """Generic scheme; not certified as a valid cut-and-project scheme."""
    return CutProjectScheme(d, m, np.asarray(basis, dtype=float), name=name)


def project_direct(p, s: CutProjectScheme) -> np.ndarray:
    return s.direct(p)


def star(p, s: CutProjectScheme) -> np.ndarray:
    return s.internal(p)


def covolume(s: CutProjectScheme) -> float:
    return float(abs(np.linalg.det(s.basis)))


def dual_scheme(s: CutProjectScheme) -> CutProjectScheme:
    """Scheme of the dual lattice; basis is the inverse transpose."""
    name = s.name[:-5] if s.name.endswith("-dual") else s.name + "-dual"
    if s.certified and name == "fibonacci":
        return fibonacci_scheme()
    return CutProjectScheme(s.d, s.m, s._inv.T.copy(), name=name, certified=s.certified)


def enumerate_points(
    s: CutProjectScheme,
    direct_ball: tuple,
    internal_ball: tuple,
    cap: int = DEFAULT_POINT_CAP,
) -> np.ndarray:
    """Lattice points with direct part in B_r(a) and internal part in B_t(u).

    ``direct_ball`` is ``(a, r)`` and ``internal_ball`` is ``(u, t)``; centres
    may be scalars when the dimension is 1. Balls are closed, decided with
    absolute tolerance ``BOUNDARY_TOL`` on the norms. Returns integer
    coordinates sorted lexicographically.
    """
    a, r = direct_ball
    u, t = internal_ball
    a = np.broadcast_to(np.asarray(a, dtype=float), (s.d,)).copy()
    u = np.broadcast_to(np.asarray(u, dtype=float), (s.m,)).copy()
    r, t = float(r), float(t)
    if not (r > 0 and t > 0 and math.isfinite(r) and math.isfinite(t)):
        raise ValidationError("ball radii must be positive and finite")
    expected = ball_volume(s.d, r) * ball_volume(s.m, t) / s.covolume
    if expected > cap:
        raise ResourceCapError(f"about {expected:.3g} points expected, cap is {cap}")

    center = np.concatenate([a, u])
    half = np.concatenate([np.full(s.d, r), np.full(s.m, t)])
    c_mid = s._inv @ center
    c_half = np.abs(s._inv) @ half
    lo = np.floor(c_mid - c_half).astype(np.int64) - 1
    hi = np.ceil(c_mid + c_half).astype(np.int64) + 1

    # widest coordinate goes last: it is solved per prefix, not scanned
    order = np.argsort(hi - lo, kind="stable")
    prefix_size = float(np.prod((hi - lo + 1)[order[:-1]].astype(float)))
    if prefix_size > 50 * cap:
        raise ResourceCapError(f"search box of {prefix_size:.3g} prefixes exceeds cap")
    B = np.ascontiguousarray(s.basis[:, order])
    try:
        cand = kernels.enumerate_candidates(
            B, s.d, a, r, u, t,
            np.ascontiguousarray(lo[order]), np.ascontiguousarray(hi[order]),
            4 * cap + 1024,
        )
    except OverflowError as exc:
        raise ResourceCapError(f"candidate count exceeded cap ({exc})") from None
    coords = np.empty_like(cand)
    coords[:, order] = cand
    if len(coords) == 0:
        return coords.reshape(0, s.n)

    pos = coords @ s.basis.T
    dn = np.linalg.norm(pos[:, : s.d] - a, axis=1)
    tn = np.linalg.norm(pos[:, s.d :] - u, axis=1)
    coords = coords[(dn <= r + BOUNDARY_TOL) & (tn <= t + BOUNDARY_TOL)]
    if len(coords) > cap:
        raise ResourceCapError(f"{len(coords)} points exceed cap {cap}")
    return sort_coords(coords)


def sort_coords(coords: np.ndarray) -> np.ndarray:
    if len(coords) == 0:
        return coords
    return coords[np.lexsort(coords.T[::-1])]


def save_scheme(s: CutProjectScheme, path) -> None:
    Path(path).write_text(json.dumps(s.to_dict(), indent=2) + "\n")


def load_scheme(path) -> CutProjectScheme:
    try:
        data = json.loads(Path(path).read_text())
        d, m = int(data["d"]), int(data["m"])
        basis = np.array([float(v) for v in data["basis"]]).reshape(d + m, d + m)
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise ValidationError(f"cannot read scheme file {path}: {exc}") from None
    return scheme_from_dict(data, basis, d, m)


def scheme_from_dict(data, basis, d, m) -> CutProjectScheme:
    name = data.get("name", "custom")
    if data.get("certified"):
        for builtin in (fibonacci_scheme(), fibonacci_scheme().dual()):
            if name == builtin.name and np.array_equal(basis, builtin.basis):
                return builtin
        raise ValidationError(
            "only the built-in schemes can be loaded as certified; "
            "set certified to false for custom bases"
        )
    return CutProjectScheme(d, m, basis, name=name)


def shortest_vector_length(s: CutProjectScheme) -> float:
    """Length of a shortest nonzero lattice vector (exact search)."""
    rho = float(np.min(np.linalg.norm(s.basis, axis=0)))
    pts = enumerate_points(s, (np.zeros(s.d), rho), (np.zeros(s.m), rho))
    norms = np.linalg.norm(pts @ s.basis.T, axis=1)
    return float(np.min(norms[np.any(pts != 0, axis=1)]))

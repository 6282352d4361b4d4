"""Radial upper envelopes G(t) >= |h(y)| for |y| >= t, with exact tail integrals.

Used to certify truncated lattice sums of products h1(x) h2(x*): every
lattice point y owns a disjoint ball of radius lam/2, so

    sum_{y excluded} G1(|x|) G2(|x*|)
        <= 1/vol(B_{lam/2}) * int G1((|x| - lam/2)_+) G2((|x*| - lam/2)_+)

over the correspondingly widened region. The integrals below are the
one-dimensional factors of that bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .numerics import erfc

__all__ = ["BoxEnvelope", "GaussianEnvelope", "PowerEnvelope", "shifted_tail"]


@dataclass(frozen=True)
class GaussianEnvelope:
    """G(t) = A exp(-a t^2)."""

    A: float
    a: float

    def __call__(self, t):
        return self.A * math.exp(-self.a * t * t)

    def tail(self, b: float) -> float:
        """Integral of G over [b, inf), b >= 0."""
        if self.A == 0:
            return 0.0
        return self.A * 0.5 * math.sqrt(math.pi / self.a) * erfc(math.sqrt(self.a) * b)

    def squared(self) -> "GaussianEnvelope":
        return GaussianEnvelope(self.A**2, 2 * self.a)

    def scaled(self, c: float) -> "GaussianEnvelope":
        return GaussianEnvelope(self.A * c, self.a)


@dataclass(frozen=True)
class PowerEnvelope:
    """G(t) = A min(1, (t0 / t)^q), q > 1."""

    A: float
    q: float
    t0: float

    def __call__(self, t):
        return self.A if t <= self.t0 else self.A * (self.t0 / t) ** self.q

    def tail(self, b: float) -> float:
        if b < self.t0:
            return self.A * (self.t0 - b) + self.A * self.t0 / (self.q - 1)
        return self.A * self.t0**self.q * b ** (1 - self.q) / (self.q - 1)

    def squared(self) -> "PowerEnvelope":
        return PowerEnvelope(self.A**2, 2 * self.q, self.t0)

    def scaled(self, c: float) -> "PowerEnvelope":
        return PowerEnvelope(self.A * c, self.q, self.t0)


@dataclass(frozen=True)
class BoxEnvelope:
    """G(t) = A for t <= t0, else 0 (compact support)."""

    A: float
    t0: float

    def __call__(self, t):
        return self.A if t <= self.t0 else 0.0

    def tail(self, b: float) -> float:
        return self.A * max(0.0, self.t0 - b)

    def squared(self) -> "BoxEnvelope":
        return BoxEnvelope(self.A**2, self.t0)

    def scaled(self, c: float) -> "BoxEnvelope":
        return BoxEnvelope(self.A * c, self.t0)


def shifted_tail(env, rho: float, delta: float) -> float:
    """Integral over |x| > rho (x in R) of G((|x| - delta)_+)."""
    rho = max(rho, 0.0)
    flat = max(0.0, delta - rho) * env(0.0)
    return 2.0 * (flat + env.tail(max(rho - delta, 0.0)))

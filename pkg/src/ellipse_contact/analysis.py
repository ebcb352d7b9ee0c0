"""Excluded-area quadrature and contact-locus curves on top of the kernel.

The excluded area of a pair at fixed orientations is half the integral of
the squared contact distance over the center-line direction.  The
integrand is smooth and 2*pi-periodic, so the fixed trapezoid rule
converges spectrally and is the default; Gauss-Legendre panels and
adaptive Simpson are kept for cross-checks and for near-degenerate aspect
ratios where curvature spikes.  Sums are accumulated with math.fsum, so a
result at a fixed panel count is reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .contact import closest_approach, contact_point
from .geometry import EllipseShape, PairConfiguration, UnitVec2, Vec2

__all__ = [
    "AdaptiveLimitReached",
    "QuadratureScheme",
    "QuadratureSpec",
    "LocusCurve",
    "excluded_area",
    "excluded_boundary",
    "contact_locus",
]


class AdaptiveLimitReached(ArithmeticError):
    """Adaptive Simpson hit its recursion limit before the tolerance."""


class QuadratureScheme(Enum):
    FIXED_TRAPEZOID = "fixed-trapezoid"
    GAUSS_LEGENDRE_PANELS = "gauss-legendre"
    ADAPTIVE_SIMPSON = "adaptive-simpson"


@dataclass(frozen=True)
class QuadratureSpec:
    scheme: QuadratureScheme = QuadratureScheme.FIXED_TRAPEZOID
    panels: int = 2048
    abs_tol: float = 1e-8

    def __post_init__(self) -> None:
        if self.panels < 16:
            raise ValueError("panels must be at least 16")
        if self.abs_tol <= 0.0:
            raise ValueError("abs_tol must be positive")


@dataclass(frozen=True)
class LocusCurve:
    """A closed plot-ready curve: (sweep angle, point) samples."""

    samples: list[tuple[float, Vec2]]
    closed: bool = True

    def points(self) -> list[Vec2]:
        return [p for _, p in self.samples]

    def enclosed_area(self) -> float:
        """Shoelace area of the polygon through the samples."""
        pts = self.points()
        n = len(pts)
        return 0.5 * abs(
            math.fsum(
                pts[i].x * pts[(i + 1) % n].y - pts[(i + 1) % n].x * pts[i].y
                for i in range(n)
            )
        )


def _distance_of_angle(
    shape1: EllipseShape, shape2: EllipseShape, k1: UnitVec2, k2: UnitVec2
):
    def d(theta: float) -> float:
        cfg = PairConfiguration(shape1, shape2, k1, k2, UnitVec2.from_angle(theta))
        return closest_approach(cfg).d

    return d


def _adaptive_simpson(f, lo, hi, tol, max_depth=28):
    def simpson(a, b, fa, fm, fb):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(a, m, fa, flm, fm)
        right = simpson(m, b, fm, frm, fb)
        if depth >= max_depth:
            raise AdaptiveLimitReached(
                f"recursion depth {max_depth} reached on [{a}, {b}]"
            )
        if abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return recurse(a, m, fa, flm, fm, left, tol / 2.0, depth + 1) + recurse(
            m, b, fm, frm, fb, right, tol / 2.0, depth + 1
        )

    m = 0.5 * (lo + hi)
    fa, fm, fb = f(lo), f(m), f(hi)
    return recurse(lo, hi, fa, fm, fb, simpson(lo, hi, fa, fm, fb), tol, 0)


def excluded_area(
    shape1: EllipseShape,
    shape2: EllipseShape,
    k1: UnitVec2,
    k2: UnitVec2,
    spec: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Area of center positions of shape2 excluded by overlap with shape1:
    one half of the integral of d(theta)^2 over the full circle."""
    d = _distance_of_angle(shape1, shape2, k1, k2)
    f = lambda theta: d(theta) ** 2

    if spec.scheme is QuadratureScheme.FIXED_TRAPEZOID:
        h = 2.0 * math.pi / spec.panels
        return 0.5 * h * math.fsum(f(j * h) for j in range(spec.panels))
    if spec.scheme is QuadratureScheme.GAUSS_LEGENDRE_PANELS:
        nodes, weights = np.polynomial.legendre.leggauss(8)
        h = 2.0 * math.pi / spec.panels
        terms = []
        for j in range(spec.panels):
            a = j * h
            mid, half = a + 0.5 * h, 0.5 * h
            terms.extend(
                0.5 * half * w * f(mid + half * x) for x, w in zip(nodes, weights)
            )
        return math.fsum(terms)
    return 0.5 * _adaptive_simpson(f, 0.0, 2.0 * math.pi, spec.abs_tol)


def excluded_boundary(
    shape1: EllipseShape,
    shape2: EllipseShape,
    k1: UnitVec2,
    k2: UnitVec2,
    n: int,
) -> LocusCurve:
    """The curve traced by the center of shape2 as it slides around shape1
    staying tangent: the boundary of the excluded area."""
    if n < 16:
        raise ValueError("need at least 16 samples")
    d = _distance_of_angle(shape1, shape2, k1, k2)
    samples = []
    for j in range(n):
        theta = 2.0 * math.pi * j / n
        dist = d(theta)
        samples.append((theta, Vec2(dist * math.cos(theta), dist * math.sin(theta))))
    return LocusCurve(samples=samples, closed=True)


def contact_locus(
    shape1: EllipseShape,
    shape2: EllipseShape,
    k2: UnitVec2,
    dhat: UnitVec2,
    n: int,
) -> LocusCurve:
    """The contact point's trace as shape1 spins in place while shape2 keeps
    its orientation and stays tangent along the fixed center line."""
    if n < 16:
        raise ValueError("need at least 16 samples")
    samples = []
    for j in range(n):
        theta = 2.0 * math.pi * j / n
        cfg = PairConfiguration(shape1, shape2, UnitVec2.from_angle(theta), k2, dhat)
        rc, _ = contact_point(cfg)
        samples.append((theta, rc))
    return LocusCurve(samples=samples, closed=True)

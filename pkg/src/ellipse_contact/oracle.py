"""Independent brute-force ground truth for the analytic kernel.

Nothing here shares a code path with the closed-form pipeline: distances
come from bisecting an overlap predicate built on dense boundary sampling
(with local refinement of the sampled minimum so grazing contact is not
missed), and quartic roots come from the companion-matrix method.  The
oracle is allowed to be orders of magnitude slower than the kernel; it is
used by the test suite and the ``verify`` CLI command, never in a hot path.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .contact import closest_approach
from .geometry import EllipseShape, PairConfiguration, UnitVec2
from .quartic import NoPhysicalRoot, QuarticCoeffs

__all__ = [
    "NonConvergence",
    "OracleSettings",
    "oracle_distance",
    "oracle_circle_ellipse_distance",
    "oracle_quartic_roots",
    "stratified_configuration",
    "stratified_configurations",
    "VerifyReport",
    "verify_random",
]


class NonConvergence(ArithmeticError):
    """The oracle failed to bracket or converge within its iteration budget."""


@dataclass(frozen=True)
class OracleSettings:
    boundary_samples: int = 4096
    bisection_tol: float = 1e-10
    refine_iters: int = 64

    def __post_init__(self) -> None:
        if self.boundary_samples < 64:
            raise ValueError("boundary_samples must be at least 64")
        if self.bisection_tol <= 0.0 or self.refine_iters <= 0:
            raise ValueError("tolerances and iteration counts must be positive")


class _SampledBoundary:
    """One ellipse boundary, sampled densely, tested against the other
    ellipse's quadratic form as a function of the center separation t.

    With the boundary point p(u) and the other form M, the value
    f(u, t) = (p(u) + t*s).M.(p(u) + t*s) is quadratic in t, so the
    u-profile for any t costs two vector operations on the precomputed
    tables.  The sampled minimum is then refined on the continuous
    parameter by guarded Newton (analytic derivatives) with golden-section
    fallback, because a grid minimum alone cannot certify grazing contact.
    """

    def __init__(self, shape: EllipseShape, axis: UnitVec2, other: np.ndarray,
                 shift: np.ndarray, n: int) -> None:
        self.a, self.b = shape.a, shape.b
        self.k = np.array([axis.x, axis.y])
        self.kp = np.array([-axis.y, axis.x])
        self.other = other
        self.shift = shift  # separation direction as seen from this boundary
        u = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        self.u = u
        self.du = 2.0 * math.pi / n
        pts = np.outer(self.a * np.cos(u), self.k) + np.outer(self.b * np.sin(u), self.kp)
        self.const = np.einsum("ij,jk,ik->i", pts, other, pts)
        self.lin = pts @ (other @ shift)
        self.quad = float(shift @ other @ shift)

    def _value(self, u: float, t: float) -> float:
        p = (self.a * math.cos(u)) * self.k + (self.b * math.sin(u)) * self.kp + t * self.shift
        return float(p @ self.other @ p)

    def _refined_min(self, t: float, i: int) -> float:
        """Minimum of f(., t) near grid index i on the continuous parameter."""
        lo = self.u[i] - self.du
        hi = self.u[i] + self.du
        u = self.u[i]
        other, k, kp, a, b = self.other, self.k, self.kp, self.a, self.b
        ts = t * self.shift
        for _ in range(12):
            cu, su = math.cos(u), math.sin(u)
            p = (a * cu) * k + (b * su) * kp + ts
            dp = (-a * su) * k + (b * cu) * kp
            mp = other @ p
            f1 = 2.0 * float(dp @ mp)
            f2 = 2.0 * (float(dp @ other @ dp) - float(((a * cu) * k + (b * su) * kp) @ mp))
            if f2 <= 0.0:
                break
            step = f1 / f2
            nu = u - step
            if not (lo <= nu <= hi):
                break
            u = nu
            if abs(step) < 1e-13:
                return self._value(u, t)
        # golden-section fallback over the bracketing grid cell
        gr = (math.sqrt(5.0) - 1.0) / 2.0
        x1 = hi - gr * (hi - lo)
        x2 = lo + gr * (hi - lo)
        v1, v2 = self._value(x1, t), self._value(x2, t)
        for _ in range(48):
            if v1 < v2:
                hi, x2, v2 = x2, x1, v1
                x1 = hi - gr * (hi - lo)
                v1 = self._value(x1, t)
            else:
                lo, x1, v1 = x1, x2, v2
                x2 = lo + gr * (hi - lo)
                v2 = self._value(x2, t)
        return min(v1, v2)

    def min_form(self, t: float, refine_band: float = 5e-2) -> float:
        profile = self.const + (2.0 * t) * self.lin
        i = int(np.argmin(profile))
        m = float(profile[i]) + t * t * self.quad
        if abs(m - 1.0) < refine_band:
            m = self._refined_min(t, i)
        return m


def _form_array(shape: EllipseShape, axis: UnitVec2) -> np.ndarray:
    e2 = shape.eccentricity_sq()
    k = np.array([axis.x, axis.y])
    return (np.eye(2) - e2 * np.outer(k, k)) / (shape.b * shape.b)


def oracle_distance(cfg: PairConfiguration, settings: OracleSettings = OracleSettings()) -> float:
    """Contact distance by bisection on the sampled-overlap predicate.

    The bracket [b1+b2, a1+a2] (with a small outward margin) always
    straddles the contact distance for convex ellipses; both boundaries are
    tested against the other ellipse so one-sided containment cannot fool
    the predicate.
    """
    m1 = _form_array(cfg.shape1, cfg.k1)
    m2 = _form_array(cfg.shape2, cfg.k2)
    dv = np.array([cfg.dhat.x, cfg.dhat.y])
    n = settings.boundary_samples
    # boundary of 1 relative to the center of 2 sits at -t*dhat, and vice versa
    b1 = _SampledBoundary(cfg.shape1, cfg.k1, m2, -dv, n)
    b2 = _SampledBoundary(cfg.shape2, cfg.k2, m1, dv, n)

    lo = (cfg.shape1.b + cfg.shape2.b) * (1.0 - 1e-6)
    hi = (cfg.shape1.a + cfg.shape2.a) * (1.0 + 1e-6)

    def overlapping(t: float) -> bool:
        return min(b1.min_form(t), b2.min_form(t)) < 1.0

    if not overlapping(lo) or overlapping(hi):
        raise NonConvergence("bisection bracket does not straddle the contact")
    for _ in range(settings.refine_iters):
        mid = 0.5 * (lo + hi)
        if overlapping(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= settings.bisection_tol * mid:
            return 0.5 * (lo + hi)
    raise NonConvergence(
        f"bisection did not reach tol {settings.bisection_tol} in "
        f"{settings.refine_iters} iterations"
    )


def oracle_circle_ellipse_distance(
    a2p: float,
    b2p: float,
    axis: UnitVec2,
    dhat: UnitVec2,
    settings: OracleSettings = OracleSettings(),
) -> float:
    """Contact distance of the unit circle and an (a2p, b2p) ellipse.

    Validates the transformed-frame stage in isolation; same machinery as
    oracle_distance with shape1 pinned to the unit circle.
    """
    cfg = PairConfiguration(
        EllipseShape(1.0, 1.0), EllipseShape(a2p, b2p), UnitVec2(1.0, 0.0), axis, dhat
    )
    return oracle_distance(cfg, settings)


def oracle_quartic_roots(c: QuarticCoeffs) -> list[complex]:
    """All four roots by the companion-matrix method, residual-checked."""
    if c.a == 0.0:
        raise ValueError("leading coefficient must be nonzero")
    roots = [complex(r) for r in np.roots(c.as_tuple())]
    co = c.as_tuple()
    for r in roots:
        res = abs((((co[0] * r + co[1]) * r + co[2]) * r + co[3]) * r + co[4])
        scale = max(abs(co[i]) * abs(r) ** (4 - i) for i in range(5))
        if res > 1e-9 * max(scale, abs(co[4])):
            raise NonConvergence(f"companion root {r!r} residual {res!r} too large")
    return roots


# ---------------------------------------------------------------------------
# stratified random configurations

def _random_shape(rng: np.random.Generator, max_aspect: float) -> EllipseShape:
    scale = math.exp(rng.uniform(math.log(0.3), math.log(3.0)))
    aspect = math.exp(rng.uniform(0.0, math.log(max_aspect)))
    return EllipseShape(scale * aspect, scale)


def stratified_configuration(
    seed: int, index: int, max_aspect: float = 20.0
) -> PairConfiguration:
    """Deterministic configuration #index of the stratified stream.

    Strata (by index mod 5): near-parallel axes including exactly parallel
    and anti-parallel, near-perpendicular center line, near-circular
    shapes, and two uniform strata.  The degenerate regimes are deliberately
    over-sampled so every branch of the kernel sees real coverage.
    """
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))
    stratum = index % 5
    s1 = _random_shape(rng, max_aspect)
    s2 = _random_shape(rng, max_aspect)
    th1 = rng.uniform(0.0, 2.0 * math.pi)
    th2 = rng.uniform(0.0, 2.0 * math.pi)
    thd = rng.uniform(0.0, 2.0 * math.pi)
    if stratum == 0:
        eps = 10.0 ** rng.uniform(-18.0, -4.0)
        if rng.uniform() < 0.25:
            eps = 0.0
        th2 = th1 + eps + (math.pi if rng.uniform() < 0.5 else 0.0)
    elif stratum == 1:
        # center line close to the first axis' normal; half the time the
        # axes are near-parallel too, which drives phi toward pi/2
        thd = th1 + 0.5 * math.pi + (10.0 ** rng.uniform(-18.0, -4.0)
                                     if rng.uniform() < 0.5 else 0.0)
        if rng.uniform() < 0.5:
            th2 = th1 + 10.0 ** rng.uniform(-18.0, -4.0)
    elif stratum == 2:
        # eccentricity below 1e-4 for one or both shapes
        s1 = EllipseShape(s1.a, s1.a * (1.0 - rng.uniform(0.0, 5e-9)))
        if rng.uniform() < 0.5:
            s2 = EllipseShape(s2.a, s2.a * (1.0 - rng.uniform(0.0, 5e-9)))
    k1 = UnitVec2.from_angle(th1)
    if stratum == 0 and th2 == th1:
        k2 = k1  # bit-identical axes hit the exact-parallel branch
    else:
        k2 = UnitVec2.from_angle(th2)
    return PairConfiguration(s1, s2, k1, k2, UnitVec2.from_angle(thd))


def stratified_configurations(
    n: int, seed: int, max_aspect: float = 20.0
) -> Iterator[PairConfiguration]:
    for i in range(n):
        yield stratified_configuration(seed, i, max_aspect)


# ---------------------------------------------------------------------------
# analytic-vs-oracle comparison (CLI ``verify`` and the acceptance gate)

@dataclass(frozen=True)
class VerifyReport:
    trials: int
    max_rel_err: float
    mean_rel_err: float
    failures: list[tuple[int, float]]
    root_failures: int


def _verify_chunk(args: tuple[int, int, int, float, OracleSettings]) -> list[tuple[float, float]]:
    seed, start, count, max_aspect, settings = args
    out = []
    for i in range(start, start + count):
        cfg = stratified_configuration(seed, i, max_aspect)
        try:
            d_analytic = closest_approach(cfg).d
        except NoPhysicalRoot:
            d_analytic = math.nan
        out.append((d_analytic, oracle_distance(cfg, settings)))
    return out


def default_workers() -> int:
    env = os.environ.get("ELLIPSE_CONTACT_THREADS", "")
    try:
        return max(1, int(env))
    except ValueError:
        return 1


def verify_random(
    trials: int,
    seed: int,
    tolerance: float = 1e-7,
    settings: OracleSettings = OracleSettings(),
    max_aspect: float = 20.0,
    workers: int | None = None,
) -> VerifyReport:
    """Compare the analytic distance against the oracle on the stratified
    stream; a trial fails when the relative error exceeds the tolerance."""
    workers = default_workers() if workers is None else max(1, workers)
    pairs: list[tuple[float, float]] = []
    root_failures = 0
    if workers == 1:
        pairs = _verify_chunk((seed, 0, trials, max_aspect, settings))
    else:
        chunk = max(1, (trials + workers * 4 - 1) // (workers * 4))
        tasks = [
            (seed, start, min(chunk, trials - start), max_aspect, settings)
            for start in range(0, trials, chunk)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_verify_chunk, tasks):
                pairs.extend(part)

    failures: list[tuple[int, float]] = []
    total = 0.0
    max_err = 0.0
    for i, (d_analytic, d_oracle) in enumerate(pairs):
        if math.isnan(d_analytic):
            root_failures += 1
            failures.append((i, math.inf))
            continue
        err = abs(d_analytic - d_oracle) / d_oracle
        total += err
        if err > max_err:
            max_err = err
        if err > tolerance:
            failures.append((i, err))
    return VerifyReport(
        trials=trials,
        max_rel_err=max_err,
        mean_rel_err=total / max(1, trials),
        failures=failures,
        root_failures=root_failures,
    )

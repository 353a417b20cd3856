"""Dimension estimators and the closed-form spectrum formulas.

Dimensions are defined by limits; here they are estimated by least-squares
slopes of log covering counts over a geometric scale grid, with r_squared
reported as the quality gate.  The closed-form values for truncation-free
collections are implemented alongside for direct comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .covering import (
    DEFAULT_DENSITY_FACTOR,
    count_distinct_cells,
    covering_number,
)
from .errors import DensityContractError, EmptyIntersectionError
from .geometry import SampleSet

DEFAULT_SEED = 0x5EED
DEFAULT_N_CENTERS = 32


@dataclass(frozen=True)
class RegressionFit:
    """Log-log least-squares fit; the slope is the dimension estimate."""

    slope: float
    intercept: float
    r_squared: float
    scales_used: tuple
    counts_used: tuple
    degenerate: bool = False

    def __post_init__(self):
        if not self.degenerate and not (-1e-9 <= self.r_squared <= 1 + 1e-9):
            raise ValueError("r_squared must lie in [0, 1]")
        if any(np.diff(self.scales_used) >= 0):
            raise ValueError("scales must be strictly decreasing")
        if any(c <= 0 for c in self.counts_used):
            raise ValueError("counts must be positive")


@dataclass(frozen=True)
class SpectrumCurve:
    """Assouad-spectrum values over a theta grid in (0, 1)."""

    thetas: tuple
    values: tuple
    kind: str  # estimated | closed-form | regularized
    fits: tuple | None = None
    seed: int | None = None

    def __post_init__(self):
        if len(self.thetas) != len(self.values):
            raise ValueError("thetas and values must have equal length")
        if len(self.thetas) == 0:
            raise ValueError("curve must be non-empty")
        th = np.asarray(self.thetas)
        if np.any(th <= 0) or np.any(th >= 1):
            raise ValueError("thetas must lie in (0, 1)")
        if np.any(np.diff(th) <= 0):
            raise ValueError("thetas must be strictly increasing")
        if self.kind not in ("estimated", "closed-form", "regularized"):
            raise ValueError(f"unknown curve kind {self.kind!r}")


def _fit_loglog(x: np.ndarray, y: np.ndarray, scales, counts) -> RegressionFit:
    if np.allclose(y, y[0]):
        return RegressionFit(slope=0.0, intercept=float(y[0]), r_squared=1.0,
                             scales_used=tuple(scales),
                             counts_used=tuple(counts), degenerate=True)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float((resid**2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return RegressionFit(slope=float(slope), intercept=float(intercept),
                         r_squared=min(max(r2, 0.0), 1.0),
                         scales_used=tuple(scales), counts_used=tuple(counts))


def geometric_scales(r_min: float, r_max: float, n_scales: int) -> np.ndarray:
    """Geometric grid from r_max down to r_min (descending)."""
    if not (0 < r_min < r_max):
        raise ValueError("need 0 < r_min < r_max")
    if n_scales < 2:
        raise ValueError("need at least 2 scales")
    return np.geomspace(r_max, r_min, n_scales)


def estimate_box_dimension(S: SampleSet, r_min: float, r_max: float,
                           n_scales: int = 16,
                           density_factor: float = DEFAULT_DENSITY_FACTOR,
                           ) -> RegressionFit:
    """Slope of log N_r vs log(1/r) over a geometric scale grid."""
    if n_scales < 4:
        raise ValueError("n_scales must be >= 4")
    if r_max > S.diameter:
        raise ValueError(f"r_max={r_max:g} exceeds sample diameter {S.diameter:g}")
    scales = geometric_scales(r_min, r_max, n_scales)
    counts = [covering_number(S, r, density_factor).count for r in scales]
    x = np.log(1.0 / scales)
    y = np.log(counts)
    return _fit_loglog(x, y, scales, counts)


class _CenterCache:
    """Sample points sorted by distance from one center; reused across scales."""

    def __init__(self, points: np.ndarray, center: np.ndarray):
        d2 = ((points - center) ** 2).sum(axis=1)
        order = np.argsort(d2, kind="stable")
        self.points = points[order]
        self.dist = np.sqrt(d2[order])

    def within(self, R: float) -> np.ndarray:
        k = int(np.searchsorted(self.dist, R, side="left"))
        return self.points[:k]


def _pick_centers(S: SampleSet, n_centers: int, seed: int) -> list[np.ndarray]:
    """The accumulation point 0 plus seeded random sample points.

    The proofs concentrate on balls at the accumulation point; extra random
    centers guard the sup over x in the definition.
    """
    centers = [np.zeros(S.ambient_dim)]
    if n_centers > 0:
        rng = np.random.default_rng(seed)
        take = min(n_centers, len(S))
        idx = rng.choice(len(S), size=take, replace=False)
        centers.extend(S.points[i] for i in idx)
    return centers


def estimate_assouad_spectrum_point(S: SampleSet, theta: float,
                                    r_min: float, r_max: float,
                                    n_scales: int = 8,
                                    n_centers: int = DEFAULT_N_CENTERS,
                                    seed: int = DEFAULT_SEED,
                                    density_factor: float = DEFAULT_DENSITY_FACTOR,
                                    ) -> RegressionFit:
    """Estimate dim_A^theta from local covering counts N_r(B(x, r^theta)).

    For each scale r, M(r) is the max over centers of the covering count of
    the sample restricted to B(x, r^theta); the returned slope regresses
    log M(r) against log(r^theta / r) = (theta - 1) log r.
    """
    curve = estimate_spectrum_curve(S, [theta], r_min, r_max,
                                    n_scales=n_scales, n_centers=n_centers,
                                    seed=seed, density_factor=density_factor)
    return curve.fits[0]


def estimate_spectrum_curve(S: SampleSet, thetas, r_min: float, r_max: float,
                            n_scales: int = 8,
                            n_centers: int = DEFAULT_N_CENTERS,
                            seed: int = DEFAULT_SEED,
                            density_factor: float = DEFAULT_DENSITY_FACTOR,
                            ) -> SpectrumCurve:
    """Batch spectrum estimation sharing the per-center distance sort."""
    thetas = sorted(float(t) for t in thetas)
    if any(not (0 < t < 1) for t in thetas):
        raise ValueError("thetas must lie in (0, 1)")
    scales = geometric_scales(r_min, r_max, n_scales)
    if r_min < density_factor * S.delta:
        raise DensityContractError(
            f"r_min={r_min:g} below density contract {density_factor:g}*delta",
            required_delta=r_min / density_factor,
        )
    diam = S.diameter
    for t in thetas:
        if r_max**t > diam + 1e-12:
            raise ValueError(
                f"r_max^theta = {r_max**t:g} exceeds sample diameter {diam:g}"
            )
    centers = [_CenterCache(S.points, c)
               for c in _pick_centers(S, n_centers, seed)]
    # M[t_index, scale_index]
    M = np.zeros((len(thetas), len(scales)), dtype=np.int64)
    for cache in centers:
        for i, t in enumerate(thetas):
            for j, r in enumerate(scales):
                sub = cache.within(r**t)
                if len(sub) == 0:
                    continue
                M[i, j] = max(M[i, j], count_distinct_cells(sub, r))
    fits = []
    values = []
    for i, t in enumerate(thetas):
        good = M[i] > 0
        if not good.any():
            raise EmptyIntersectionError(
                f"no center produced a non-empty ball at theta={t:g}"
            )
        x = (t - 1.0) * np.log(scales[good])
        y = np.log(M[i][good])
        fit = _fit_loglog(x, y, scales[good], M[i][good].tolist())
        fits.append(fit)
        values.append(fit.slope)
    return SpectrumCurve(thetas=tuple(thetas), values=tuple(values),
                         kind="estimated", fits=tuple(fits), seed=seed)


def closed_form_spectrum_curve(p: float, d: int, thetas) -> SpectrumCurve:
    """The exact spectrum of a polynomially concentric sphere collection."""
    thetas = tuple(sorted(float(t) for t in thetas))
    values = tuple(formula_assouad_spectrum(p, d, t) for t in thetas)
    return SpectrumCurve(thetas=thetas, values=values, kind="closed-form")


def regularize(curve: SpectrumCurve) -> SpectrumCurve:
    """Running supremum over the theta-grid prefix (regularized spectrum)."""
    vals = np.maximum.accumulate(np.asarray(curve.values))
    return SpectrumCurve(thetas=curve.thetas, values=tuple(float(v) for v in vals),
                         kind="regularized", fits=curve.fits, seed=curve.seed)


def detect_phase_transition(curve: SpectrumCurve, d: int,
                            tol: float | None = None) -> float | None:
    """Smallest theta where the curve reaches the ambient dimension d.

    Detection threshold is d - tol (default tol = 0.05 d); the crossing is
    linearly interpolated between the bracketing grid points.  Returns None
    when the curve never reaches the threshold.
    """
    if tol is None:
        tol = 0.05 * d
    level = d - tol
    th = np.asarray(curve.thetas)
    v = np.asarray(curve.values)
    above = np.nonzero(v >= level)[0]
    if len(above) == 0:
        return None
    i = int(above[0])
    if i == 0:
        return float(th[0])
    t0, t1 = th[i - 1], th[i]
    v0, v1 = v[i - 1], v[i]
    if v1 <= v0:
        return float(t1)
    return float(t0 + (level - v0) * (t1 - t0) / (v1 - v0))


# ---------------------------------------------------------------------------
# closed-form formulas


def formula_box_dim(p: float, d: int) -> float:
    """Box dimension of a p-concentric round sphere collection in R^d."""
    if p <= 0:
        raise ValueError("p must be > 0")
    if d < 2:
        raise ValueError("d must be >= 2")
    return max(d / (1.0 + p), d - 1.0)


def formula_assouad_spectrum(p: float, d: int, theta: float) -> float:
    """Assouad spectrum of a p-concentric round sphere collection in R^d.

    Two branches depending on the product p*(d-1), both capped at d and
    meeting at the phase transition theta = p/(p+1).
    """
    if p <= 0:
        raise ValueError("p must be > 0")
    if d < 2:
        raise ValueError("d must be >= 2")
    if not (0 < theta < 1):
        raise ValueError("theta must lie in (0, 1)")
    if p * (d - 1) <= 1:
        return min(d / ((1.0 + p) * (1.0 - theta)), float(d))
    return min(d - 1.0 + theta / (p * (1.0 - theta)), float(d))


def formula_spectrum_upper_bound(d0: float, d: int, theta: float) -> float:
    """General spectrum upper bound min{d0 / (1 - theta), d} from box dim d0."""
    if not (d - 1 <= d0 <= d):
        raise ValueError("need d - 1 <= d0 <= d")
    if not (0 < theta < 1):
        raise ValueError("theta must lie in (0, 1)")
    return min(d0 / (1.0 - theta), float(d))


def phase_transition_theta(p: float) -> float:
    """Exact transition p / (p + 1) where the spectrum reaches d."""
    if p <= 0:
        raise ValueError("p must be > 0")
    return p / (p + 1.0)


@dataclass(frozen=True)
class ImpossibilityWindow:
    """Theta interval where a generator of box dimension d0 > d-1 forces
    a spectrum value above the ambient dimension (hence no such polynomially
    concentric collection exists)."""

    theta_lo: float
    theta_hi: float
    bound: Callable[[float], float] = field(repr=False)
    branch: str = ""  # "p*d0>1" or "p*d0<=1"

    def contains(self, theta: float) -> bool:
        return self.theta_lo < theta < self.theta_hi

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.theta_lo + self.theta_hi)


def impossibility_window(p: float, d: int, d0: float) -> ImpossibilityWindow:
    """Window of theta values where the spectrum lower bound exceeds d.

    Requires d0 > d - 1 (for d0 = d - 1 no contradiction exists).  The
    returned bound function is the spectrum lower bound of the hypothetical
    collection; it is > d strictly inside the window.
    """
    if p <= 0:
        raise ValueError("p must be > 0")
    if not (d - 1 < d0 <= d):
        raise ValueError(f"need d-1 < d0 <= d, got d0={d0:g} for d={d}")
    hi = p / (p + 1.0)
    if p * d0 > 1:
        lo = p * (d - d0) / (p * (d - d0) + 1.0)

        def bound(theta: float) -> float:
            return d0 + theta / (p * (1.0 - theta))

        branch = "p*d0>1"
    else:
        lo = (d * (p + 1.0) - (d0 + 1.0)) / (d * (p + 1.0))

        def bound(theta: float) -> float:
            return (d0 + 1.0) / ((1.0 - theta) * (p + 1.0))

        branch = "p*d0<=1"
    return ImpossibilityWindow(theta_lo=lo, theta_hi=hi, bound=bound,
                               branch=branch)

"""Quasiconformal classification of spiral shells and distortion diagnostics.

The iff classification (a K-quasiconformal map sends the p-shell onto the
q-shell exactly when K >= p/q) is decided on exact closed-form data; sample
estimation only enters the spectrum-equivalence cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dimension import (
    SpectrumCurve,
    estimate_spectrum_curve,
    phase_transition_theta,
)
from .geometry import SampleSet, _canonicalize, hausdorff_distance, radial_stretch


@dataclass
class ShellPair:
    """Pair of polynomial shell exponents, normalized so p >= q."""

    p: float
    q: float

    def __post_init__(self):
        if self.p <= 0 or self.q <= 0:
            raise ValueError("p and q must be > 0")
        if self.p < self.q:
            self.p, self.q = self.q, self.p


@dataclass(frozen=True)
class DistortionParams:
    """Inputs of the quasiconformal spectrum-distortion inequality."""

    d: int
    K: float
    s: float | None = None  # free exponent; existence only is known, default 2d
    t: float = 1.0

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.t <= 0:
            raise ValueError("t must be > 0")
        if self.s is not None and self.s <= self.d:
            raise ValueError("s must exceed d")

    @property
    def effective_s(self) -> float:
        return self.s if self.s is not None else 2.0 * self.d


@dataclass(frozen=True)
class ImpossibilityWitness:
    """Contradiction data for an inadmissible dilatation K < p/q.

    At t = 1/q the target shell's spectrum sits at its ambient plateau
    (theta_t is its transition), while theta(t/K) stays strictly below the
    source shell's transition p/(p+1), so its spectrum there is < d; the
    distortion inequality cannot hold.
    """

    theta_t: float          # q / (1 + q): transition of the q-shell
    theta_t_over_K: float   # q K / (q K + 1)
    transition_p: float     # p / (p + 1)

    @property
    def consistent(self) -> bool:
        return self.theta_t_over_K < self.transition_p


@dataclass(frozen=True)
class Classification:
    admissible: bool
    K: float
    min_K: float
    stretch_exponent: float | None = None          # q/p - 1 when admissible
    witness: ImpossibilityWitness | None = None    # when impossible

    @property
    def verdict(self) -> str:
        return "admissible" if self.admissible else "impossible"


def min_dilatation(pair: ShellPair) -> float:
    """Smallest dilatation of any quasiconformal map sending S_p onto S_q."""
    return pair.p / pair.q


def classify(pair: ShellPair, K) -> Classification:
    """Decide whether a K-quasiconformal map between the shells can exist.

    Exact boolean check K >= p/q; works with Fraction inputs for exact
    rational arithmetic.  Admissible verdicts carry the radial stretch
    exponent; impossible ones carry the proof's contradiction triple.
    """
    if K < 1:
        raise ValueError("dilatation K must be >= 1")
    p, q = pair.p, pair.q
    min_K = p / q
    if K >= min_K:
        return Classification(admissible=True, K=K, min_K=min_K,
                              stretch_exponent=q / p - 1)
    t = 1 / q
    witness = ImpossibilityWitness(
        theta_t=1 / (1 + t),
        theta_t_over_K=K / (K + t),
        transition_p=p / (p + 1),
    )
    return Classification(admissible=False, K=K, min_K=min_K, witness=witness)


@dataclass(frozen=True)
class DistortionReport:
    """Satisfaction of both sides of the distortion inequality, with margins.

    Margins are (rhs - lhs); non-negative means satisfied.  This is a
    diagnostic: the admissible exponent s is only known to exist, so a
    negative margin at the default s refutes nothing.
    """

    left_ok: bool
    right_ok: bool
    left_margin: float
    right_margin: float
    s: float
    thetas: tuple  # (theta(t/K), theta(t), theta(Kt))


def _as_fn(v) -> Callable[[float], float]:
    return v if callable(v) else (lambda _theta: float(v))


def distortion_bounds(params: DistortionParams, dimE, dimFE) -> DistortionReport:
    """Evaluate the two-sided regularized-spectrum distortion inequality.

    ``dimE`` and ``dimFE`` are regularized spectrum values of the source and
    image set: either constants or callables theta -> value in (0, d].
    The left side uses dimE at theta(t/K), the middle dimFE at theta(t),
    the right side dimE at theta(K t), with theta(t) = 1/(t+1).
    """
    d, K, t = params.d, params.K, params.t
    s = params.effective_s
    fE, fFE = _as_fn(dimE), _as_fn(dimFE)
    th_lo = 1.0 / (t / K + 1.0)   # theta(t/K)
    th_mid = 1.0 / (t + 1.0)      # theta(t)
    th_hi = 1.0 / (K * t + 1.0)   # theta(Kt)
    for th, val in ((th_lo, fE(th_lo)), (th_mid, fFE(th_mid)), (th_hi, fE(th_hi))):
        if not (0 < val <= d + 1e-12):
            raise ValueError(f"spectrum value {val:g} at theta={th:g} outside (0, d]")
    factor = 1.0 - d / s
    lhs = factor * (1.0 / fE(th_lo) - 1.0 / d)
    mid = 1.0 / fFE(th_mid) - 1.0 / d
    rhs = (1.0 / factor) * (1.0 / fE(th_hi) - 1.0 / d)
    return DistortionReport(
        left_ok=lhs <= mid + 1e-12,
        right_ok=mid <= rhs + 1e-12,
        left_margin=mid - lhs,
        right_margin=rhs - mid,
        s=s,
        thetas=(th_lo, th_mid, th_hi),
    )


def map_shell_sample(S: SampleSet, pair: ShellPair) -> SampleSet:
    """Push a p-shell sample through the radial stretch onto the q-shell.

    The stretch is locally bi-Lipschitz away from 0; the output density is
    delta' = c * delta with c the Lipschitz constant over the sampled
    annulus (reported through the returned delta).
    """
    p, q = pair.p, pair.q
    mapped = radial_stretch(S.points, p, q)
    norms = np.sqrt((S.points**2).sum(axis=1))
    pos = norms[norms > 0]
    alpha = q / p
    r_lo, r_hi = float(pos.min()), float(pos.max())
    lip = max(1.0, alpha) * max(r_lo ** (alpha - 1.0), r_hi ** (alpha - 1.0))
    delta_out = max(1.0, lip) * S.delta
    return SampleSet(points=_canonicalize(mapped), delta=delta_out,
                     ambient_dim=S.ambient_dim, family=S.family)


@dataclass(frozen=True)
class EquivalenceReport:
    """Pointwise comparison of shell vs concentric-collection spectra."""

    thetas: tuple
    shell_values: tuple
    collection_values: tuple
    tol: float

    @property
    def max_abs_diff(self) -> float:
        return float(np.max(np.abs(
            np.asarray(self.shell_values) - np.asarray(self.collection_values))))

    @property
    def passed(self) -> bool:
        return self.max_abs_diff <= self.tol


def spectrum_equivalence_check(shell: SampleSet, collection: SampleSet,
                               thetas, r_min: float, r_max: float,
                               tol: float = 0.4, **estimate_kwargs,
                               ) -> EquivalenceReport:
    """Estimate both spectra and check pointwise agreement.

    The shell and the round concentric collection with the same exponent
    are bi-Lipschitz-equivalent piecewise, so their spectra coincide; the
    default tolerance doubles the single-estimator tolerance since two
    independent estimates are compared.
    """
    cs = estimate_spectrum_curve(shell, thetas, r_min, r_max, **estimate_kwargs)
    cc = estimate_spectrum_curve(collection, thetas, r_min, r_max,
                                 **estimate_kwargs)
    return EquivalenceReport(thetas=cs.thetas, shell_values=cs.values,
                             collection_values=cc.values, tol=tol)


def closed_form_shell_spectrum(p: float, thetas) -> SpectrumCurve:
    """Spectrum of the 3-D shell: equals the d=3 concentric-collection formula."""
    from .dimension import closed_form_spectrum_curve

    return closed_form_spectrum_curve(p, 3, thetas)


def shell_transition(p: float) -> float:
    return phase_transition_theta(p)

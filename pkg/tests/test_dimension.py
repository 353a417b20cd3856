import math

import numpy as np
import pytest

import fracdim as fd
from fracdim.dimension import geometric_scales
from fracdim.errors import DensityContractError, EmptyIntersectionError

LOG4_LOG3 = math.log(4.0) / math.log(3.0)


def _filled_square(spacing=1e-3):
    ax = np.arange(0.0, 1.0 + spacing / 2, spacing)
    gx, gy = np.meshgrid(ax, ax)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    return fd.SampleSet(points=pts, delta=spacing, ambient_dim=2)


def _segment(spacing=1e-4):
    x = np.arange(0.0, 1.0 + spacing / 2, spacing)
    pts = np.column_stack([x, np.zeros_like(x)])
    return fd.SampleSet(points=pts, delta=spacing, ambient_dim=2)


class TestScalesAndFits:
    def test_geometric_scales_descending(self):
        s = geometric_scales(0.01, 1.0, 5)
        assert s[0] == pytest.approx(1.0) and s[-1] == pytest.approx(0.01)
        assert np.all(np.diff(s) < 0)

    def test_geometric_scales_validation(self):
        with pytest.raises(ValueError):
            geometric_scales(1.0, 0.01, 5)
        with pytest.raises(ValueError):
            geometric_scales(0.01, 1.0, 1)

    def test_box_dim_of_filled_square_is_two(self):
        S = _filled_square()
        fit = fd.estimate_box_dimension(S, 0.01, 0.1, n_scales=10)
        # the occupied-cell count of the full square is exactly
        # (floor(1/r) + 1)^2, so the expected slope is known in closed form
        scales = np.asarray(fit.scales_used)
        expect = (np.floor(1.0 / scales) + 1.0) ** 2
        np.testing.assert_array_equal(fit.counts_used, expect)
        slope = np.polyfit(np.log(1.0 / scales), np.log(expect), 1)[0]
        assert fit.slope == pytest.approx(slope, abs=1e-9)
        assert fit.slope == pytest.approx(2.0, abs=0.15)
        assert fit.r_squared > 0.999

    def test_box_dim_of_segment_is_one(self):
        S = _segment()
        fit = fd.estimate_box_dimension(S, 0.002, 0.5, n_scales=10)
        assert fit.slope == pytest.approx(1.0, abs=0.05)

    def test_box_dim_of_near_coincident_points_degenerate(self):
        S = fd.SampleSet(points=np.array([[0.0, 0.0], [1e-5, 0.0]]),
                         delta=1e-6, ambient_dim=2)
        # every scale in the window sees the same two occupied cells
        fit = fd.estimate_box_dimension(S, 2e-6, 1e-5, n_scales=4,
                                        density_factor=1.0)
        assert fit.degenerate
        assert fit.slope == 0.0

    def test_r_max_above_diameter_rejected(self):
        S = _segment(1e-3)
        with pytest.raises(ValueError):
            fd.estimate_box_dimension(S, 0.01, 10.0)

    def test_density_contract_via_r_min(self):
        S = _segment(1e-3)
        with pytest.raises(DensityContractError):
            fd.estimate_box_dimension(S, 1e-3, 0.5)


class TestSpectrumEstimator:
    def test_filled_square_spectrum_is_two(self):
        S = _filled_square()
        fit = fd.estimate_assouad_spectrum_point(S, 0.5, 0.01, 0.09,
                                                 n_scales=6, n_centers=4)
        # perimeter cells of the ball B(x, r^theta) contribute O(R/r) on top
        # of the (R/r)^2 bulk, which depresses the finite-scale slope a bit
        assert fit.slope == pytest.approx(2.0, abs=0.25)

    def test_segment_spectrum_is_one(self):
        S = _segment()
        curve = fd.estimate_spectrum_curve(S, [0.3, 0.5], 0.001, 0.04,
                                           n_scales=6, n_centers=4)
        for v in curve.values:
            assert v == pytest.approx(1.0, abs=0.1)

    def test_reproducible_under_seed(self):
        S = _filled_square(2e-3)
        kw = dict(n_scales=5, n_centers=8, seed=123)
        a = fd.estimate_spectrum_curve(S, [0.4], 0.02, 0.09, **kw)
        b = fd.estimate_spectrum_curve(S, [0.4], 0.02, 0.09, **kw)
        assert a.values == b.values

    def test_theta_range_validated(self):
        S = _filled_square(2e-3)
        with pytest.raises(ValueError):
            fd.estimate_spectrum_curve(S, [0.0, 0.5], 0.02, 0.09)

    def test_r_max_power_theta_must_fit_in_sample(self):
        S = _filled_square(2e-3)
        # 50^0.1 = 1.48 exceeds the sqrt(2) diameter of the unit square
        with pytest.raises(ValueError):
            fd.estimate_spectrum_curve(S, [0.1], 0.02, 50.0)

    def test_empty_everywhere_raises(self):
        pts = np.array([[10.0, 10.0], [10.1, 10.0]])
        S = fd.SampleSet(points=pts, delta=1e-4, ambient_dim=2)
        # only center is the origin (n_centers=0) and the ball never reaches
        # the far-away points at these scales
        with pytest.raises((EmptyIntersectionError, ValueError)):
            fd.estimate_spectrum_curve(S, [0.5], 0.001, 0.01, n_centers=0)


class TestClosedForms:
    def test_box_dim_formula_reference_points(self):
        assert fd.formula_box_dim(0.5, 2) == pytest.approx(4.0 / 3.0)
        assert fd.formula_box_dim(2.0, 2) == pytest.approx(1.0)
        assert fd.formula_box_dim(1.0, 2) == pytest.approx(1.0)
        assert fd.formula_box_dim(1.0, 3) == pytest.approx(2.0)
        assert fd.formula_box_dim(0.25, 3) == pytest.approx(2.4)

    def test_spectrum_small_p_branch(self):
        # p(d-1) <= 1: d / ((1+p)(1-theta)) capped at d
        assert fd.formula_assouad_spectrum(1.0, 2, 0.25) == pytest.approx(4 / 3)
        assert fd.formula_assouad_spectrum(1.0, 2, 0.5) == pytest.approx(2.0)
        assert fd.formula_assouad_spectrum(1.0, 2, 0.75) == pytest.approx(2.0)
        assert fd.formula_assouad_spectrum(0.5, 2, 0.1) == \
            pytest.approx(2.0 / (1.5 * 0.9))

    def test_spectrum_large_p_branch(self):
        # p(d-1) > 1: d - 1 + theta/(p(1-theta)) capped at d
        assert fd.formula_assouad_spectrum(2.0, 2, 0.5) == pytest.approx(1.5)
        assert fd.formula_assouad_spectrum(2.0, 2, 2 / 3) == pytest.approx(2.0)
        assert fd.formula_assouad_spectrum(1.0, 3, 0.3) == \
            pytest.approx(2.0 + 0.3 / 0.7)

    def test_branches_meet_at_transition(self):
        for p in [0.3, 0.5, 1.0, 1.7, 2.0, 3.0]:
            for d in [2, 3, 4]:
                th = fd.phase_transition_theta(p)
                assert fd.formula_assouad_spectrum(p, d, th) == pytest.approx(d)
                assert fd.formula_assouad_spectrum(p, d, th - 1e-9) < d
                assert fd.formula_assouad_spectrum(p, d, min(th + 1e-9, 1 - 1e-12)) \
                    == pytest.approx(d)

    def test_spectrum_dominates_box_dim(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            p = float(rng.uniform(0.05, 4.0))
            d = int(rng.integers(2, 5))
            th = float(rng.uniform(0.01, 0.99))
            assert fd.formula_assouad_spectrum(p, d, th) >= \
                fd.formula_box_dim(p, d) - 1e-12

    def test_lemma_bound_dominates_spectrum(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            p = float(rng.uniform(0.05, 4.0))
            d = int(rng.integers(2, 5))
            th = float(rng.uniform(0.01, 0.99))
            d0 = fd.formula_box_dim(p, d)
            assert fd.formula_assouad_spectrum(p, d, th) <= \
                fd.formula_spectrum_upper_bound(d0, d, th) + 1e-12

    def test_upper_bound_domain_checked(self):
        with pytest.raises(ValueError):
            fd.formula_spectrum_upper_bound(0.5, 2, 0.3)

    def test_closed_form_curve_matches_pointwise(self):
        th = [0.1, 0.3, 0.5, 0.7, 0.9]
        curve = fd.closed_form_spectrum_curve(1.5, 2, th)
        assert curve.kind == "closed-form"
        for t, v in zip(curve.thetas, curve.values):
            assert v == fd.formula_assouad_spectrum(1.5, 2, t)


class TestRegularizeAndTransition:
    def test_regularize_running_sup(self):
        c = fd.SpectrumCurve(thetas=(0.2, 0.4, 0.6, 0.8),
                             values=(1.5, 1.2, 1.8, 1.6), kind="estimated")
        r = fd.regularize(c)
        assert r.values == (1.5, 1.5, 1.8, 1.8)
        assert r.kind == "regularized"

    def test_regularize_idempotent(self):
        c = fd.SpectrumCurve(thetas=(0.2, 0.5), values=(1.0, 2.0),
                             kind="estimated")
        assert fd.regularize(fd.regularize(c)).values == (1.0, 2.0)

    def test_closed_form_curves_already_regularized(self):
        th = np.linspace(0.05, 0.95, 50)
        for p in [0.5, 1.0, 2.5]:
            c = fd.closed_form_spectrum_curve(p, 3, th)
            assert fd.regularize(c).values == c.values

    def test_transition_on_exact_curve(self):
        th = np.linspace(0.05, 0.95, 181)  # grid contains 0.5 exactly
        c = fd.closed_form_spectrum_curve(1.0, 2, th)
        got = fd.detect_phase_transition(c, 2, tol=1e-9)
        assert got == pytest.approx(0.5, abs=1e-6)

    def test_transition_p2_needs_grid_point(self):
        th = np.linspace(0.05, 0.95, 271)  # contains 2/3
        c = fd.closed_form_spectrum_curve(2.0, 2, th)
        got = fd.detect_phase_transition(c, 2, tol=1e-9)
        assert got == pytest.approx(2.0 / 3.0, abs=1e-6)

    def test_transition_interpolates_linearly(self):
        c = fd.SpectrumCurve(thetas=(0.4, 0.45, 0.5),
                             values=(1.90, 1.95, 2.0), kind="estimated")
        # level 2 - 0.02 = 1.98 crossed between 0.45 and 0.5
        assert fd.detect_phase_transition(c, 2, tol=0.02) == \
            pytest.approx(0.48, abs=1e-9)

    def test_transition_none_when_below_level(self):
        c = fd.SpectrumCurve(thetas=(0.2, 0.8), values=(1.0, 1.2),
                             kind="estimated")
        assert fd.detect_phase_transition(c, 2) is None


class TestImpossibilityWindow:
    def test_large_product_branch_endpoints(self):
        # d=2, d0=log4/log3, p=1: window (1 - d0/(2 - d0) ... ) computed
        # directly from the branch formulas
        w = fd.impossibility_window(1.0, 2, LOG4_LOG3)
        assert w.branch == "p*d0>1"
        lo = (2 - LOG4_LOG3) / ((2 - LOG4_LOG3) + 1)
        assert w.theta_lo == pytest.approx(lo)
        assert w.theta_hi == pytest.approx(0.5)
        assert w.theta_lo < w.theta_hi

    def test_small_product_branch_endpoints(self):
        w = fd.impossibility_window(0.5, 2, LOG4_LOG3)
        assert w.branch == "p*d0<=1"
        assert w.theta_hi == pytest.approx(1.0 / 3.0)
        lo = (2 * 1.5 - (LOG4_LOG3 + 1.0)) / (2 * 1.5)
        assert w.theta_lo == pytest.approx(lo)

    @pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
    def test_bound_exceeds_ambient_inside_window(self, p):
        w = fd.impossibility_window(p, 2, LOG4_LOG3)
        assert w.contains(w.midpoint)
        assert w.bound(w.midpoint) > 2.0
        # approaching the lower endpoint the bound tends to d
        assert w.bound(w.theta_lo) == pytest.approx(2.0, abs=1e-9)

    def test_requires_d0_strictly_above_d_minus_one(self):
        with pytest.raises(ValueError):
            fd.impossibility_window(1.0, 2, 1.0)
        with pytest.raises(ValueError):
            fd.impossibility_window(1.0, 2, 2.5)

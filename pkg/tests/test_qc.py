from fractions import Fraction

import numpy as np
import pytest

import fracdim as fd
from fracdim.qc import closed_form_shell_spectrum, shell_transition


class TestShellPair:
    def test_normalizes_order(self):
        pair = fd.ShellPair(p=0.5, q=2.0)
        assert pair.p == 2.0 and pair.q == 0.5

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            fd.ShellPair(p=0.0, q=1.0)


class TestClassification:
    def test_min_dilatation_is_ratio(self):
        assert fd.min_dilatation(fd.ShellPair(p=3.0, q=1.5)) == pytest.approx(2.0)

    def test_threshold_is_sharp_with_exact_arithmetic(self):
        pair = fd.ShellPair(p=Fraction(3), q=Fraction(2))
        at = fd.classify(pair, Fraction(3, 2))
        below = fd.classify(pair, Fraction(3, 2) - Fraction(1, 10**12))
        assert at.admissible
        assert not below.admissible

    def test_admissible_carries_stretch_exponent(self):
        res = fd.classify(fd.ShellPair(p=2.0, q=1.0), 5.0)
        assert res.admissible
        assert res.verdict == "admissible"
        assert res.stretch_exponent == pytest.approx(1.0 / 2.0 - 1.0)

    def test_impossible_carries_consistent_witness(self):
        res = fd.classify(fd.ShellPair(p=3.0, q=1.0), 2.0)
        assert not res.admissible
        w = res.witness
        # the witness places theta(t/K) strictly below the source transition
        assert w.theta_t == pytest.approx(1.0 / 2.0)          # q/(1+q), q=1
        assert w.theta_t_over_K == pytest.approx(2.0 / 3.0)   # qK/(qK+1)
        assert w.transition_p == pytest.approx(3.0 / 4.0)
        assert w.consistent

    def test_identical_shells_always_admissible(self):
        for K in [1.0, 1.5, 10.0]:
            assert fd.classify(fd.ShellPair(p=1.0, q=1.0), K).admissible

    def test_rejects_K_below_one(self):
        with pytest.raises(ValueError):
            fd.classify(fd.ShellPair(p=2.0, q=1.0), 0.5)

    def test_grid_iff_with_fractions(self):
        vals = [Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(2)]
        for p in vals:
            for q in vals:
                if p < q:
                    continue
                ratio = p / q
                for K in [Fraction(1), ratio, ratio + Fraction(1, 1000),
                          max(Fraction(1), ratio - Fraction(1, 1000)),
                          Fraction(10)]:
                    got = fd.classify(fd.ShellPair(p=p, q=q), K).admissible
                    assert got == (K >= ratio)


class TestDistortionBounds:
    def test_theta_ordering(self):
        params = fd.DistortionParams(d=3, K=2.0, t=1.0)
        rep = fd.distortion_bounds(params, dimE=2.5, dimFE=2.5)
        th_lo, th_mid, th_hi = rep.thetas
        # theta(t/K) > theta(t) > theta(Kt) since theta(t) = 1/(1+t)
        assert th_lo > th_mid > th_hi
        assert rep.s == 6.0

    def test_constant_spectra_satisfy_both_sides(self):
        params = fd.DistortionParams(d=3, K=1.5)
        rep = fd.distortion_bounds(params, dimE=2.0, dimFE=2.0)
        assert rep.left_ok and rep.right_ok
        assert rep.left_margin >= 0 and rep.right_margin >= 0

    def test_closed_form_shell_pair_satisfies_inequality(self):
        # source 2-shell, image 1-shell under the K = 2 radial stretch
        p, q, K = 2.0, 1.0, 2.0
        params = fd.DistortionParams(d=3, K=K, t=1.0 / q)
        rep = fd.distortion_bounds(
            params,
            dimE=lambda th: fd.formula_assouad_spectrum(p, 3, th),
            dimFE=lambda th: fd.formula_assouad_spectrum(q, 3, th),
        )
        assert rep.left_ok and rep.right_ok

    def test_out_of_range_spectrum_rejected(self):
        params = fd.DistortionParams(d=3, K=2.0)
        with pytest.raises(ValueError):
            fd.distortion_bounds(params, dimE=5.0, dimFE=2.0)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            fd.DistortionParams(d=3, K=0.5)
        with pytest.raises(ValueError):
            fd.DistortionParams(d=3, K=2.0, s=2.0)  # s must exceed d


class TestShellMapping:
    def test_mapped_shell_lands_on_target_shell(self):
        pair = fd.ShellPair(p=2.0, q=1.0)
        src = fd.generate_shell(fd.ShellSpec(p=2.0, u_max=5.0, delta=5e-3))
        mapped = fd.map_shell_sample(src, pair)
        direct = fd.generate_shell(
            fd.ShellSpec(p=1.0, u_max=5.0, delta=5e-3))
        dist = fd.hausdorff_distance(mapped, direct)
        assert dist <= mapped.delta + direct.delta

    def test_mapped_delta_accounts_for_stretch(self):
        pair = fd.ShellPair(p=2.0, q=1.0)
        src = fd.generate_shell(fd.ShellSpec(p=2.0, u_max=5.0, delta=5e-3))
        mapped = fd.map_shell_sample(src, pair)
        # alpha = 1/2 < 1 expands small norms: delta grows by r_lo^(alpha-1)
        assert mapped.delta > src.delta

    def test_round_trip_is_identity(self):
        pair = fd.ShellPair(p=2.0, q=1.0)
        src = fd.generate_shell(fd.ShellSpec(p=2.0, u_max=4.0, delta=1e-2))
        there = fd.map_shell_sample(src, pair)
        back = fd.radial_stretch(there.points, pair.q, pair.p)
        src_sorted = src.points
        back_sorted = back[np.lexsort(back.T[::-1])]
        np.testing.assert_allclose(back_sorted, src_sorted, rtol=1e-9,
                                   atol=1e-12)


class TestShellClosedForms:
    def test_shell_spectrum_is_d3_formula(self):
        th = [0.2, 0.5, 0.8]
        curve = closed_form_shell_spectrum(1.0, th)
        for t, v in zip(curve.thetas, curve.values):
            assert v == fd.formula_assouad_spectrum(1.0, 3, t)

    def test_shell_transition(self):
        assert shell_transition(1.0) == pytest.approx(0.5)
        assert shell_transition(2.0) == pytest.approx(2.0 / 3.0)

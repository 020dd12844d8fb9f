import math

import numpy as np
import pytest

from hardydirac.channels import (
    Channel,
    GridProfile,
    SpinorField,
    build_field,
    channel_weights,
    evaluate_spinor,
    exp_profile,
    field_norm_weighted,
    gauss_profile,
    lattice_sigma_grad_norm,
    lattice_weighted_norm,
    log_derivative,
    parse_field_term,
    parse_profile,
    radial_sigma_grad,
    sigma_grad_norm_weighted,
)
from hardydirac.numerics import RadialGrid, integrate_radial
from hardydirac.potentials import ShellMeasure, a_k, parse_pair


class TestChannel:
    def test_quantum_numbers(self):
        assert Channel(0).kappa == 1
        assert Channel(0).l == 0
        assert Channel(-2).kappa == -1
        assert Channel(-2).l == 1
        assert Channel(3).l == 3

    def test_spectrum_gap(self):
        with pytest.raises(ValueError):
            Channel(-1)


class TestRadialReduction:
    def test_pure_derivative_at_k0(self):
        red = radial_sigma_grad(exp_profile(0, 1.0), Channel(0))
        for r in (0.3, 1.0, 2.5):
            assert red(r) == pytest.approx(-math.exp(-r), rel=1e-14)

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_kernel_closed_form(self, k):
        # r^k on channel k: the power term of f' - k f/r cancels exactly,
        # leaving only the decay factor's contribution
        prof = exp_profile(k, 1.0)
        red = radial_sigma_grad(prof, Channel(k))
        for r in (0.5, 1.0, 4.0):
            assert red(r) == pytest.approx(-(r ** k) * math.exp(-r), rel=1e-13)

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_kernel_on_grid(self, k):
        grid = RadialGrid.log_uniform(2048, 1e-2, 10.0)
        prof = GridProfile(grid, grid.nodes ** float(k))
        red = radial_sigma_grad(prof, Channel(k))
        h = grid.t[1] - grid.t[0]
        w = grid.nodes ** 3 * h
        num = math.sqrt(float(np.sum(np.abs(red.values) ** 2 * w)))
        den = math.sqrt(float(np.sum(np.abs(prof.values) ** 2 * w)))
        assert num <= 1e-8 * den

    def test_gauss_zero_crossing(self):
        red = radial_sigma_grad(gauss_profile(0, 1.0), Channel(-2))
        assert abs(red(1.0)) < 1e-15

    def test_matches_finite_differences(self):
        prof = gauss_profile(1, 0.8, coef=0.7)
        red = radial_sigma_grad(prof, Channel(2))
        h = 1e-6
        for r in (0.4, 1.3, 2.2):
            fd = (prof(r + h) - prof(r - h)) / (2 * h) - 2 * prof(r) / r
            assert red(r) == pytest.approx(fd, rel=1e-8)

    def test_k_minus_one_rejected(self):
        with pytest.raises(ValueError):
            radial_sigma_grad(exp_profile(0, 1.0), -1)


class TestChannelWeights:
    def test_coulomb_constant_profiles(self, coulomb_pair):
        for k in (0, 1, 2):
            g, W = channel_weights(coulomb_pair, Channel(k))
            for r in (0.4, 1.0, 5.0):
                assert g(r) == pytest.approx(1.0 / (k + 1), abs=1e-10)
                assert W(r) == pytest.approx(2.0 / ((k + 1) * r), rel=1e-9)

    def test_coulomb_tail_channel(self, coulomb_pair):
        h, W = channel_weights(coulomb_pair, Channel(-2))
        for r in (0.4, 1.0, 5.0):
            assert h(r) == pytest.approx(1.0, abs=1e-10)
            assert W(r) == pytest.approx(-2.0 / r, rel=1e-9)

    def test_zero_pair(self):
        pair = parse_pair("zero", "zero")
        g, W = channel_weights(pair, Channel(1))
        assert g(1.0) == 0.0
        assert W(1.0) == 0.0

    @pytest.mark.parametrize("k", [0, 2, -2, -3])
    def test_sup_matches_channel_constant(self, k):
        pair = parse_pair("shell:0.5@1 + coulomb:0.3", "coulomb:0.7")
        g, _ = channel_weights(pair, Channel(k))
        ak = a_k(pair, k)
        rs = np.exp(np.linspace(math.log(1e-4), math.log(1e4), 400))
        samples = max(g(float(r)) for r in rs)
        samples = max(samples, g(1.0))  # shell radius
        assert samples <= ak * (1.0 + 1e-8)
        assert samples == pytest.approx(ak, rel=1e-6)


class TestNorms:
    def test_unit_weight(self):
        f = SpinorField.single(0, exp_profile(0, 1.0))
        assert field_norm_weighted(f) == pytest.approx(0.25, rel=1e-12)

    def test_shell_only(self):
        f = SpinorField.single(0, exp_profile(0, 1.0))
        val = field_norm_weighted(f, shells=(ShellMeasure(R=1.0, a=1.0),))
        assert val == pytest.approx(math.exp(-2.0), rel=1e-12)

    def test_channel_additivity_exact(self):
        terms = ((Channel(0), exp_profile(0, 1.0)),
                 (Channel(1), exp_profile(1, 0.7)),
                 (Channel(-2), gauss_profile(1, 1.1)))
        field = SpinorField(terms)
        w = lambda r: math.exp(-0.3 * r)
        total = field_norm_weighted(field, weight=w)
        by_k = sorted(terms, key=lambda t: t[0].k)
        parts = sum(field_norm_weighted(SpinorField((t,)), weight=w) for t in by_k)
        assert total == parts

    def test_sigma_grad_k0(self):
        f = SpinorField.single(0, exp_profile(0, 1.0))
        assert sigma_grad_norm_weighted(f) == pytest.approx(0.25, rel=1e-12)

    def test_sigma_grad_k1(self):
        # f = r e^{-r}: f' - f/r = -r e^{-r}, norm Gamma(5)/2^5 = 3/4
        f = SpinorField.single(1, exp_profile(1, 1.0))
        assert sigma_grad_norm_weighted(f) == pytest.approx(0.75, rel=1e-12)

    def test_weighted_vs_quadrature_oracle(self):
        f = SpinorField.single(0, exp_profile(0, 1.0))
        w = lambda r: 1.0 / (1.0 / r + 1.0)
        got = sigma_grad_norm_weighted(f, weight=w)
        oracle = integrate_radial(lambda r: math.exp(-2 * r) * r ** 3 / (r + 1)).value
        assert got == pytest.approx(oracle, rel=1e-10)


SQRT4PI = math.sqrt(4 * math.pi)


class TestEvaluateSpinor:
    def test_k0_constant(self):
        f = SpinorField.single(0, exp_profile(0, 1e-12))
        out = evaluate_spinor(f, np.array([0.3, -0.1, 0.7]))
        assert out[0] == pytest.approx(1.0 / SQRT4PI, rel=1e-9)
        assert out[1] == 0.0

    def test_km2_on_z_axis(self):
        f = SpinorField.single(-2, exp_profile(0, 1e-12))
        out = evaluate_spinor(f, np.array([0.0, 0.0, 2.0]))
        assert out[0] == pytest.approx(1.0 / SQRT4PI, rel=1e-9)
        assert out[1] == 0.0

    def test_unsupported_channel(self):
        f = SpinorField.single(1, exp_profile(1, 1.0))
        with pytest.raises(ValueError):
            evaluate_spinor(f, np.array([1.0, 0.0, 0.0]))

    def test_origin_rejected(self):
        f = SpinorField.single(0, exp_profile(0, 1.0))
        with pytest.raises(ValueError):
            evaluate_spinor(f, np.zeros(3))


class TestLatticeOracle:
    def test_sigma_grad_matches_radial(self):
        field = SpinorField.single(0, gauss_profile(0, 1.0))
        radial = sigma_grad_norm_weighted(field)
        coarse = lattice_sigma_grad_norm(field, spacing=0.1, extent=3.2)
        fine = lattice_sigma_grad_norm(field, spacing=0.05, extent=3.2)
        assert abs(coarse - radial) / radial < 0.04
        assert abs(fine - radial) / radial < 0.01
        assert abs(fine - radial) < 0.5 * abs(coarse - radial)

    def test_partner_channel(self):
        field = SpinorField.single(-2, gauss_profile(1, 1.0))
        radial = sigma_grad_norm_weighted(field)
        lattice = lattice_sigma_grad_norm(field, spacing=0.05, extent=3.2)
        assert abs(lattice - radial) / radial < 0.01

    def test_weighted_mass_two_channels(self):
        field = SpinorField(((Channel(0), gauss_profile(0, 1.0)),
                             (Channel(-2), gauss_profile(1, 0.9))))
        w = lambda r: np.exp(-r)
        radial = field_norm_weighted(field, weight=lambda r: math.exp(-r))
        lattice = lattice_weighted_norm(field, weight=w, spacing=0.05, extent=3.4)
        assert abs(lattice - radial) / radial < 0.01


class TestLogDerivative:
    def test_fourth_order(self):
        errs = []
        for n in (101, 201):
            t = np.linspace(-1.0, 1.0, n)
            v = np.exp(2.0 * t)
            dv = log_derivative(v, t[1] - t[0])
            errs.append(float(np.max(np.abs(dv - 2.0 * v))))
        assert errs[1] < errs[0] / 12.0   # at least fourth order


class TestProfileGrammar:
    def test_exp(self):
        prof = parse_profile("exp:0,1")
        assert prof(1.0) == pytest.approx(math.exp(-1.0))

    def test_gauss(self):
        prof = parse_profile("gauss:2,0.5")
        assert prof(2.0) == pytest.approx(4.0 * math.exp(-2.0))

    def test_field_term(self):
        k, prof = parse_field_term("k=-2:exp:1,1")
        assert k == -2
        assert prof(1.0) == pytest.approx(math.exp(-1.0))

    def test_build_field(self):
        field = build_field(["k=0:exp:0,1", "k=-2:gauss:1,1"])
        assert {ch.k for ch in field.channels} == {0, -2}

    def test_bad_specs(self):
        with pytest.raises(ValueError):
            parse_profile("spline:1,2")
        with pytest.raises(ValueError):
            parse_field_term("0:exp:0,1")

    def test_duplicate_channel_rejected(self):
        with pytest.raises(ValueError):
            build_field(["k=0:exp:0,1", "k=0:exp:1,1"])

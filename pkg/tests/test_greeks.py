"""Sensitivities: multiplier factors, pipeline values, finite differences."""

import numpy as np
import pytest

from conftest import GROUPING_PARAMS, assert_close
from mellin_pricer import greeks as gk
from mellin_pricer.fft_pricer import AMERICAN_PUT, EUROPEAN_PUT
from mellin_pricer.greeks import GreekKind, greek, greek_fd, greek_multiplier
from mellin_pricer.mellin_core import BasketSpec
from mellin_pricer.oracles import black_scholes


class TestGreekKind:
    def test_validation(self):
        with pytest.raises(ValueError):
            GreekKind("delta2", i=1, j=1)
        with pytest.raises(ValueError):
            GreekKind("frob")
        with pytest.raises(ValueError):
            gk.delta1(2).validate(1)


class TestMultiplier:
    def setup_method(self):
        self.spec = BasketSpec.single(100.0, 1.0, 0.05, 0.02, 0.2)

    def test_delta1_factor(self):
        w = np.array([[2.0 + 0j]])
        f_e, f_p = greek_multiplier(gk.delta1(), w, [100.0], 1.0, 0.0,
                                    self.spec)
        assert_close(complex(f_e[0]), -0.02, atol=1e-15)
        assert_close(complex(f_p[0]), +0.02, atol=1e-15)

    def test_paper_gamma_root_at_unit(self):
        # the published display factor w(1-w) vanishes at w = 1
        w = np.array([[1.0 + 0j]])
        f_e, f_p = greek_multiplier(gk.gamma(), w, [100.0], 1.0, 0.0,
                                    self.spec, mode="paper")
        assert complex(f_e[0]) == 0
        assert complex(f_p[0]) == 0

    def test_kernel_gamma_differs_from_paper(self):
        w = np.array([[1.5 + 2j]])
        k_e, _ = greek_multiplier(gk.gamma(), w, [100.0], 1.0, 0.0, self.spec)
        p_e, _ = greek_multiplier(gk.gamma(), w, [100.0], 1.0, 0.0,
                                  self.spec, mode="paper")
        assert abs(complex(k_e[0]) - complex(p_e[0])) > 1e-6

    def test_nu_single_asset_collapse(self):
        # n = 1: no cross terms; kernel gives sigma w (w+1), the published
        # display gives sigma w (w-1)
        w = np.array([[3.0 + 0j]])
        k_e, _ = greek_multiplier(gk.nu(), w, [100.0], 1.0, 0.0, self.spec)
        assert_close(complex(k_e[0]), 1.0 * 0.2 * 3.0 * 4.0, rtol=1e-13)
        p_e, _ = greek_multiplier(gk.nu(), w, [100.0], 1.0, 0.0, self.spec,
                                  mode="paper")
        assert_close(complex(p_e[0]), 1.0 * 0.2 * 3.0 * 2.0, rtol=1e-13)

    def test_delta1_same_both_modes(self):
        w = np.array([[1.1 + 5j]])
        k = greek_multiplier(gk.delta1(), w, [90.0], 0.5, 0.1, self.spec)
        p = greek_multiplier(gk.delta1(), w, [90.0], 0.5, 0.1, self.spec,
                             mode="paper")
        assert complex(k[0][0]) == complex(p[0][0])
        assert complex(k[1][0]) == complex(p[1][0])


class TestEuropeanKernelVsClosedForm:
    """Kernel-mode Greeks against the dividend-adjusted closed form."""

    def setup_method(self):
        self.spec = BasketSpec.single(100.0, 1.0, 0.05, 0.02, 0.2)
        self.bs = black_scholes(100, 100, 0.05, 0.02, 0.2, 1.0, "put")

    @pytest.mark.parametrize("kind,attr", [
        (gk.delta1(), "delta"), (gk.gamma(), "gamma"), (gk.theta(), "theta"),
        (gk.rho(), "rho"), (gk.nu(), "vega"), (gk.xi(), "dividend_rho")])
    def test_matches_black_scholes(self, kind, attr):
        got = greek(kind, [100.0], 1.0, self.spec, EUROPEAN_PUT)
        want = getattr(self.bs, attr)
        assert abs(got - want) <= 1e-6 * max(1.0, abs(want))


class TestFiniteDifferences:
    def setup_method(self):
        self.spec = BasketSpec.single(100.0, 1.0, 0.05, 0.02, 0.2)

    def test_fd_matches_analytic_delta_atm(self):
        a = greek(gk.delta1(), [100.0], 1.0, self.spec, EUROPEAN_PUT)
        f = greek_fd(gk.delta1(), [100.0], 1.0, self.spec, EUROPEAN_PUT,
                     h_rel=1e-4)
        assert abs(a - f) <= 1e-4 * abs(a)

    def test_fd_of_constant_price_is_zero(self):
        # injected price function ignores every parameter
        const = lambda s, t, sp: 7.25
        for kind in (gk.delta1(), gk.gamma(), gk.theta(), gk.rho(), gk.nu(),
                     gk.xi()):
            assert greek_fd(kind, [100.0], 1.0, self.spec, EUROPEAN_PUT,
                            h_rel=1e-3, price_fn=const) == 0.0

    def test_deep_itm_payoff_slope(self):
        # near expiry and deep in the money the put price is K - S
        spec = BasketSpec.single(100.0, 0.01, 0.05, 0.0, 0.2)
        f = greek_fd(gk.delta1(), [50.0], 0.01, spec, EUROPEAN_PUT,
                     h_rel=1e-4)
        assert abs(f - (-1.0 * np.exp(-0.0))) < 1e-3

    def test_h_rel_validation(self):
        with pytest.raises(ValueError):
            greek_fd(gk.delta1(), [100.0], 1.0, self.spec, EUROPEAN_PUT,
                     h_rel=0.5)


class TestEuropeanProperties:
    def setup_method(self):
        self.spec = BasketSpec.single(100.0, 1.0, 0.05, 0.02, 0.2)

    def test_deep_itm_delta_limit(self):
        # put delta tends to -exp(-q tau) deep in the money
        got = greek(gk.delta1(), [20.0], 1.0, self.spec, EUROPEAN_PUT)
        assert abs(got - (-np.exp(-0.02))) < 1e-4

    def test_gamma_nonnegative_central(self):
        for spot in (60.0, 80.0, 100.0, 130.0, 170.0):
            got = greek(gk.gamma(), [spot], 1.0, self.spec, EUROPEAN_PUT)
            assert got >= -1e-10

    def test_paper_mode_gamma_fails_fd(self):
        # the published display factor disagrees with the finite
        # difference; the kernel derivation is the shipped default
        fd = greek_fd(gk.gamma(), [100.0], 1.0, self.spec, EUROPEAN_PUT,
                      h_rel=1e-4)
        paper = greek(gk.gamma(), [100.0], 1.0, self.spec, EUROPEAN_PUT,
                      mode="paper")
        kernel = greek(gk.gamma(), [100.0], 1.0, self.spec, EUROPEAN_PUT)
        assert abs(kernel - fd) <= 1e-4 * abs(fd)
        assert abs(paper - fd) > 0.1 * abs(fd)

    def test_paper_mode_mismatch_record(self):
        # fixture of which published factors disagree with the kernel
        # derivation at the reference point (informational regression pin)
        mismatched = []
        for name, kind in [("delta1", gk.delta1()), ("gamma", gk.gamma()),
                           ("theta", gk.theta()), ("rho", gk.rho()),
                           ("nu", gk.nu()), ("xi", gk.xi())]:
            k = greek(kind, [100.0], 1.0, self.spec, EUROPEAN_PUT)
            p = greek(kind, [100.0], 1.0, self.spec, EUROPEAN_PUT,
                      mode="paper")
            if abs(k - p) > 1e-6 * max(1.0, abs(k)):
                mismatched.append(name)
        assert mismatched == ["gamma", "rho", "nu", "xi"]


class TestAmerican:
    def setup_method(self):
        r, q, sig = GROUPING_PARAMS[1]
        # swapped market; boundary at tau = 0.5 sits near 84
        self.spec = BasketSpec.single(100.0, 0.5, q, r, sig)

    @pytest.mark.parametrize("spot", [95.0, 110.0])
    def test_delta_vs_fd_away_from_boundary(self, spot):
        a = greek(gk.delta1(), [spot], 0.5, self.spec, AMERICAN_PUT)
        f = greek_fd(gk.delta1(), [spot], 0.5, self.spec, AMERICAN_PUT,
                     h_rel=1e-4)
        assert abs(a - f) <= 1e-3 * abs(f)

    def test_gamma_vs_fd_away_from_boundary(self):
        a = greek(gk.gamma(), [100.0], 0.5, self.spec, AMERICAN_PUT)
        f = greek_fd(gk.gamma(), [100.0], 0.5, self.spec, AMERICAN_PUT,
                     h_rel=1e-4)
        assert abs(a - f) <= 1e-3 * abs(f)

    def test_multi_asset_american_rejected(self, basket2_spec):
        with pytest.raises(NotImplementedError):
            greek(gk.delta1(), [50.0, 50.0], 0.5, basket2_spec, AMERICAN_PUT)


class TestBasketCrossDelta:
    def test_uncorrelated_cross_delta_vs_fd(self):
        spec = BasketSpec(n=2, strike=100.0, maturity=0.5, rate=0.05,
                          dividends=[0.02, 0.03], vols=[0.2, 0.3],
                          corr=np.eye(2))
        a = greek(gk.delta2(1, 2), [50.0, 50.0], 0.5, spec, EUROPEAN_PUT)
        f = greek_fd(gk.delta2(1, 2), [50.0, 50.0], 0.5, spec, EUROPEAN_PUT,
                     h_rel=1e-3)
        assert abs(a - f) <= 1e-3 * abs(f)

    def test_correlated_cross_delta_vs_fd(self, basket2_spec):
        a = greek(gk.delta2(1, 2), [50.0, 50.0], 0.5, basket2_spec,
                  EUROPEAN_PUT)
        f = greek_fd(gk.delta2(1, 2), [50.0, 50.0], 0.5, basket2_spec,
                     EUROPEAN_PUT, h_rel=1e-3)
        assert abs(a - f) <= 1e-3 * abs(f)

import numpy as np
import pytest

from circdeconv.fourier import NoiseModel, SmoothnessClass
from circdeconv.rates import (
    RegimeSpec,
    base_term,
    fit_log_rate,
    fit_rate,
    numeric_rate_scan,
    theoretical_estimation_rate,
    theoretical_testing_radius,
)

DYADIC = [2 ** e for e in range(8, 23)]


class TestRegimeSpec:
    def test_parameter_constraints(self):
        with pytest.raises(ValueError):
            RegimeSpec("ordinary", 0.5, "mild", 1.0)
        with pytest.raises(ValueError):
            RegimeSpec("super", -1.0, "mild", 1.0)
        with pytest.raises(ValueError):
            RegimeSpec("ordinary", 1.0, "mild", 0.5)
        with pytest.raises(ValueError):
            RegimeSpec("ordinary", 1.0, "severe", 0.0)
        RegimeSpec("super", 0.1, "severe", 0.1)


class TestTheoreticalTables:
    def test_estimation_ordinary_mild(self):
        rep = theoretical_estimation_rate(RegimeSpec("ordinary", 1.0, "mild", 1.0))
        assert rep.rate.n_exp == pytest.approx(-8.0 / 9.0)
        assert not rep.elbow

    def test_estimation_elbow(self):
        rep = theoretical_estimation_rate(RegimeSpec("ordinary", 2.0, "mild", 1.0))
        assert rep.elbow
        assert rep.rate.n_exp == pytest.approx(-1.0)

    def test_estimation_ordinary_severe(self):
        rep = theoretical_estimation_rate(RegimeSpec("ordinary", 1.0, "severe", 2.0))
        assert rep.rate.n_exp == 0.0
        assert rep.rate.log_exp == pytest.approx(-2.0)

    def test_estimation_super_mild_parametric(self):
        rep = theoretical_estimation_rate(RegimeSpec("super", 1.0, "mild", 1.0))
        assert rep.rate.n_exp == pytest.approx(-1.0)

    def test_testing_ordinary_mild(self):
        rep = theoretical_testing_radius(RegimeSpec("ordinary", 1.0, "mild", 1.0))
        assert rep.rate.n_exp == pytest.approx(-4.0 / 9.0)
        assert not rep.elbow

    def test_testing_never_has_elbow(self):
        for reg in (
            RegimeSpec("ordinary", 2.0, "mild", 1.0),
            RegimeSpec("ordinary", 1.0, "severe", 1.0),
            RegimeSpec("super", 1.0, "mild", 1.0),
        ):
            assert not theoretical_testing_radius(reg).elbow

    def test_testing_ordinary_severe(self):
        rep = theoretical_testing_radius(RegimeSpec("ordinary", 1.0, "severe", 1.0))
        assert rep.rate.log_exp == pytest.approx(-2.0)

    def test_testing_super_mild_log_factor(self):
        rep = theoretical_testing_radius(RegimeSpec("super", 1.0, "mild", 1.0))
        assert rep.rate.n_exp == pytest.approx(-1.0)
        assert rep.rate.log_exp == pytest.approx(2.5)

    def test_untabulated_regime_rejected(self):
        reg = RegimeSpec("super", 1.0, "severe", 1.0)
        with pytest.raises(ValueError):
            theoretical_estimation_rate(reg)
        with pytest.raises(ValueError):
            theoretical_testing_radius(reg)


class TestBaseTerm:
    def test_smooth_class_parametric(self):
        # s >= p: max attained at m = 1, B ~ a_1^2 / n
        cls = SmoothnessClass.ordinary(2.0)
        eps = NoiseModel.mild(1.0)
        b, m_star = base_term(cls, eps, 10 ** 4)
        assert m_star == 1
        assert b == pytest.approx(1.0 / 10 ** 4)

    def test_super_mild_parametric(self):
        cls = SmoothnessClass.supersmooth(1.0)
        eps = NoiseModel.mild(1.0)
        b, m_star = base_term(cls, eps, 10 ** 4)
        assert m_star <= 3
        slope, _, _ = fit_rate(DYADIC, [base_term(cls, eps, n)[0] for n in DYADIC])
        assert slope == pytest.approx(-1.0, abs=0.02)

    def test_matches_brute_force(self):
        cls = SmoothnessClass.ordinary(2.0)
        eps = NoiseModel.mild(1.0)
        n = 10 ** 4
        m = np.arange(1, 10 ** 6 + 1, dtype=float)
        brute = np.max(np.minimum(m ** -8.0, m ** -4.0 * m ** 2.0 / n))
        assert base_term(cls, eps, n, m_max=10 ** 6)[0] == pytest.approx(brute)

    def test_warns_when_window_too_small(self):
        cls = SmoothnessClass.ordinary(0.6)
        eps = NoiseModel.mild(0.6)
        with pytest.warns(UserWarning):
            base_term(cls, eps, 10 ** 12, m_max=10)


class TestNumericScan:
    def test_radius_slope_ordinary_mild(self):
        rows = numeric_rate_scan(SmoothnessClass.ordinary(1.0), NoiseModel.mild(1.0), DYADIC)
        slope, _, _ = fit_rate([r.n for r in rows], [r.rho_star_sq for r in rows])
        assert slope == pytest.approx(-4.0 / 9.0, abs=0.05)

    def test_estimation_slope_ordinary_mild(self):
        rows = numeric_rate_scan(SmoothnessClass.ordinary(1.0), NoiseModel.mild(1.0), DYADIC)
        slope, _, _ = fit_rate([r.n for r in rows], [r.estimation_bound for r in rows])
        assert slope == pytest.approx(-8.0 / 9.0, abs=0.05)

    def test_elbow_base_dominates(self):
        rows = numeric_rate_scan(SmoothnessClass.ordinary(2.0), NoiseModel.mild(1.0), DYADIC)
        assert all(r.base >= r.r_star4 for r in rows)
        slope, _, _ = fit_rate([r.n for r in rows], [r.estimation_bound for r in rows])
        assert slope == pytest.approx(-1.0, abs=0.05)

    def test_no_elbow_without_condition(self):
        rows = numeric_rate_scan(SmoothnessClass.ordinary(1.0), NoiseModel.mild(1.0), DYADIC)
        # r*^4 dominates the base term once n is moderately large
        assert all(r.r_star4 >= r.base for r in rows[2:])

    def test_severe_log_exponent_relative(self):
        # (log n)^{-4s/p} regimes: exponent recovered to 5% relative error
        rows = numeric_rate_scan(
            SmoothnessClass.ordinary(1.0), NoiseModel.severe(0.5), DYADIC
        )
        gamma, _ = fit_log_rate([r.n for r in rows], [r.estimation_bound for r in rows])
        target = -8.0  # -4s/p
        assert abs(gamma - target) <= 0.05 * abs(target)

    def test_rejects_unsorted_grid(self):
        with pytest.raises(ValueError):
            numeric_rate_scan(SmoothnessClass.ordinary(1.0), NoiseModel.mild(1.0), [256, 128])


class TestFitRate:
    def test_exact_power_law(self):
        ns = np.array(DYADIC, dtype=float)
        slope, log_exp, r2 = fit_rate(ns, 3.0 / ns)
        assert slope == pytest.approx(-1.0, abs=1e-12)
        assert r2 == pytest.approx(1.0)

    def test_exact_power_law_with_log(self):
        ns = np.array(DYADIC, dtype=float)
        vals = ns ** -1.0 * np.log(ns) ** 2
        slope, log_exp, _ = fit_rate(ns, vals, log_log_term=True)
        assert slope == pytest.approx(-1.0, abs=1e-6)
        assert log_exp == pytest.approx(2.0, abs=1e-6)

    def test_rejects_nonpositive_and_short(self):
        with pytest.raises(ValueError):
            fit_rate([10, 20, 30, 40], [1.0, -1.0, 1.0, 1.0])
        with pytest.raises(ValueError):
            fit_rate([10, 20, 30], [1.0, 1.0, 1.0])

    def test_log_only_fit(self):
        ns = np.array(DYADIC, dtype=float)
        gamma, r2 = fit_log_rate(ns, np.log(ns) ** -3.0)
        assert gamma == pytest.approx(-3.0, abs=1e-12)
        assert r2 == pytest.approx(1.0)

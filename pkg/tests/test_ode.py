"""Power-series solving of f^(k) + A f = 0, the coefficient-majorant bound,
closed-form predictors, order estimation and the inequality audit."""

import math

import numpy as np
import pytest

from discgrowth import ode as O
from discgrowth.numerics import LogGap, LogValue


def exp_frac_coeffs(n: int) -> list[float]:
    """Taylor coefficients of exp(z/(1-z)) via the exact recurrence
    (m+1) f_{m+1} = (2m+1) f_m - (m-1) f_{m-1}."""
    f = [1.0]
    for m in range(n):
        prev = f[m - 1] if m >= 1 else 0.0
        f.append(((2 * m + 1) * f[m] - (m - 1) * prev) / (m + 1))
    return f


@pytest.fixture(scope="module")
def exp_solution():
    # f' = (1-z)^-2 f, i.e. the equation coefficient is -(1-z)^-2
    return O.taylor_solve(
        O.pole_coeffs(1, 220, scale=-1.0), 1, [LogValue.from_float(1.0)], 220
    )


class TestTaylorSolve:
    def test_zero_coefficient_keeps_initial_polynomial(self):
        sol = O.taylor_solve(O.DenseCoeffs.from_floats([0.0]), 2,
                             [LogValue.from_float(2.0), LogValue.from_float(-1.0)], 9)
        assert sol.coeff(0).to_float() == pytest.approx(2.0)
        assert sol.coeff(1).to_float() == pytest.approx(-1.0)
        assert all(sol.coeff(m).is_zero for m in range(2, 10))

    def test_cosine(self):
        sol = O.taylor_solve(O.DenseCoeffs.from_floats([1.0]), 2,
                             [LogValue.from_float(1.0), LogValue.zero()], 10)
        for m, want in ((2, -0.5), (4, 1.0 / 24.0), (6, -1.0 / 720.0), (3, 0.0)):
            assert sol.coeff(m).to_float() == pytest.approx(want, rel=1e-12, abs=1e-15)

    def test_first_coefficients_of_exp_frac(self, exp_solution):
        # f = exp(z/(1-z)) = 1 + z + 3/2 z^2 + 13/6 z^3 + ...
        assert exp_solution.coeff(2).to_float() == pytest.approx(1.5, rel=1e-13)
        assert exp_solution.coeff(3).to_float() == pytest.approx(13.0 / 6.0, rel=1e-13)

    def test_matches_recurrence_oracle_through_200(self, exp_solution):
        want = exp_frac_coeffs(200)
        for m in range(201):
            got = exp_solution.coeff(m).to_float()
            assert got == pytest.approx(want[m], rel=1e-10)

    def test_rho_scaling_consistent(self):
        want = exp_frac_coeffs(100)
        sol = O.taylor_solve(O.pole_coeffs(1, 100, scale=-1.0), 1,
                             [LogValue.from_float(1.0)], 100, rho=0.5)
        assert sol.coeff(60).to_float() == pytest.approx(want[60], rel=1e-12)

    def test_validation(self):
        coeffs = O.DenseCoeffs.from_floats([1.0])
        with pytest.raises(O.OdeError):
            O.taylor_solve(coeffs, 0, [], 5)
        with pytest.raises(O.OdeError):
            O.taylor_solve(coeffs, 2, [LogValue.from_float(1.0)], 5)
        with pytest.raises(O.OdeError):
            O.taylor_solve(coeffs, 2, [LogValue.from_float(1.0)] * 2, 1)


class TestGrowthMajorant:
    def test_pure_power_closed_form(self):
        # M = (1-t)^-2, k = 1: bound = r/(1-r)
        model = O.MajorantModel.pure_power(1.0, 2.0)
        for g in (1.0, 3.0, 6.0):
            r = LogGap(g).r
            want = r / (1.0 - r)
            assert O.growth_majorant(model, 1, g).to_float() == pytest.approx(want, rel=1e-12)

    def test_bounded_model(self):
        b = 7.0
        model = O.MajorantModel(lambda g: math.log(b), p1=0.0, p2=0.0)
        for k in (1, 2):
            got = O.growth_majorant(model, k, LogGap.from_r(0.8)).to_float()
            assert got <= k * b ** (1.0 / k) * 0.8 * (1.0 + 1e-12)
            assert got == pytest.approx(k * b ** (1.0 / k) * 0.8, rel=1e-9)

    def test_solution_below_majorant(self, exp_solution):
        # |A| = (1-t)^-2 exactly, k = 1
        model = O.MajorantModel.pure_power(1.0, 2.0)
        for g in np.linspace(0.3, 6.0, 30):
            bound = O.growth_majorant(model, 1, float(g)).to_float()
            assert exp_solution.log_abs_sum(float(g)) <= bound * (1.0 + 1e-12) + 1e-9


class TestPredictors:
    def test_alpha_at_p_equals_p2(self):
        sigma, lam, alpha = O.predict_orders(2.0, 4.0, 1, 4.0)
        assert (sigma, lam, alpha) == (3.0, 1.5, 0.5)

    def test_regular_case(self):
        sigma, lam, alpha = O.predict_orders(3.0, 3.0, 1, 3.0)
        assert sigma == lam == 2.0
        assert alpha == 1.0

    def test_clip_at_large_p(self):
        sigma, lam, alpha = O.predict_orders(2.0, 4.0, 1, 8.0)
        assert sigma == 3.0
        assert alpha == 1.0  # 1.25 clipped
        assert lam == 1.0

    def test_validation(self):
        with pytest.raises(O.OdeError):
            O.predict_orders(2.0, 4.0, 1, 3.0)  # p < p2
        with pytest.raises(O.OdeError):
            O.predict_orders(1.0, 2.0, 1, 2.0)  # p2 = 2k

    def test_xi_reference_value(self):
        xi, beta, res = O.quadratic_growth_exponents(2, 5.0, 6.0, 0.0)
        assert xi == pytest.approx(1.0 + math.sqrt(21.0), rel=1e-13)
        assert xi == pytest.approx(5.58257569495584, rel=1e-12)
        # root check on the defining quadratic
        assert xi * xi - 2.0 * xi - 5.0 * (6.0 - 2.0) == pytest.approx(0.0, abs=1e-12)
        assert res <= 1e-12

    def test_xi_exact_when_degrees_match(self):
        xi, _, _ = O.quadratic_growth_exponents(1, 3.0, 3.0, 0.0)
        assert xi == 3.0

    def test_xi_inside_interval_and_identity(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            k = int(rng.integers(1, 4))
            p2 = float(rng.uniform(2 * k + 0.1, 6 * k))
            p1 = float(rng.uniform(0.2, p2))
            cap = (p2 - p1) * (p2 - k) / p1
            eps = float(rng.uniform(0.0, cap * 0.9)) if p1 < p2 else 0.0
            xi, beta, res = O.quadratic_growth_exponents(k, p1, p2, eps)
            assert p1 < xi < p2 or (p1 == p2 and xi == p2)
            assert res <= 1e-12

    def test_xi_eps_validation(self):
        cap = (6.0 - 5.0) * (6.0 - 2.0) / 5.0
        with pytest.raises(O.OdeError):
            O.quadratic_growth_exponents(2, 5.0, 6.0, cap * 1.01)

    def test_two_scale_branches(self):
        assert O.two_scale_orders(2.0, 0.2, 0.5) == (1.8, 1.5)
        assert O.two_scale_orders(0.1, 0.2, 0.5) == (0.0, 0.0)
        sigma, lam = O.two_scale_orders(0.8, 0.2, 0.5)
        assert lam == pytest.approx(0.24 / 0.7, rel=1e-13)
        assert sigma == pytest.approx(0.6, rel=1e-13)
        with pytest.raises(O.OdeError):
            O.two_scale_orders(1.0, 0.2, 0.5)
        with pytest.raises(O.OdeError):
            O.two_scale_orders(0.5, 0.7, 0.5)

    def test_paired_radius_limit(self):
        dev = O.paired_radius_limit(1.0, 2.0, [-math.log(0.01)])
        assert dev[0][1] == pytest.approx(0.01348, abs=2e-4)
        grid = [4.0, 6.0, 8.0, 10.0, 12.0]
        devs = [d for _, d in O.paired_radius_limit(1.0, 2.0, grid)]
        assert all(b < a for a, b in zip(devs, devs[1:]))
        assert devs[-1] < 1e-3


class TestAnnulusLogderiv:
    def test_constant_function(self):
        spec = O.AnalyticSpec(lambda z: -math.inf, lambda z: 0.0)
        lhs, rhs = O.annulus_logderiv_check(spec, 1, 0, 0.2, 0.8, 1.5)
        assert lhs == 0.0

    def test_exponential_closed_form(self):
        # f = e^z: |f'/f| = 1, so lhs = pi (r^2 - r_inner^2)
        spec = O.AnalyticSpec(lambda z: 0.0, lambda z: z.real)
        lhs, rhs = O.annulus_logderiv_check(spec, 1, 0, 0.3, 1.2, 2.0)
        assert lhs == pytest.approx(math.pi * (1.2**2 - 0.3**2), rel=1e-7)
        assert lhs <= rhs

    def test_essential_singularity_ratio_bounded(self):
        # f = exp(1/(1-z)) inside R < 1
        def log_ratio(z: complex) -> float:
            return -2.0 * math.log(abs(1.0 - z))

        def log_f(z: complex) -> float:
            return (1.0 / (1.0 - z)).real

        spec = O.AnalyticSpec(log_ratio, log_f)
        big_r = 0.995
        ratios = []
        for r in (0.9, 0.95, 0.98):
            lhs, rhs = O.annulus_logderiv_check(spec, 1, 0, 0.0, r, big_r)
            ratios.append(lhs / rhs)
        assert max(ratios) < 10.0


class TestEstimateOrders:
    def test_constant_ratio_recovers_exponent(self):
        gs = np.linspace(1.0, 8.0, 64)
        samples = [(float(g), 2.0 * float(g)) for g in gs]  # log M = (1-r)^-2
        ind = O.estimate_orders(samples)
        assert ind.lambda_M.tail == pytest.approx(2.0, abs=0.02)
        assert ind.sigma_M.tail == pytest.approx(2.0, abs=0.02)
        assert ind.lambda_M.slope == pytest.approx(2.0, abs=0.02)

    def test_oscillating_exponent(self):
        # dyadic blocks alternating between ratio 1 and 2 via monotone
        # piecewise-linear anchors
        anchors_g = [2.0**j for j in range(1, 9)]
        anchors_v = [g * (1.0 if j % 2 == 0 else 2.0) for j, g in enumerate(anchors_g)]
        gs = np.linspace(2.0, 250.0, 600)
        vals = np.interp(gs, anchors_g, anchors_v)
        ind = O.estimate_orders(list(zip(gs, vals)), window=0.9)
        assert ind.sigma_M.tail == pytest.approx(2.0, abs=0.1)
        assert ind.lambda_M.tail == pytest.approx(1.0, abs=0.1)

    def test_star_indicators_from_k_samples(self):
        gs = np.linspace(1.0, 9.0, 64)
        loglog = [(float(g), 1.5 * float(g)) for g in gs]
        logk = [(float(g), 2.5 * float(g)) for g in gs]
        ind = O.estimate_orders(loglog, log_k=logk)
        assert ind.lambda_star.tail == pytest.approx(2.5, abs=0.02)
        assert ind.sigma_star.tail == pytest.approx(2.5, abs=0.02)

    def test_preconditions(self):
        gs = np.linspace(1.0, 9.0, 10)
        with pytest.raises(O.OdeError):
            O.estimate_orders([(float(g), g) for g in gs])  # too few
        gs = np.linspace(1.0, 3.0, 64)
        with pytest.raises(O.OdeError):
            O.estimate_orders([(float(g), g) for g in gs])  # span < 6

    def test_doubling_series_k_samples_star_indicator(self):
        # K samples of the doubling construction: the lower star indicator
        # approaches lam + lam/sigma
        from discgrowth import wiman as W

        lam, sigma = 1.0, 2.0
        b = W.build_reference_series("doubling", sigma=sigma, lam=lam)
        loglog, logk = [], []
        for k in range(8, 15):
            g_k, g_next = b.break_g(k), b.break_g(k + 1)
            for frac in (0.005, 0.05, 0.3, 0.6, 0.9, 0.995):
                g = g_k + frac * (g_next - g_k)
                loglog.append((g, b.log_max_term(g).logmag))
                logk.append((g, b.k_indicator(g).logmag))
        ind = O.estimate_orders(loglog, log_k=logk, window=1.0)
        assert ind.lambda_star.tail == pytest.approx(lam + lam / sigma, abs=0.1)
        assert ind.sigma_star.tail == pytest.approx(sigma + 1.0, abs=0.1)


def solve_and_estimate(p: int, degree: int, g_lo: float, g_hi: float):
    sol = O.taylor_solve(O.pole_coeffs(p, degree, scale=-1.0), 1,
                         [LogValue.from_float(1.0)], degree)
    gs = np.linspace(g_lo, g_hi, 48)
    samples = [(float(g), math.log(sol.log_abs_sum(float(g)))) for g in gs]
    ind = O.estimate_orders(samples, window=0.4, min_span=1.0)
    return sol, ind


class TestOrderRecovery:
    @pytest.mark.parametrize("p,degree,g_lo,g_hi", [(2, 12000, 1.0, 2.6), (3, 18000, 0.8, 1.95)])
    def test_sigma_recovered_within_5_percent(self, p, degree, g_lo, g_hi):
        sol, ind = solve_and_estimate(p, degree, g_lo, g_hi)
        assert ind.sigma_M.tail == pytest.approx(p, rel=0.05)
        assert ind.lambda_M.tail == pytest.approx(p, rel=0.05)
        # cross-check against the closed form log M = e^(pg) - 1
        g = g_hi
        assert sol.log_abs_sum(g) == pytest.approx(math.expm1(p * g), rel=1e-9)

    def test_audit_rows_regular_instance(self):
        _, ind = solve_and_estimate(2, 12000, 1.0, 2.6)
        rows = O.audit_inequalities(ind, p1=3.0, p2=3.0, k=1)
        assert all(r.passed for r in rows)
        assert rows[0].margin >= 0.0

#include <doctest.h>

#include "tsemos/distributions.hpp"
#include "tsemos/error.hpp"
#include "tsemos/log.hpp"
#include "tsemos/timeseries.hpp"

#ifdef TSEMOS_HAVE_BOOST
#include <boost/math/special_functions/gamma.hpp>
#endif

#include <cmath>
#include <random>

using namespace tsemos;

namespace {

Eigen::VectorXd simulate_ar(const Eigen::VectorXd& tau, int n, std::uint64_t seed, double eta = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    const int p = static_cast<int>(tau.size());
    const int burn = 500;
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n + burn, eta);
    for (int t = p; t < n + burn; ++t) {
        double v = eta + nd(rng);
        for (int j = 1; j <= p; ++j) v += tau[j - 1] * (x[t - j] - eta);
        x[t] = v;
    }
    return x.tail(n);
}

Eigen::VectorXd white_noise(int n, std::uint64_t seed) { return simulate_ar(Eigen::VectorXd(0), n, seed); }

ARCoeffs make_ar(double eta, std::initializer_list<double> tau) {
    ARCoeffs ar;
    ar.eta = eta;
    ar.tau.resize(static_cast<Eigen::Index>(tau.size()));
    int i = 0;
    for (double t : tau) ar.tau[i++] = t;
    return ar;
}

}  // namespace

TEST_CASE("acf") {
    SUBCASE("perfect alternation") {
        Eigen::VectorXd x(1000);
        for (int i = 0; i < 1000; ++i) x[i] = (i % 2 == 0) ? 1.0 : -1.0;
        CHECK(acf(x, 1)[0] == doctest::Approx(-1.0).epsilon(2e-3));
    }
    SUBCASE("white noise") {
        const Eigen::VectorXd x = white_noise(5000, 11);
        CHECK(std::fabs(acf(x, 1)[0]) < 3.0 / std::sqrt(5000.0));
    }
    SUBCASE("AR(1)") {
        const Eigen::VectorXd x = simulate_ar(Eigen::VectorXd::Constant(1, 0.7), 5000, 12);
        CHECK(std::fabs(acf(x, 1)[0] - 0.7) < 0.05);
    }
    SUBCASE("biased denominator") {
        const Eigen::Vector4d x(1, 2, 3, 4);
        // c1 = ((-1.5)(-0.5) + (-0.5)(0.5) + (0.5)(1.5)) / 4, c0 = 5/4
        CHECK(acf(x, 1)[0] == doctest::Approx(1.25 / 5.0).epsilon(1e-14));
    }
    SUBCASE("constant series") {
        CHECK_THROWS_AS((void)acf(Eigen::VectorXd::Constant(10, 3.0), 2), Error);
        try {
            (void)acf(Eigen::VectorXd::Constant(10, 3.0), 2);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DegenerateSeries);
        }
    }
}

TEST_CASE("Levinson-Durbin") {
    const Eigen::VectorXd x = simulate_ar(Eigen::VectorXd::Constant(1, 0.4), 300, 2);
    const Eigen::VectorXd c = autocovariance(x, 3);
    const LevinsonDurbin ld = levinson_durbin(c, 3);
    CHECK(ld.coefficients[1][0] == doctest::Approx(acf(x, 1)[0]).epsilon(1e-14));
    // order-3 solution satisfies the Toeplitz system
    Eigen::Matrix3d R;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) R(i, j) = c[std::abs(i - j)];
    const Eigen::Vector3d phi = R.ldlt().solve(c.segment(1, 3));
    CHECK((phi - ld.coefficients[3]).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(ld.innovation_variance[3] == doctest::Approx(c[0] - phi.dot(c.segment(1, 3))).epsilon(1e-12));
}

TEST_CASE("fit_ar_yule_walker") {
    SUBCASE("white noise selects order 0 in most seeds") {
        int zero = 0;
        for (int seed = 1; seed <= 100; ++seed) {
            zero += fit_ar_yule_walker(white_noise(5000, 100 + seed)).order() == 0 ? 1 : 0;
        }
        CHECK(zero > 60);
    }
    SUBCASE("AR(2) recovery") {
        const Eigen::VectorXd x = simulate_ar(Eigen::Vector2d(0.5, 0.3), 5000, 21, 2.0);
        const ARCoeffs ar = fit_ar_yule_walker(x);
        REQUIRE(ar.order() == 2);
        CHECK(std::fabs(ar.tau[0] - 0.5) < 0.05);
        CHECK(std::fabs(ar.tau[1] - 0.3) < 0.05);
        CHECK(ar.eta == doctest::Approx(x.mean()));
        CHECK(ar.innovation_variance == doctest::Approx(1.0).epsilon(0.05));
    }
    SUBCASE("low orders on AR(1) residual-like data") {
        int low = 0;
        for (int seed = 1; seed <= 20; ++seed) {
            const int p = fit_ar_yule_walker(simulate_ar(Eigen::VectorXd::Constant(1, 0.6), 1826, seed)).order();
            low += (p >= 1 && p <= 3) ? 1 : 0;
        }
        CHECK(low >= 15);
    }
    SUBCASE("degenerate input") {
        try {
            (void)fit_ar_yule_walker(Eigen::VectorXd::Constant(50, 1.0));
            FAIL("no error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DegenerateSeries);
        }
    }
    SUBCASE("default maximum order") {
        CHECK(default_max_ar_order(5000) == 20);
        CHECK(default_max_ar_order(50) == 16);
        CHECK(default_max_ar_order(10) == 8);
        CHECK(default_max_ar_order(90) == 19);
    }
    SUBCASE("fixed order") {
        const Eigen::VectorXd x = simulate_ar(Eigen::VectorXd::Constant(1, 0.5), 2000, 3);
        CHECK(fit_ar_yule_walker_order(x, 4).order() == 4);
    }
}

TEST_CASE("ar_one_step") {
    CHECK(ar_one_step(make_ar(0.0, {0.5}), Eigen::VectorXd::Constant(1, 1.0)) == 0.5);
    CHECK(ar_one_step(make_ar(2.5, {0.0, 0.0}), Eigen::Vector2d(7, 9)) == 2.5);
    const ARCoeffs ar = make_ar(0.3, {0.41, -0.27});
    const Eigen::Vector4d h(1.0, -2.0, 0.7, 1.9);
    const double expected = 0.3 + 0.41 * (1.9 - 0.3) - 0.27 * (0.7 - 0.3);
    CHECK(std::fabs(ar_one_step(ar, h) - expected) < 1e-12);
    try {
        (void)ar_one_step(ar, Eigen::VectorXd::Constant(1, 1.0));
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::HistoryTooShort);
    }
    // order 0 needs no history
    CHECK(ar_one_step(make_ar(1.5, {}), Eigen::VectorXd(0)) == 1.5);
}

TEST_CASE("ar_multistep") {
    const Eigen::VectorXd two = ar_multistep(make_ar(0.0, {0.5}), Eigen::VectorXd::Constant(1, 1.0), 2);
    CHECK(two[0] == 0.5);
    CHECK(two[1] == 0.25);

    const ARCoeffs ar3 = make_ar(-0.4, {0.3, -0.2, 0.25});
    const Eigen::Vector3d h(0.9, -1.1, 2.0);
    CHECK(ar_multistep(ar3, h, 1)[0] == ar_one_step(ar3, h));

    // unrolled recursion
    const double e = -0.4;
    const double r1 = e + 0.3 * (2.0 - e) - 0.2 * (-1.1 - e) + 0.25 * (0.9 - e);
    const double r2 = e + 0.3 * (r1 - e) - 0.2 * (2.0 - e) + 0.25 * (-1.1 - e);
    const double r3 = e + 0.3 * (r2 - e) - 0.2 * (r1 - e) + 0.25 * (2.0 - e);
    const double r4 = e + 0.3 * (r3 - e) - 0.2 * (r2 - e) + 0.25 * (r1 - e);
    const double r5 = e + 0.3 * (r4 - e) - 0.2 * (r3 - e) + 0.25 * (r2 - e);
    const Eigen::VectorXd got = ar_multistep(ar3, h, 5);
    const double want[5] = {r1, r2, r3, r4, r5};
    for (int k = 0; k < 5; ++k) CHECK(std::fabs(got[k] - want[k]) < 1e-12);

    // geometric convergence to the mean for a stationary process
    const ARCoeffs ar2 = make_ar(1.0, {0.5, 0.3});
    REQUIRE(is_stationary(ar2));
    const Eigen::VectorXd path = ar_multistep(ar2, Eigen::Vector2d(4.0, -3.0), 120);
    for (int k = 0; k < 120; ++k) CHECK(std::fabs(path[k] - 1.0) <= 10.0 * std::pow(0.9, k + 1));

    CHECK_THROWS_AS((void)ar_multistep(ar2, Eigen::Vector2d(1, 2), 0), Error);
}

TEST_CASE("stationarity") {
    CHECK(is_stationary(make_ar(0, {})));
    CHECK(is_stationary(make_ar(0, {0.5, 0.3})));
    CHECK_FALSE(is_stationary(make_ar(0, {1.05})));
    CHECK_FALSE(is_stationary(make_ar(0, {0.5, 0.6})));
    CHECK(is_stationary(make_ar(0, {-0.9})));
}

TEST_CASE("garch_filter") {
    SUBCASE("direct substitution") {
        const Eigen::VectorXd out = garch_filter({0.1, 0.5, 0.3}, Eigen::Vector2d(1.0, 0.0), 1.0);
        CHECK(out[0] == 1.0);
        CHECK(out[1] == doctest::Approx(0.9).epsilon(1e-15));
    }
    SUBCASE("no persistence") {
        const Eigen::VectorXd rho_sq = white_noise(50, 4).array().square();
        const Eigen::VectorXd out = garch_filter({0.7, 0.0, 0.0}, rho_sq, 0.7);
        CHECK((out.array() == 0.7).all());
    }
    SUBCASE("long-run mean equals the unconditional variance") {
        const GARCHCoeffs g{0.2, 0.7, 0.2};
        CHECK(g.initial_variance() == doctest::Approx(2.0));
        std::mt19937_64 rng(8);
        std::normal_distribution<double> nd;
        const int n = 20000;
        Eigen::VectorXd rho_sq(n);
        double v = g.initial_variance();
        for (int t = 0; t < n; ++t) {
            const double rho = std::sqrt(v) * nd(rng);
            rho_sq[t] = rho * rho;
            v = g.omega0 + g.omega1 * v + g.omega2 * rho_sq[t];
        }
        const Eigen::VectorXd filtered = garch_filter(g, rho_sq, g.initial_variance());
        CHECK(filtered.mean() == doctest::Approx(2.0).epsilon(0.1));
        CHECK(filtered.minCoeff() > 0.0);
    }
    SUBCASE("non-stationary coefficients start at 1") {
        CHECK(GARCHCoeffs{0.1, 0.6, 0.5}.initial_variance() == 1.0);
    }
    SUBCASE("invalid inputs") {
        CHECK_THROWS_AS((void)garch_filter({0.1, 0.5, 0.3}, Eigen::Vector2d(-1.0, 0.0), 1.0), Error);
        CHECK_THROWS_AS((void)garch_filter({-0.1, 0.5, 0.3}, Eigen::Vector2d(1.0, 0.0), 1.0), Error);
        CHECK_THROWS_AS((void)garch_filter({0.1, 0.5, 0.3}, Eigen::Vector2d(1.0, 0.0), 0.0), Error);
    }
}

TEST_CASE("fit_garch") {
    SUBCASE("recovers persistence from a long simulated series") {
        const GARCHCoeffs truth{0.2, 0.6, 0.2};
        std::mt19937_64 rng(17);
        std::normal_distribution<double> nd;
        const int n = 8000;
        Eigen::VectorXd rho(n);
        double v = truth.initial_variance();
        for (int t = 0; t < n; ++t) {
            rho[t] = std::sqrt(v) * nd(rng);
            v = truth.omega0 + truth.omega1 * v + truth.omega2 * rho[t] * rho[t];
        }
        const GARCHCoeffs g = fit_garch(rho);
        CHECK(std::fabs(g.omega1 + g.omega2 - 0.8) < 0.1);
        CHECK(std::fabs(g.omega2 - 0.2) < 0.07);
    }
    SUBCASE("degenerate residuals fall back to a constant variance with a warning") {
        log::set_quiet(true);
        log::reset_warning_count();
        const GARCHCoeffs g = fit_garch(Eigen::VectorXd::Zero(100));
        CHECK(g.omega1 == 0.0);
        CHECK(g.omega2 == 0.0);
        CHECK(log::warning_count() == 1);
        log::set_quiet(false);
    }
}

TEST_CASE("ljung_box") {
    SUBCASE("zero autocorrelation") {
        // every lag-1 product is zero
        Eigen::VectorXd x(8);
        x << 1, 0, -1, 0, 1, 0, -1, 0;
        REQUIRE(autocovariance(x, 1)[1] == 0.0);
        const LjungBoxResult r = ljung_box(x, 1);
        CHECK(r.statistic == 0.0);
        CHECK(r.p_value == doctest::Approx(1.0));
    }
    SUBCASE("statistic formula") {
        const Eigen::VectorXd x = white_noise(200, 31);
        const Eigen::VectorXd rho = acf(x, 3);
        double q = 0.0;
        for (int j = 1; j <= 3; ++j) q += rho[j - 1] * rho[j - 1] / (200.0 - j);
        q *= 200.0 * 202.0;
        const LjungBoxResult r = ljung_box(x, 3);
        CHECK(r.statistic == doctest::Approx(q).epsilon(1e-12));
        CHECK(r.lag == 3);
        CHECK(r.p_value == doctest::Approx(chi_squared_sf(q, 3)).epsilon(1e-14));
    }
    SUBCASE("size under white noise") {
        int rejections = 0;
        for (int seed = 1; seed <= 1000; ++seed) {
            rejections += ljung_box(white_noise(500, 5000 + seed), 10).p_value < 0.05 ? 1 : 0;
        }
        CHECK(std::fabs(rejections / 1000.0 - 0.05) <= 0.02);
    }
    SUBCASE("power against AR(1)") {
        const Eigen::VectorXd x = simulate_ar(Eigen::VectorXd::Constant(1, 0.8), 1000, 41);
        CHECK(ljung_box(x, 5).p_value < 1e-6);
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS((void)ljung_box(white_noise(10, 1), 10), Error);
        CHECK_THROWS_AS((void)ljung_box(white_noise(10, 1), 0), Error);
    }
}

#ifdef TSEMOS_HAVE_BOOST
TEST_CASE("chi-squared tail against an independent implementation") {
    for (int k = 1; k <= 30; ++k) {
        for (double q : {0.01, 0.5, 1.0, 2.5, 5.0, 10.0, 20.0, 35.0, 60.0, 100.0}) {
            const double expected = boost::math::gamma_q(0.5 * k, 0.5 * q);
            CHECK(std::fabs(chi_squared_sf(q, k) - expected) < 1e-10);
            CHECK(std::fabs(regularized_gamma_q(0.5 * k, 0.5 * q) - expected) < 1e-10);
        }
    }
}
#endif

TEST_CASE("regularized gamma edge values") {
    CHECK(regularized_gamma_q(2.0, 0.0) == 1.0);
    // Q(1, x) = exp(−x)
    for (double x : {0.1, 1.0, 3.0, 12.0}) CHECK(regularized_gamma_q(1.0, x) == doctest::Approx(std::exp(-x)).epsilon(1e-13));
}

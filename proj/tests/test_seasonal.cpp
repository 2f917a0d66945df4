#include <doctest.h>

#include "tsemos/seasonal.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace tsemos;

TEST_CASE("fourier_features") {
    const Eigen::Vector4d expected0(0, 1, 0, 1);
    CHECK((fourier_features(0.0) - expected0).cwiseAbs().maxCoeff() == 0.0);
    CHECK((fourier_features(365.25) - expected0).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((fourier_features(91.3125) - Eigen::Vector4d(1, 0, 0, -1)).cwiseAbs().maxCoeff() < 1e-9);
    // long double instantiation agrees with double
    const auto ld = fourier_features<long double>(123.0L);
    CHECK(std::fabs(static_cast<double>(ld[2]) - fourier_features(123.0)[2]) < 1e-14);
}

TEST_CASE("seasonal_location") {
    SeasonalCoeffs c;
    c.slope() = 1.0;
    CHECK(seasonal_location(c, 17.0, 7.3) == doctest::Approx(7.3).epsilon(1e-15));

    SeasonalCoeffs d;
    d.intercept() = 1.0;
    d.fourier_intercept()[1] = 2.0;
    CHECK(seasonal_location(d, 0.0, 4.0) == doctest::Approx(3.0).epsilon(1e-15));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int rep = 0; rep < 50; ++rep) {
        SeasonalCoeffs r;
        for (auto& v : r.values) v = u(rng);
        const double t = 1000.0 * (u(rng) + 2.0), x = 10.0 * u(rng);
        const double w = 2.0 * std::numbers::pi * t / 365.25;
        const double f[4] = {std::sin(w), std::cos(w), std::sin(2 * w), std::cos(2 * w)};
        double expected = r.values[0] + r.values[1] * x;
        for (int k = 0; k < 4; ++k) expected += r.values[2 + k] * f[k] + r.values[6 + k] * f[k] * x;
        CHECK(std::fabs(seasonal_location(r, t, x) - expected) < 1e-12);
        CHECK(std::fabs(seasonal_design_row(t, x).dot(r.values.transpose()) - expected) < 1e-12);
        // one full period later
        CHECK(std::fabs(seasonal_location(r, t + 365.25, x) - seasonal_location(r, t, x)) < 1e-9);
    }
}

TEST_CASE("seasonal_logscale") {
    SeasonalCoeffs zero;
    CHECK(std::exp(seasonal_logscale(zero, 55.0, 1.7)) == 1.0);

    SeasonalCoeffs c;
    c.slope() = 1.0;
    CHECK(std::exp(seasonal_logscale(c, 200.0, 0.5)) == doctest::Approx(1.6487212707).epsilon(1e-9));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int rep = 0; rep < 100; ++rep) {
        SeasonalCoeffs r;
        for (auto& v : r.values) v = u(rng);
        CHECK(std::exp(seasonal_logscale(r, 100.0 * u(rng), std::fabs(u(rng)))) > 0.0);
    }
}

TEST_CASE("coefficient layout") {
    Eigen::Matrix<double, 10, 1> v;
    for (int i = 0; i < 10; ++i) v[i] = i;
    const SeasonalCoeffs c = SeasonalCoeffs::from(v);
    CHECK(c.intercept() == 0.0);
    CHECK(c.slope() == 1.0);
    CHECK(c.fourier_intercept() == Eigen::Vector4d(2, 3, 4, 5));
    CHECK(c.fourier_slope() == Eigen::Vector4d(6, 7, 8, 9));
    CHECK(c.all_finite());
    CHECK(harmonic_amplitude(Eigen::Vector4d(3, 4, 0, 0), 1) == 5.0);
    CHECK(harmonic_amplitude(Eigen::Vector4d(3, 4, 0, 2), 2) == 2.0);

    // without Fourier terms the predictor is affine in x
    SeasonalCoeffs a;
    a.intercept() = 0.5;
    a.slope() = 2.0;
    CHECK(seasonal_location(a, 10.0, 3.0) == seasonal_location(a, 250.0, 3.0));
}

TEST_CASE("design matrix") {
    const Eigen::Vector3d t(1, 2, 3), x(0.5, -1, 2);
    const Eigen::MatrixXd d = seasonal_design(t, x);
    CHECK(d.rows() == 3);
    CHECK(d.cols() == 10);
    CHECK(d(1, 0) == 1.0);
    CHECK(d(1, 1) == -1.0);
    CHECK(d(2, 7) == doctest::Approx(fourier_features(3.0)[1] * 2.0));
}

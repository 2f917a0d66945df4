#include <doctest.h>

#include "test_util.hpp"
#include "tsemos/distributions.hpp"
#include "tsemos/scoring.hpp"
#include "tsemos/verify.hpp"

#ifdef TSEMOS_HAVE_BOOST
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#endif

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace tsemos;

namespace {

// Step CDF of an ensemble.
auto empirical_cdf(std::vector<double> members) {
    std::sort(members.begin(), members.end());
    return [members](double z) {
        const auto below = std::upper_bound(members.begin(), members.end(), z) - members.begin();
        return static_cast<double>(below) / static_cast<double>(members.size());
    };
}

// Pairwise-difference form of the ensemble CRPS on a fine grid: an oracle that
// does not share code with the energy form.
double crps_ensemble_riemann(const std::vector<double>& members, double y) {
    const auto cdf = empirical_cdf(members);
    std::vector<double> knots = members;
    knots.push_back(y);
    std::sort(knots.begin(), knots.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double mid = 0.5 * (knots[i] + knots[i + 1]);
        const double diff = cdf(mid) - (mid >= y ? 1.0 : 0.0);
        total += diff * diff * (knots[i + 1] - knots[i]);
    }
    return total;
}

}  // namespace

TEST_CASE("standard normal helpers") {
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(normal_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));
    for (double p : {1e-10, 1e-4, 0.025, 0.3, 0.5, 0.7, 0.975, 1 - 1e-6}) {
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    }
#ifdef TSEMOS_HAVE_BOOST
    const boost::math::normal_distribution<double> std_normal;
    for (double z = -8.0; z <= 8.0; z += 0.37) {
        CHECK(std::fabs(normal_cdf(z) - boost::math::cdf(std_normal, z)) < 1e-14);
    }
    for (double p : {1e-8, 0.01, 0.2, 0.5, 0.8, 0.99}) {
        CHECK(normal_quantile(p) == doctest::Approx(boost::math::quantile(std_normal, p)).epsilon(1e-12));
    }
#endif
}

TEST_CASE("crps_normal") {
    CHECK(std::fabs(crps_normal({0.0, 1.0}, 0.0) - 0.2336950) < 1e-6);
    CHECK(std::fabs(crps_normal({0.0, 1.0}, 1.0) - 0.6024414) < 1e-6);
    // 2φ(0) − 1/√π
    CHECK(crps_normal({0.0, 1.0}, 0.0) ==
          doctest::Approx(2.0 * normal_pdf(0.0) - 1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-15));
    for (double s : {0.5, 2.0, 10.0}) {
        CHECK(std::fabs(crps_normal({0.0, s}, 0.0) - s * 0.2336950) < 1e-6 * s);
    }

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> mu_d(-10.0, 10.0), sig_d(0.1, 5.0), off_d(-4.0, 4.0);
    for (int i = 0; i < 200; ++i) {
        const double mu = mu_d(rng), sigma = sig_d(rng), y = mu + sigma * off_d(rng);
        const double value = crps_normal({mu, sigma}, y);
        CHECK(value >= 0.0);
        // location-scale equivariance
        CHECK(value == doctest::Approx(sigma * crps_normal({0.0, 1.0}, (y - mu) / sigma)).epsilon(1e-13));
    }
}

TEST_CASE("crps_normal gradient") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> mu_d(-5.0, 5.0), sig_d(0.2, 4.0), y_d(-8.0, 8.0);
    for (int i = 0; i < 100; ++i) {
        const GaussianParams g{mu_d(rng), sig_d(rng)};
        const double y = y_d(rng);
        const CrpsGradient grad = crps_normal_gradient(g, y);
        const double z = (y - g.mu) / g.sigma;
        CHECK(grad.d_mu == doctest::Approx(1.0 - 2.0 * normal_cdf(z)).epsilon(1e-14));
        const double h = 1e-6;
        const double fd_mu = (crps_normal({g.mu + h, g.sigma}, y) - crps_normal({g.mu - h, g.sigma}, y)) / (2 * h);
        const double fd_sigma =
            (crps_normal({g.mu, g.sigma + h}, y) - crps_normal({g.mu, g.sigma - h}, y)) / (2 * h);
        CHECK(std::fabs(grad.d_mu - fd_mu) <= 1e-5 * std::max(1.0, std::fabs(fd_mu)));
        CHECK(std::fabs(grad.d_sigma - fd_sigma) <= 1e-5 * std::max(1.0, std::fabs(fd_sigma)));
    }
}

TEST_CASE("crps_integral") {
    auto normal = [](double mu, double sigma) {
        return [mu, sigma](double z) { return normal_cdf((z - mu) / sigma); };
    };
    CHECK(std::fabs(crps_integral(normal(0, 1), 0.0) - crps_normal({0, 1}, 0.0)) < 1e-6);
    CHECK(std::fabs(crps_integral(normal(3, 2), -1.0) - crps_normal({3, 2}, -1.0)) < 1e-6);
    // point mass at y
    CHECK(crps_integral([](double z) { return z >= 1.5 ? 1.0 : 0.0; }, 1.5) == doctest::Approx(0.0));
    // uniform on [0, 1], y = 0: ∫₀¹ (z − 1)² dz = 1/3
    auto uniform = [](double z) { return std::clamp(z, 0.0, 1.0); };
    CHECK(crps_integral(uniform, 0.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    // a nowhere-decaying integrand cannot converge
    CHECK_ERROR_CODE(crps_integral([](double) { return 0.5; }, 0.0), ErrorCode::NumericalFailure);

#ifdef TSEMOS_HAVE_BOOST
    // independent quadrature of the same integral on both half lines
    using boost::math::quadrature::gauss_kronrod;
    const double mu = -0.7, sigma = 1.9, y = 1.3;
    const auto F = normal(mu, sigma);
    const double left = gauss_kronrod<double, 61>::integrate(
        [&](double z) { return F(z) * F(z); }, -std::numeric_limits<double>::infinity(), y, 15, 1e-12);
    const double right = gauss_kronrod<double, 61>::integrate(
        [&](double z) { return (1 - F(z)) * (1 - F(z)); }, y, std::numeric_limits<double>::infinity(), 15, 1e-12);
    CHECK(std::fabs(crps_integral(F, y) - (left + right)) < 1e-8);
#endif

    // closed form against quadrature on random triples
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> mu_d(-10.0, 10.0), sig_d(0.1, 5.0), off_d(-4.0, 4.0);
    for (int i = 0; i < 100; ++i) {
        const double m = mu_d(rng), s = sig_d(rng), obs = m + s * off_d(rng);
        CHECK(std::fabs(crps_integral(normal(m, s), obs) - crps_normal({m, s}, obs)) <= 1e-6);
    }
}

TEST_CASE("crps_ensemble") {
    CHECK(crps_ensemble(Eigen::VectorXd::Constant(1, 2.5), 4.0) == doctest::Approx(1.5));
    CHECK(crps_ensemble(Eigen::VectorXd::Constant(7, -3.0), -3.0) == 0.0);
    CHECK(crps_ensemble(Eigen::VectorXd::Constant(7, -3.0), -2.9) > 0.0);

    std::mt19937_64 rng(6);
    std::normal_distribution<double> nd(0.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> members(10);
        for (double& v : members) v = nd(rng);
        const double y = nd(rng);
        const Eigen::Map<const Eigen::VectorXd> m(members.data(), 10);
        const double energy = crps_ensemble(m, y);
        CHECK(energy >= 0.0);
        CHECK(std::fabs(energy - crps_ensemble_riemann(members, y)) < 1e-8);
        CHECK(std::fabs(energy - crps_integral(empirical_cdf(members), y, 1e-11, members)) < 1e-8);
    }
}

TEST_CASE("logs_normal") {
    CHECK(std::fabs(logs_normal({0, 1}, 0.0) - 0.9189385) < 1e-7);
    CHECK(std::fabs(logs_normal({0, 1}, 2.0) - 2.9189385) < 1e-7);
    CHECK(logs_normal({1.5, 0.8}, 1.5) < logs_normal({1.5, 0.8}, 1.5001));
    CHECK(logs_normal({1.5, 0.8}, 1.5) < logs_normal({1.5, 0.8}, 1.4999));
    const double h = 1e-3;
    for (double y = -5.0; y <= 5.0; y += 0.5) {
        const GaussianParams g{0.3, 1.7};
        const double second = (logs_normal(g, y + h) - 2 * logs_normal(g, y) + logs_normal(g, y - h)) / (h * h);
        CHECK(second > 0.0);
    }
}

TEST_CASE("pit_normal") {
    CHECK(pit_normal({2.0, 3.0}, 2.0) == 0.5);
    CHECK(std::fabs(pit_normal({2.0, 3.0}, 2.0 + 1.959964 * 3.0) - 0.975) < 1e-6);

    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd(4.0, 2.5);
    std::vector<double> pit(10000);
    for (double& u : pit) u = pit_normal({4.0, 2.5}, nd(rng));
    const Eigen::Map<const Eigen::VectorXd> u(pit.data(), static_cast<Eigen::Index>(pit.size()));
    const double var = (u.array() - u.mean()).square().sum() / (u.size() - 1.0);
    CHECK(std::fabs(var - 1.0 / 12.0) < 0.005);
    CHECK(ks_uniform(pit).p_value > 0.01);
}

TEST_CASE("central_interval") {
    CHECK(ensemble_nominal_level(50) == doctest::Approx(0.960784).epsilon(1e-6));
    const CentralInterval ci = central_interval({0, 1}, ensemble_nominal_level(50), 0.0);
    CHECK(std::fabs(ci.width - 4.1238) < 1e-3);
    CHECK(ci.lower == doctest::Approx(-ci.upper));
    CHECK(ci.covered);
    CHECK_FALSE(central_interval({0, 1}, 0.9, 100.0).covered);
    CHECK(central_interval({5, 2}, 0.9, 5.0).width == doctest::Approx(2 * 2 * 1.6448536).epsilon(1e-7));
    CHECK_ERROR_CODE(central_interval({0, 1}, 1.0, 0.0), ErrorCode::InvalidLevel);
    CHECK_ERROR_CODE(central_interval({0, 1}, 0.0, 0.0), ErrorCode::InvalidLevel);
    CHECK_ERROR_CODE(central_interval({0, 1}, -0.3, 0.0), ErrorCode::InvalidLevel);
}

TEST_CASE("verification_rank") {
    std::mt19937_64 rng(8);
    const Eigen::Vector4d m(1.0, 2.0, 3.0, 4.0);
    CHECK(verification_rank(m, 0.0, rng) == 1);
    CHECK(verification_rank(m, 9.0, rng) == 5);
    CHECK(verification_rank(m, 2.5, rng) == 3);

    SUBCASE("ties are spread over the tied positions") {
        const Eigen::Vector4d tied(1.0, 2.0, 2.0, 3.0);
        std::vector<int> seen(6, 0);
        for (int i = 0; i < 3000; ++i) ++seen[verification_rank(tied, 2.0, rng)];
        CHECK(seen[1] == 0);
        CHECK(seen[5] == 0);
        for (int r = 2; r <= 4; ++r) CHECK(std::abs(seen[r] - 1000) < 150);
    }

    SUBCASE("exchangeable draws give a uniform histogram") {
        const int m_size = 9, n = 20000;
        std::normal_distribution<double> nd;
        std::vector<double> counts(m_size + 1, 0.0);
        Eigen::VectorXd members(m_size);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < m_size; ++j) members[j] = nd(rng);
            ++counts[verification_rank(members, nd(rng), rng) - 1];
        }
        const double expected = static_cast<double>(n) / (m_size + 1);
        double chi2 = 0.0;
        for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
        CHECK(chi_squared_sf(chi2, m_size) > 0.01);
    }
}

TEST_CASE("score_gaussian and score_ensemble") {
    const CaseScore s = score_gaussian({1.0, 2.0}, 2.0, 0.9);
    CHECK(s.crps == crps_normal({1.0, 2.0}, 2.0));
    CHECK(s.logs == logs_normal({1.0, 2.0}, 2.0));
    CHECK(s.se == 1.0);
    CHECK(s.pit == pit_normal({1.0, 2.0}, 2.0));
    CHECK(s.covered);

    std::mt19937_64 rng(9);
    const Eigen::Vector3d members(0.0, 1.0, 5.0);
    const CaseScore e = score_ensemble(members, 3.0, rng);
    CHECK(e.crps == doctest::Approx(crps_ensemble(members, 3.0)));
    CHECK(std::isnan(e.logs));
    CHECK(e.se == doctest::Approx(1.0));
    CHECK(e.width == 5.0);
    CHECK(e.covered);
    CHECK(e.pit > 0.5);
    CHECK(e.pit < 0.75 + 1e-12);
    CHECK_FALSE(score_ensemble(members, 6.0, rng).covered);
}

TEST_CASE("summarize") {
    CaseScore a;
    a.crps = 0.7;
    a.logs = 1.4;
    a.se = 1.0;
    a.width = 3.0;
    a.covered = true;
    const std::vector<CaseScore> one{a};
    const ScoreSummary s1 = summarize(one);
    CHECK(s1.crps == 0.7);
    CHECK(s1.logs == 1.4);
    CHECK(s1.rmse == 1.0);
    CHECK(s1.width == 3.0);
    CHECK(s1.coverage == 100.0);
    CHECK(s1.n == 1);

    CaseScore b = a;
    b.se = 9.0;
    b.covered = false;
    b.crps = 0.3;
    const std::vector<CaseScore> two{a, b};
    const ScoreSummary s2 = summarize(two);
    CHECK(s2.rmse == doctest::Approx(std::sqrt(5.0)));
    CHECK(s2.crps == doctest::Approx(0.5));
    CHECK(s2.coverage == 50.0);

    CHECK_ERROR_CODE(summarize(std::vector<CaseScore>{}), ErrorCode::EmptyInput);
}

TEST_CASE("crpss") {
    CHECK(crpss(1.0, 1.0) == 0.0);
    CHECK(crpss(0.890, 1.165) == doctest::Approx(0.236).epsilon(1e-3));
    CHECK(crpss(2.0, 1.0) == -1.0);
    CHECK_ERROR_CODE(crpss(1.0, 0.0), ErrorCode::InvalidReference);
    CHECK_ERROR_CODE(crpss(1.0, -2.0), ErrorCode::InvalidReference);
}

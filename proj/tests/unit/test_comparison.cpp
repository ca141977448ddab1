#include "comparison.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace fewnet;

namespace {

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double big_phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// P(range of k standard normals <= q) = k * integral phi(z) (Phi(z + q) - Phi(z))^(k-1) dz, Simpson's rule.
double range_cdf(double q, std::size_t k) {
    const double lo = -9.0;
    const double hi = 9.0;
    const int n = 6000;
    const double h = (hi - lo) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double z = lo + h * i;
        const double f = phi(z) * std::pow(big_phi(z + q) - big_phi(z), static_cast<double>(k - 1));
        s += f * (i == 0 || i == n ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0));
    }
    return static_cast<double>(k) * s * h / 3.0;
}

double range_quantile(std::size_t k, double alpha) {
    double lo = 0.0;
    double hi = 10.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (range_cdf(mid, k) < 1.0 - alpha ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Upper quantile of sup_{r in [mu, 1]} |B(r) - B(r - mu)| / sqrt(mu) by simulation.
double brownian_fluctuation_quantile(double mu, double alpha, std::size_t reps, std::size_t steps, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, std::sqrt(1.0 / static_cast<double>(steps)));
    const auto w = static_cast<std::size_t>(std::lround(mu * static_cast<double>(steps)));
    std::vector<double> b(steps + 1);
    std::vector<double> sups;
    for (std::size_t r = 0; r < reps; ++r) {
        b[0] = 0.0;
        for (std::size_t t = 1; t <= steps; ++t) b[t] = b[t - 1] + dist(rng);
        double sup = 0.0;
        for (std::size_t t = w; t <= steps; ++t) sup = std::max(sup, std::abs(b[t] - b[t - w]));
        sups.push_back(sup / std::sqrt(mu));
    }
    std::sort(sups.begin(), sups.end());
    return sups[static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(reps))) - 1];
}

ErrorMatrix matrix(std::vector<std::vector<double>> losses) {
    ErrorMatrix e;
    for (std::size_t i = 0; i < losses.size(); ++i) e.models.push_back("m" + std::to_string(i));
    for (std::size_t j = 0; j < losses.front().size(); ++j) e.datasets.push_back("d" + std::to_string(j));
    e.losses = std::move(losses);
    return e;
}

}  // namespace

TEST_CASE("studentized range table matches quadrature of the range distribution") {
    for (double alpha : {0.01, 0.05, 0.10}) {
        for (std::size_t k = 2; k <= 20; ++k) {
            const double oracle = range_quantile(k, alpha);
            CHECK(studentized_range_quantile(k, alpha) == doctest::Approx(oracle).epsilon(1e-5));
        }
    }
    CHECK_ERRC(studentized_range_quantile(21, 0.05), Errc::lookup);
    CHECK_ERRC(studentized_range_quantile(1, 0.05), Errc::lookup);
    CHECK_ERRC(studentized_range_quantile(5, 0.2), Errc::lookup);
}

TEST_CASE("critical distance to four significant figures") {
    const auto sig4 = [](double a, double b) { return std::abs(a - b) <= 5e-4 * std::abs(b); };
    CHECK(sig4(mcb_critical_distance(16, 8, 0.05), range_quantile(16, 0.05) * std::sqrt(16.0 * 17.0 / 48.0)));
    CHECK(sig4(mcb_critical_distance(5, 10, 0.05), range_quantile(5, 0.05) * std::sqrt(5.0 * 6.0 / 60.0)));
}

TEST_CASE("average ranks") {
    CHECK(average_ranks(std::vector<double>{3.0, 1.0, 2.0}) == std::vector<double>{3.0, 1.0, 2.0});
    CHECK(average_ranks(std::vector<double>{1.0, 1.0, 0.5, 1.0}) == std::vector<double>{3.0, 3.0, 1.0, 3.0});
    CHECK(average_ranks(std::vector<double>{2.0, 2.0}) == std::vector<double>{1.5, 1.5});
}

TEST_CASE("dominant model has mean rank one") {
    const auto r = mcb_test(matrix({{0.1, 0.5, 0.2, 1.0}, {0.3, 0.9, 0.25, 1.5}}), 0.05);
    CHECK(r.mean_rank == std::vector<double>{1.0, 2.0});
    CHECK(r.best == 0);
    CHECK(r.intervals[0].upper - r.mean_rank[0] == doctest::Approx(r.critical_distance / 2.0));
    CHECK(r.mean_rank[0] - r.intervals[0].lower == doctest::Approx(r.critical_distance / 2.0));
    CHECK(r.reference_upper == r.intervals[0].upper);
}

TEST_CASE("equal columns tie") {
    const auto r = mcb_test(matrix({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}}), 0.05);
    CHECK(r.mean_rank == std::vector<double>{2.0, 2.0, 2.0});
}

TEST_CASE("MCB flags models whose interval lies above the best") {
    std::vector<std::vector<double>> losses(4, std::vector<double>(30));
    for (std::size_t j = 0; j < 30; ++j) {
        losses[0][j] = 1.0;
        losses[1][j] = j % 2 == 0 ? 0.9 : 1.1;
        losses[2][j] = 3.0;
        losses[3][j] = 4.0;
    }
    const auto r = mcb_test(matrix(losses), 0.05);
    CHECK(r.mean_rank == std::vector<double>{1.5, 1.5, 3.0, 4.0});
    CHECK(r.best == 0);
    CHECK(r.worse_than_best == std::vector<bool>{false, false, true, true});
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(r.worse_than_best[i] == (r.intervals[i].lower > r.reference_upper));
    }
}

TEST_CASE("ranks ignore shifts of a dataset column") {
    const auto base = matrix({{0.4, 1.2, 3.0}, {0.6, 1.1, 2.0}, {0.5, 1.3, 2.5}});
    auto shifted = base;
    for (auto& row : shifted.losses) row[1] += 7.5;
    CHECK(mcb_test(shifted, 0.05).mean_rank == mcb_test(base, 0.05).mean_rank);
}

TEST_CASE("MCB input checks") {
    CHECK_ERRC(mcb_test(matrix({{1.0, 2.0}}), 0.05), Errc::domain);
    CHECK_ERRC(mcb_test(matrix({{1.0}, {2.0}}), 0.05), Errc::domain);
    auto bad = matrix({{1.0, 2.0}, {1.0, 2.0}});
    bad.losses[1].pop_back();
    CHECK_ERRC(mcb_test(bad, 0.05), Errc::shape);
    bad.losses[1] = {1.0, std::nan("")};
    CHECK_ERRC(mcb_test(bad, 0.05), Errc::shape);
}

TEST_CASE("fluctuation critical values match a Brownian-motion simulation") {
    for (double alpha : {0.05, 0.10}) {
        for (double mu : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const double sim = brownian_fluctuation_quantile(mu, alpha, 4000, 2000, 42);
            const double table = fluctuation_critical_value(mu, alpha);
            CHECK(std::abs(table - sim) < 0.05 * table);
        }
    }
    double grid = 0.0;
    CHECK(fluctuation_critical_value(0.33, 0.05, &grid) == fluctuation_critical_value(0.3, 0.05));
    CHECK(grid == doctest::Approx(0.3));
    CHECK_ERRC(fluctuation_critical_value(1.0, 0.05), Errc::window);
    CHECK_ERRC(fluctuation_critical_value(0.5, 0.01), Errc::lookup);
}

TEST_CASE("Bartlett variance matches a direct sum") {
    const auto d = test::gaussian(40, 3);
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= 40.0;
    double oracle = 0.0;
    for (long i = 0; i < 40; ++i) {
        for (long j = 0; j < 40; ++j) {
            const long lag = std::abs(i - j);
            if (lag <= 3) oracle += (1.0 - static_cast<double>(lag) / 4.0) * (d[i] - mean) * (d[j] - mean);
        }
    }
    CHECK(bartlett_variance(d, 3) == doctest::Approx(oracle / 40.0).epsilon(1e-12));
}

TEST_CASE("fluctuation statistic by direct windows") {
    const auto a = test::gaussian(60, 1, 1.0, 2.0);
    const auto b = test::gaussian(60, 2, 1.0, 2.0);
    const auto r = gr_fluctuation_test(a, b, 0.3, 0.05);
    CHECK(r.window == 18);
    REQUIRE(r.statistic.size() == 43);
    CHECK(r.window_end.front() == 17);
    CHECK(r.window_end.back() == 59);
    CHECK(!r.warning.has_value());
    for (std::size_t i = 0; i < r.statistic.size(); ++i) {
        std::vector<double> d;
        for (std::size_t t = i; t < i + 18; ++t) d.push_back(a[t] - b[t]);
        double m = 0.0;
        for (double v : d) m += v;
        m /= 18.0;
        REQUIRE(r.statistic[i].has_value());
        CHECK(*r.statistic[i] == doctest::Approx(std::sqrt(18.0) * m / std::sqrt(bartlett_variance(d, 2))).epsilon(1e-12));
    }
}

TEST_CASE("fluctuation statistic is antisymmetric and zero for identical losses") {
    const auto a = test::gaussian(80, 11);
    const auto b = test::gaussian(80, 12);
    const auto ab = gr_fluctuation_test(a, b, 0.25, 0.10);
    const auto ba = gr_fluctuation_test(b, a, 0.25, 0.10);
    REQUIRE(ab.statistic.size() == ba.statistic.size());
    for (std::size_t i = 0; i < ab.statistic.size(); ++i) CHECK(*ab.statistic[i] == -*ba.statistic[i]);
    CHECK(ab.warning.has_value());

    const auto same = gr_fluctuation_test(a, a, 0.5, 0.05);
    for (const auto& s : same.statistic) CHECK(s == std::optional<double>(0.0));
}

TEST_CASE("zero-variance windows are missing, not errors") {
    std::vector<double> a(30, 1.0);
    const std::vector<double> b(30, 0.0);
    const auto r = gr_fluctuation_test(a, b, 0.2, 0.05);
    for (const auto& s : r.statistic) CHECK(!s.has_value());
    CHECK(!r.rejects_everywhere());
}

TEST_CASE("fluctuation test detects a uniformly better model") {
    int detected = 0;
    for (std::uint64_t s = 0; s < 500; ++s) {
        const auto b = test::gaussian(100, 2 * s + 1, 1.0, 3.0);
        const auto noise = test::gaussian(100, 2 * s + 2, 0.1);
        std::vector<double> a(100);
        for (std::size_t t = 0; t < 100; ++t) a[t] = b[t] + 1.0 + noise[t];
        const auto r = gr_fluctuation_test(a, b, 0.3, 0.05);
        bool all = true;
        for (const auto& st : r.statistic) all = all && st && *st > r.critical_value;
        if (all) ++detected;
    }
    CHECK(detected >= 475);
}

TEST_CASE("fluctuation input checks") {
    const auto a = test::gaussian(10, 1);
    CHECK_ERRC(gr_fluctuation_test(a, a, 0.1, 0.05), Errc::window);
    CHECK_ERRC(gr_fluctuation_test(a, test::gaussian(9, 1), 0.5, 0.05), Errc::shape);
    CHECK_ERRC(gr_fluctuation_test(a, a, 1.0, 0.05), Errc::window);
}

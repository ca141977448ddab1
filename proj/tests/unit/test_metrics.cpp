#include "metrics.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace fewnet;

namespace {

struct Fixture {
    std::vector<double> train;
    std::vector<double> actual;
    std::vector<double> forecast;
    std::vector<double> naive;
};

Fixture random_fixture(std::uint64_t seed, std::size_t m = 12) {
    Fixture f;
    f.train = test::uniform(60, seed, 2.0, 9.0);
    f.actual = test::uniform(m, seed + 1, 2.0, 9.0);
    f.forecast = test::uniform(m, seed + 2, 2.0, 9.0);
    f.naive.assign(m, f.train.back());
    return f;
}

std::vector<double> scaled(std::vector<double> v, double c) {
    for (auto& x : v) x *= c;
    return v;
}

double hand_median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("perfect forecast scores zero") {
    const auto f = random_fixture(1);
    const auto r = compute_metrics(f.actual, f.actual, f.train, 1, f.naive);
    CHECK(r.rmse == 0.0);
    CHECK(r.smape_percent == 0.0);
    CHECK(r.theils_u1 == 0.0);
    REQUIRE(r.mase.has_value());
    CHECK(*r.mase == 0.0);
    REQUIRE(r.mdape.has_value());
    CHECK(*r.mdape == 0.0);
    REQUIRE(r.mdrae.has_value());
    CHECK(*r.mdrae == 0.0);
}

TEST_CASE("two-point hand example") {
    const std::vector<double> y{2.0, 4.0};
    const std::vector<double> f{1.0, 5.0};
    CHECK(std::abs(rmse(y, f) - 1.0) < 1e-12);
    CHECK(std::abs(smape_percent(y, f) - 100.0 * (1.0 / 1.5 + 1.0 / 4.5) / 2.0) < 1e-12);
    CHECK(std::abs(smape_percent(y, f) - 44.444444) < 1e-6);
    CHECK(std::abs(theils_u1(y, f) - 1.0 / (std::sqrt(10.0) * std::sqrt(13.0))) < 1e-12);
    CHECK(std::abs(theils_u1(y, f) - 0.0877058) < 1e-6);
    CHECK(std::abs(mdape(y, f) - 100.0 * (0.5 + 0.25) / 2.0) < 1e-12);
}

TEST_CASE("metrics match explicit loops") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto f = random_fixture(10 * s + 3, 7 + s % 4);
        const std::size_t m = f.actual.size();
        double se = 0.0;
        double sm = 0.0;
        double ay = 0.0;
        double af = 0.0;
        double ae = 0.0;
        std::vector<double> rae;
        std::vector<double> ape;
        for (std::size_t t = 0; t < m; ++t) {
            const double e = f.actual[t] - f.forecast[t];
            se += e * e;
            sm += std::abs(e) / ((std::abs(f.actual[t]) + std::abs(f.forecast[t])) / 2.0);
            ay += f.actual[t] * f.actual[t];
            af += f.forecast[t] * f.forecast[t];
            ae += std::abs(e);
            rae.push_back(std::abs(e) / (f.actual[t] - f.naive[t]));
            ape.push_back(std::abs(e) / f.actual[t]);
        }
        const double md = static_cast<double>(m);
        double scale = 0.0;
        for (std::size_t t = 3; t < f.train.size(); ++t) scale += std::abs(f.train[t] - f.train[t - 3]);
        const double mase_oracle = ae / ((md / static_cast<double>(f.train.size() - 3)) * scale);

        const auto r = compute_metrics(f.actual, f.forecast, f.train, 3, f.naive);
        CHECK(r.rmse == doctest::Approx(std::sqrt(se / md)).epsilon(1e-12));
        CHECK(r.smape_percent == doctest::Approx(100.0 * sm / md).epsilon(1e-12));
        CHECK(r.theils_u1 == doctest::Approx(std::sqrt(se / md) / (std::sqrt(ay / md) * std::sqrt(af / md))).epsilon(1e-12));
        CHECK(*r.mase == doctest::Approx(mase_oracle).epsilon(1e-12));
        CHECK(*r.mdrae == doctest::Approx(hand_median(rae)).epsilon(1e-12));
        CHECK(*r.mdape == doctest::Approx(100.0 * hand_median(ape)).epsilon(1e-12));
        CHECK(r.undefined.empty());
        CHECK(r.smape_percent >= 0.0);
        CHECK(r.smape_percent <= 200.0);
        CHECK(r.theils_u1 >= 0.0);
    }
}

TEST_CASE("scale equivariance") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto f = random_fixture(100 + s);
        const double c = 0.1 + 3.0 * static_cast<double>(s);
        const auto a = compute_metrics(f.actual, f.forecast, f.train, 1, f.naive);
        const auto b = compute_metrics(scaled(f.actual, c), scaled(f.forecast, c), scaled(f.train, c), 1,
                                       scaled(f.naive, c));
        CHECK(b.rmse == doctest::Approx(c * a.rmse).epsilon(1e-12));
        CHECK(b.smape_percent == doctest::Approx(a.smape_percent).epsilon(1e-12));
        CHECK(*b.mase == doctest::Approx(*a.mase).epsilon(1e-12));
        CHECK(*b.mdrae == doctest::Approx(*a.mdrae).epsilon(1e-12));
        CHECK(*b.mdape == doctest::Approx(*a.mdape).epsilon(1e-12));
        // The product normalization RMSE / (sqrt(mean y^2) sqrt(mean f^2)) is homogeneous of degree -1.
        CHECK(b.theils_u1 == doctest::Approx(a.theils_u1 / c).epsilon(1e-12));
    }
}

TEST_CASE("permutation invariance over time indices") {
    std::mt19937_64 rng(5);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto f = random_fixture(200 + s, 9);
        std::vector<std::size_t> order(9);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        Fixture g = f;
        for (std::size_t i = 0; i < 9; ++i) {
            g.actual[i] = f.actual[order[i]];
            g.forecast[i] = f.forecast[order[i]];
            g.naive[i] = f.naive[order[i]];
        }
        const auto a = compute_metrics(f.actual, f.forecast, f.train, 1, f.naive);
        const auto b = compute_metrics(g.actual, g.forecast, g.train, 1, g.naive);
        CHECK(b.rmse == doctest::Approx(a.rmse).epsilon(1e-12));
        CHECK(b.smape_percent == doctest::Approx(a.smape_percent).epsilon(1e-12));
        CHECK(b.theils_u1 == doctest::Approx(a.theils_u1).epsilon(1e-12));
        CHECK(*b.mase == doctest::Approx(*a.mase).epsilon(1e-12));
        CHECK(*b.mdrae == *a.mdrae);
        CHECK(*b.mdape == *a.mdape);
    }
}

TEST_CASE("undefined metrics are reported without blocking the others") {
    const std::vector<double> flat(24, 3.0);
    const std::vector<double> y{3.5, 2.0, 0.0};
    const std::vector<double> f{3.0, 2.5, 0.5};
    const std::vector<double> naive(3, 3.0);
    const auto r = compute_metrics(y, f, flat, 1, naive);
    CHECK(!r.mase.has_value());
    CHECK(!r.mdape.has_value());
    REQUIRE(r.mdrae.has_value());
    CHECK(r.undefined.size() == 2);
    CHECK(r.rmse > 0.0);
    CHECK_ERRC(r.get("mase"), Errc::metric_undefined);
    CHECK_ERRC(r.get("mape"), Errc::lookup);
    CHECK(r.get("rmse") == r.rmse);

    CHECK_ERRC(mase(y, f, flat, 1), Errc::metric_undefined);
    CHECK_ERRC(mdape(y, f), Errc::metric_undefined);
    CHECK_ERRC(mdrae(std::vector<double>{3.0}, std::vector<double>{1.0}, std::vector<double>{3.0}), Errc::metric_undefined);
    CHECK_ERRC(compute_metrics(y, f, std::vector<double>{1.0}, 1, naive), Errc::bounds);
    CHECK_ERRC(rmse(y, std::vector<double>{1.0}), Errc::shape);
}

TEST_CASE("SMAPE counts a zero-over-zero term as zero") {
    CHECK(smape_percent(std::vector<double>{0.0, 2.0}, std::vector<double>{0.0, 2.0}) == 0.0);
    CHECK(smape_percent(std::vector<double>{0.0, 2.0}, std::vector<double>{1.0, 2.0}) == doctest::Approx(100.0));
}

TEST_CASE("empirical risk") {
    const auto y = test::gaussian(50, 9);
    CHECK(empirical_risk(y, y) == 0.0);
    auto shifted = y;
    for (auto& v : shifted) v += 0.75;
    CHECK(empirical_risk(shifted, y) == doctest::Approx(0.5625).epsilon(1e-12));
    const auto p = test::gaussian(50, 10);
    double loop = 0.0;
    for (std::size_t t = 0; t < 50; ++t) loop += (y[t] - p[t]) * (y[t] - p[t]);
    CHECK(empirical_risk(p, y) == doctest::Approx(loop / 50.0).epsilon(1e-12));
}

TEST_CASE("median") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto v = test::gaussian(5 + s, s);
        CHECK(median(v) == hand_median(v));
    }
    CHECK_ERRC(median({}), Errc::shape);
}

#include "econ_filters.hpp"
#include "test_support.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>

using namespace fewnet;
using fewnet::test::max_abs_diff;

namespace {

Eigen::MatrixXd second_difference(std::size_t n) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n - 2), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        d(i, i) = 1.0;
        d(i, i + 1) = -2.0;
        d(i, i + 2) = 1.0;
    }
    return d;
}

std::vector<double> dense_hp(const std::vector<double>& y, double lambda) {
    const auto n = static_cast<Eigen::Index>(y.size());
    const Eigen::MatrixXd d = second_difference(y.size());
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) + lambda * d.transpose() * d;
    const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
    const Eigen::VectorXd tau = a.fullPivLu().solve(b);
    return {tau.data(), tau.data() + n};
}

// CF weights of row t (0-based) written out term by term.
std::vector<double> oracle_cf_row(std::size_t n, std::size_t t0, double pl, double pu) {
    const double pi = std::numbers::pi;
    const double a = 2.0 * pi / pu;
    const double b = 2.0 * pi / pl;
    const auto phi = [&](std::size_t j) {
        return j == 0 ? (b - a) / pi : (std::sin(b * j) - std::sin(a * j)) / (pi * static_cast<double>(j));
    };
    const auto tail = [&](std::size_t k) {
        double s = -phi(0) / 2.0;
        for (std::size_t j = 1; j < k; ++j) s -= phi(j);
        return s;
    };
    const std::size_t T = n;
    const std::size_t t = t0 + 1;
    std::vector<double> w(n, 0.0);
    w[t - 1] += phi(0);
    for (std::size_t j = 1; j + t < T; ++j) w[t + j - 1] += phi(j);
    w[T - 1] += tail(T - t);
    for (std::size_t j = 1; j + 2 <= t; ++j) w[t - j - 1] += phi(j);
    w[0] += tail(t - 1);
    return w;
}

double amplitude_response(const std::vector<double>& w, std::size_t t, double period) {
    const double omega = 2.0 * std::numbers::pi / period;
    std::complex<double> h = 0.0;
    for (std::size_t s = 0; s < w.size(); ++s) {
        h += w[s] * std::polar(1.0, omega * (static_cast<double>(s) - static_cast<double>(t)));
    }
    return std::abs(h);
}

std::vector<double> sinusoid(std::size_t n, double period, double phase = 0.3) {
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) x[t] = std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period + phase);
    return x;
}

double mid_amplitude(const std::vector<double>& c, std::size_t from, std::size_t to) {
    double m = 0.0;
    for (std::size_t t = from; t < to; ++t) m = std::max(m, std::abs(c[t]));
    return m;
}

}  // namespace

TEST_CASE("HP with zero penalty returns the series") {
    const auto y = test::gaussian(30, 4);
    const auto r = hp_filter(y, 0.0);
    CHECK(max_abs_diff(r.trend, y) < 1e-14);
    CHECK(test::max_abs(r.cycle) < 1e-14);
}

TEST_CASE("HP leaves a straight line untouched") {
    std::vector<double> y(100);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] = 2.5 - 0.37 * static_cast<double>(t);
    for (double lambda : {1.0, 1600.0, 129600.0, 1e8}) {
        const auto r = hp_filter(y, lambda);
        CHECK(test::max_abs(r.cycle) < 1e-10);
    }
}

TEST_CASE("HP length-5 example matches a dense solve") {
    const std::vector<double> y{1, 3, 2, 5, 4};
    const auto r = hp_filter(y, 10.0);
    CHECK(max_abs_diff(r.trend, dense_hp(y, 10.0)) < 1e-10);
    CHECK(r.lambda == 10.0);
}

TEST_CASE("HP matches dense solves and satisfies the normal equations") {
    for (std::size_t n : {4u, 7u, 40u, 150u}) {
        const auto y = test::gaussian(n, n, 3.0);
        for (double lambda : {0.5, 100.0, 129600.0}) {
            const auto r = hp_filter(y, lambda);
            CHECK(max_abs_diff(r.trend, dense_hp(y, lambda)) < 1e-8 * (1.0 + test::max_abs(y)));
            for (std::size_t t = 0; t < n; ++t) CHECK(r.trend[t] == y[t] - r.cycle[t]);
            const Eigen::MatrixXd d = second_difference(n);
            const auto en = static_cast<Eigen::Index>(n);
            const Eigen::VectorXd tau = Eigen::Map<const Eigen::VectorXd>(r.trend.data(), en);
            const Eigen::VectorXd yy = Eigen::Map<const Eigen::VectorXd>(y.data(), en);
            const Eigen::VectorXd resid = tau + lambda * (d.transpose() * (d * tau)) - yy;
            CHECK(resid.cwiseAbs().maxCoeff() < 1e-8);
        }
    }
}

TEST_CASE("HP approaches the OLS line as lambda grows") {
    const std::size_t n = 200;
    const auto noise = test::uniform(n, 17, -1.0, 1.0);
    std::vector<double> y(n);
    for (std::size_t t = 0; t < n; ++t) y[t] = 1.0 + 0.05 * static_cast<double>(t) + noise[t];
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd yy(n);
    for (std::size_t t = 0; t < n; ++t) {
        x(static_cast<Eigen::Index>(t), 0) = 1.0;
        x(static_cast<Eigen::Index>(t), 1) = static_cast<double>(t);
        yy(static_cast<Eigen::Index>(t)) = y[t];
    }
    const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(yy);
    const auto r = hp_filter(y, 1e12);
    double worst = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        worst = std::max(worst, std::abs(r.trend[t] - (beta(0) + beta(1) * static_cast<double>(t))));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("HP argument checks") {
    CHECK_ERRC(hp_filter(std::vector<double>{1, 2, 3}, 1.0), Errc::domain);
    CHECK_ERRC(hp_filter(std::vector<double>{1, 2, 3, 4}, -1.0), Errc::domain);
}

TEST_CASE("CF weights follow the term-by-term construction") {
    for (std::size_t n : {8u, 13u, 60u}) {
        for (std::size_t t = 0; t < n; ++t) {
            const auto w = cf_weights(n, t, 18.0, 96.0);
            CHECK(max_abs_diff(w, oracle_cf_row(n, t, 18.0, 96.0)) < 1e-13);
            double sum = 0.0;
            for (double x : w) sum += x;
            CHECK(std::abs(sum) < 1e-12);
        }
    }
}

TEST_CASE("CF removes constants") {
    for (double c : {0.0, 1.0, -7.5, 1234.0}) {
        const auto r = cf_filter(std::vector<double>(120, c));
        CHECK(test::max_abs(r.cycle) < 1e-8);
        CHECK(r.lower_period == 18.0);
        CHECK(r.upper_period == 96.0);
    }
}

TEST_CASE("CF keeps in-band and damps out-of-band cycles") {
    const std::size_t n = 480;
    const std::size_t mid = n / 2;
    const auto w = cf_weights(n, mid, 18.0, 96.0);

    const auto in_band = sinusoid(n, 24.0);
    const auto cin = cf_filter(in_band, 18.0, 96.0).cycle;
    const double response24 = amplitude_response(w, mid, 24.0);
    CHECK(std::abs(response24 - 1.0) < 0.05);
    CHECK(std::abs(mid_amplitude(cin, 180, 300) - 1.0) < 0.05);

    const auto out_band = sinusoid(n, 4.0);
    const auto cout = cf_filter(out_band, 18.0, 96.0).cycle;
    const double response4 = amplitude_response(w, mid, 4.0);
    CHECK(response4 < 0.10);
    CHECK(mid_amplitude(cout, 180, 300) < 0.10);

    // the response at a mid-sample point predicts the filtered value there
    const double predicted = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += w[i] * in_band[i];
        return s;
    }();
    CHECK(cin[mid] == doctest::Approx(predicted).epsilon(1e-12));
}

TEST_CASE("CF is linear") {
    const auto x = test::gaussian(90, 1);
    const auto y = test::gaussian(90, 2);
    std::vector<double> z(90);
    for (std::size_t t = 0; t < z.size(); ++t) z[t] = 2.5 * x[t] - 0.75 * y[t];
    const auto cx = cf_filter(x).cycle;
    const auto cy = cf_filter(y).cycle;
    const auto cz = cf_filter(z).cycle;
    for (std::size_t t = 0; t < z.size(); ++t) CHECK(std::abs(cz[t] - (2.5 * cx[t] - 0.75 * cy[t])) < 1e-10);
}

TEST_CASE("CF argument checks") {
    const std::vector<double> x(20, 1.0);
    CHECK_ERRC(cf_filter(x, 1.5, 10.0), Errc::domain);
    CHECK_ERRC(cf_filter(x, 10.0, 10.0), Errc::domain);
    CHECK_ERRC(cf_filter(std::vector<double>(7, 1.0)), Errc::domain);
}

TEST_CASE("build_exogenous assembles six filtered columns") {
    const std::size_t n = 60;
    const TimeSeries cpi({2003, 1}, test::gaussian(n, 1, 1.0, 5.0));
    const TimeSeries epu({2003, 1}, test::gaussian(n, 2, 0.1, 2.0));
    const TimeSeries gprc({2003, 1}, test::gaussian(n, 3, 0.05, 0.3));
    EconFilterOptions opt{1600.0, 12.0, 48.0};
    const auto f = build_exogenous(cpi, epu, gprc, opt);
    CHECK(f.start == YearMonth{2003, 1});
    CHECK(f.columns.size() == 6);
    for (const auto& c : f.columns) CHECK(c.size() == n);
    CHECK(f.columns[0] == hp_filter(cpi.view(), 1600.0).trend);
    CHECK(f.columns[1] == hp_filter(epu.view(), 1600.0).trend);
    CHECK(f.columns[2] == hp_filter(gprc.view(), 1600.0).trend);
    CHECK(f.columns[3] == cf_filter(cpi.view(), 12.0, 48.0).cycle);
    CHECK(f.columns[4] == cf_filter(epu.view(), 12.0, 48.0).cycle);
    CHECK(f.columns[5] == cf_filter(gprc.view(), 12.0, 48.0).cycle);
    const auto rm = f.row_major();
    CHECK(rm.size() == n * 6);
    const auto row = f.row(7);
    for (std::size_t k = 0; k < 6; ++k) {
        CHECK(rm[7 * 6 + k] == f.columns[k][7]);
        CHECK(row[k] == f.columns[k][7]);
    }
}

TEST_CASE("build_exogenous on constants") {
    const std::size_t n = 40;
    const auto f = build_exogenous(TimeSeries({2003, 1}, std::vector<double>(n, 4.0)),
                                   TimeSeries({2003, 1}, std::vector<double>(n, 2.0)),
                                   TimeSeries({2003, 1}, std::vector<double>(n, 0.5)));
    for (std::size_t t = 0; t < n; ++t) {
        CHECK(f.columns[0][t] == doctest::Approx(4.0).epsilon(1e-9));
        CHECK(f.columns[1][t] == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(f.columns[2][t] == doctest::Approx(0.5).epsilon(1e-9));
        for (std::size_t k = 3; k < 6; ++k) CHECK(std::abs(f.columns[k][t]) < 1e-8);
    }
}

TEST_CASE("build_exogenous rejects misaligned inputs") {
    const TimeSeries a({2003, 1}, std::vector<double>(30, 1.0));
    const TimeSeries b({2003, 2}, std::vector<double>(30, 1.0));
    const TimeSeries c({2003, 1}, std::vector<double>(29, 1.0));
    CHECK_ERRC(build_exogenous(a, b, a), Errc::shape);
    CHECK_ERRC(build_exogenous(a, a, c), Errc::shape);
}

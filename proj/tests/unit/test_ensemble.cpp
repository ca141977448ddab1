#include "ensemble.hpp"
#include "metrics.hpp"
#include "seed.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace fewnet;

namespace {

FewnetData fixture(std::size_t months) {
    const auto cpi = load_csv(test::data_path("cpi_inflation.csv"), "date", "value");
    const auto epu = log_transform(load_csv(test::data_path("epu.csv"), "date", "value"));
    const auto gprc = load_csv(test::data_path("gprc.csv"), "date", "value");
    return FewnetData{cpi, epu, gprc}.slice(0, months);
}

FewnetConfig quick(std::vector<std::size_t> grid, std::uint64_t seed = 3) {
    FewnetConfig c;
    c.p_grid = std::move(grid);
    c.training.epochs = 30;
    c.training.restarts = 2;
    c.seed = seed;
    return c;
}

FewnetData constant_data(std::size_t n, double c) {
    return FewnetData{TimeSeries({2003, 1}, std::vector<double>(n, c)),
                      TimeSeries({2003, 1}, std::vector<double>(n, 2.0)),
                      TimeSeries({2003, 1}, std::vector<double>(n, 0.3))};
}

}  // namespace

TEST_CASE("hidden size rounds half to even") {
    CHECK(hidden_size(7) == 4);
    CHECK(hidden_size(1) == 1);
    CHECK(hidden_size(18) == 10);  // 9.5 -> 10
    CHECK(hidden_size(2) == 2);    // 1.5 -> 2
    CHECK(hidden_size(4) == 2);    // 2.5 -> 2
    CHECK(hidden_size(6) == 4);    // 3.5 -> 4
    CHECK(hidden_size(24) == 12);  // 12.5 -> 12
    for (std::size_t p = 1; p <= 40; ++p) {
        const double exact = (static_cast<double>(p) + 1.0) / 2.0;
        CHECK(hidden_size(p) == static_cast<std::size_t>(std::nearbyint(exact)));
    }
}

TEST_CASE("default grids") {
    const auto with = default_p_grid(6);
    CHECK(with.front() == 7);
    CHECK(with.back() == 24);
    CHECK(with.size() == 18);
    const auto without = default_p_grid(0);
    CHECK(without.front() == 1);
    CHECK(without.size() == 24);
    FewnetConfig c;
    CHECK(c.grid() == with);
    c.use_econ_filters = false;
    CHECK(c.grid() == without);
}

TEST_CASE("config checks") {
    auto c = quick({6, 8});
    CHECK_ERRC(c.validate(), Errc::domain);
    c.p_grid = {8};
    c.wavelet = "morlet";
    CHECK_ERRC(c.validate(), Errc::lookup);
    c.wavelet = "la8";
    c.zero_detail_levels = {0};
    CHECK_ERRC(c.validate(), Errc::domain);
}

TEST_CASE("203 training months give five levels and six networks") {
    const auto data = fixture(203);
    const auto m = fit(data, quick({8}));
    CHECK(m.levels == 5);
    CHECK(m.components.size() == 6);
    CHECK(m.p == 8);
    CHECK(m.q == 4);
    CHECK(m.n_exog() == 6);
    CHECK(m.lags() == 2);
    for (std::size_t k = 0; k < m.components.size(); ++k) {
        const auto d = m.component_design(k);
        CHECK(d.width() == 8);
        CHECK(d.exog_count == 6);
        CHECK(m.components[k].config.seed == derive_seed(3, "component", k));
    }
}

TEST_CASE("filterless variant feeds pure lags") {
    const auto data = fixture(120);
    auto c = quick({5});
    c.use_econ_filters = false;
    const auto m = fit(FewnetData{data.target, std::nullopt, std::nullopt}, c);
    CHECK(!m.exog.has_value());
    for (std::size_t k = 0; k < m.components.size(); ++k) {
        const auto d = m.component_design(k);
        CHECK(d.lag_count == 5);
        CHECK(d.exog_count == 0);
    }
    CHECK_ERRC(fit(FewnetData{data.target, std::nullopt, std::nullopt}, quick({8})), Errc::shape);
}

TEST_CASE("ensemble forecast is the sum of component forecasts") {
    const auto m = fit(fixture(150), quick({8}));
    const auto parts = forecast_components(m, 24);
    const auto total = forecast(m, 24);
    REQUIRE(parts.size() == m.components.size());
    for (std::size_t h = 0; h < 24; ++h) {
        double s = 0.0;
        for (const auto& p : parts) s += p[h];
        CHECK(total[h] == s);
    }
}

TEST_CASE("24-step forecast equals chained one-step predictions") {
    const auto m = fit(fixture(150), quick({9}));
    const auto f = forecast(m, 24);
    const auto last = m.exog->row(m.exog->rows - 1);
    const std::vector<double> frozen(last.begin(), last.end());
    std::vector<std::vector<double>> histories;
    for (std::size_t k = 0; k < m.components.size(); ++k) {
        const auto s = m.component_series(k);
        histories.emplace_back(s.begin(), s.end());
    }
    for (std::size_t h = 0; h < 24; ++h) {
        double total = 0.0;
        for (std::size_t k = 0; k < m.components.size(); ++k) {
            auto& hist = histories[k];
            std::vector<double> window(m.lags());
            for (std::size_t j = 0; j < window.size(); ++j) window[j] = hist[hist.size() - 1 - j];
            const double v = predict_one(m.components[k], window, frozen);
            hist.push_back(v);
            total += v;
        }
        CHECK(f[h] == total);
    }
}

TEST_CASE("supplied future exogenous rows replace the frozen row after step 1") {
    const auto m = fit(fixture(150), quick({8}));
    const std::size_t horizon = 4;
    const auto future = test::gaussian(horizon * 6, 5);
    const auto with_path = forecast(m, horizon, future);
    const auto frozen = forecast(m, horizon);
    CHECK(with_path[0] == frozen[0]);
    CHECK(with_path[1] != frozen[1]);
}

TEST_CASE("zeroed detail levels forecast zero") {
    auto c = quick({8});
    c.zero_detail_levels = {1, 2};
    const auto m = fit(fixture(150), c);
    const auto parts = forecast_components(m, 6);
    CHECK(parts[0] == std::vector<double>(6, 0.0));
    CHECK(parts[1] == std::vector<double>(6, 0.0));
    CHECK(parts[2] != std::vector<double>(6, 0.0));
}

TEST_CASE("constant target forecasts the constant") {
    auto c = quick({8});
    c.training.epochs = 300;
    const auto m = fit(constant_data(120, 6.5), c);
    for (double v : forecast(m, 12)) CHECK(std::abs(v - 6.5) < 1e-3);
}

TEST_CASE("select_p with a single candidate skips cross-validation") {
    const auto m = fit(fixture(150), quick({11}));
    CHECK(m.p == 11);
    REQUIRE(m.selection.candidates.size() == 1);
    CHECK(m.selection.candidates[0].fold_smape.empty());
}

TEST_CASE("select_p returns the argmin of the per-candidate table") {
    const auto data = fixture(140);
    auto c = quick({7, 10, 13}, 17);
    c.cv_folds = 3;
    c.cv_horizon = 6;
    const auto folds = rolling_origin_folds(data.target.size(), 3, 6);
    const auto sel = select_p(data, c, folds);

    std::vector<double> table;
    for (std::size_t p : c.p_grid) {
        double sum = 0.0;
        for (std::size_t f = 0; f < folds.folds.size(); ++f) {
            const auto& fold = folds.folds[f];
            auto fc = c;
            fc.seed = derive_seed(c.seed, "fold", f);
            const auto m = fit_fixed(data.slice(fold.train.begin, fold.train.size()), fc, p);
            const auto pred = forecast(m, fold.validation.size());
            const auto actual = data.target.view().subspan(fold.validation.begin, fold.validation.size());
            sum += smape_percent(actual, pred);
        }
        table.push_back(sum / static_cast<double>(folds.folds.size()));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < table.size(); ++i) {
        if (table[i] < table[best]) best = i;
    }
    CHECK(sel.p == c.p_grid[best]);
    REQUIRE(sel.candidates.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(sel.candidates[i].mean_smape.has_value());
        CHECK(*sel.candidates[i].mean_smape == doctest::Approx(table[i]).epsilon(1e-12));
    }
}

TEST_CASE("select_p breaks ties toward the smaller p") {
    auto c = quick({9, 7, 8});
    c.training.epochs = 500;
    c.training.restarts = 1;
    c.zero_detail_levels = {1, 2, 3, 4, 5, 6};
    const auto data = constant_data(120, 1000.0);
    const auto sel = select_p(data, c, rolling_origin_folds(120, 2, 6));
    REQUIRE(sel.candidates[0].mean_smape.has_value());
    const double first = *sel.candidates[0].mean_smape;
    CHECK(first < 1e-10);
    for (const auto& cand : sel.candidates) {
        REQUIRE(cand.mean_smape.has_value());
        CHECK(*cand.mean_smape == first);
    }
    CHECK(sel.p == 7);
}

TEST_CASE("select_p skips failing candidates and fails when all fail") {
    auto c = quick({3, 20});
    c.use_econ_filters = false;
    const auto data = fixture(40);
    const FewnetData plain{data.target, std::nullopt, std::nullopt};
    const auto folds = rolling_origin_folds(40, 2, 12);
    const auto sel = select_p(plain, c, folds);
    CHECK(sel.p == 3);
    CHECK(!sel.candidates[1].mean_smape.has_value());
    CHECK(!sel.candidates[1].failure.empty());

    c.p_grid = {20, 22};
    CHECK_ERRC(select_p(plain, c, folds), Errc::selection);
}

TEST_CASE("fit is deterministic and independent of thread count") {
    const auto data = fixture(130);
    auto c = quick({7, 9});
    c.cv_folds = 2;
    c.cv_horizon = 6;
    const auto a = serialize(fit(data, c));
    CHECK(serialize(fit(data, c)) == a);
    c.threads = 4;
    CHECK(serialize(fit(data, c)) == a);
}

TEST_CASE("later observations never reach the fit") {
    const auto full = fixture(160);
    auto c = quick({8});
    const auto a = fit(full.slice(0, 130), c);
    auto altered_target = full.target.values();
    for (std::size_t t = 130; t < altered_target.size(); ++t) altered_target[t] += 100.0;
    const FewnetData altered{TimeSeries(full.target.start(), altered_target), full.log_epu, full.gprc};
    const auto b = fit(altered.slice(0, 130), c);
    CHECK(serialize(a) == serialize(b));
    CHECK(forecast(a, 12) == forecast(b, 12));
}

TEST_CASE("empirical risk of the ensemble") {
    const auto m = fit(fixture(150), quick({8}));
    const auto in = ensemble_in_sample(m);
    CHECK(in.first_row == m.lags());
    REQUIRE(in.predicted.size() == 150 - m.lags());
    double direct = 0.0;
    for (std::size_t r = 0; r < in.actual.size(); ++r) {
        const double e = in.actual[r] - in.predicted[r];
        direct += e * e;
    }
    direct /= static_cast<double>(in.actual.size());
    const double risk = empirical_risk_w(m);
    // sum of component residuals equals the ensemble residual up to the MRA identity
    CHECK(risk == doctest::Approx(direct).epsilon(1e-8));
    CHECK(risk > 0.0);

}

TEST_CASE("raw comparator risk uses the same rows and settings") {
    const auto data = fixture(150);
    auto c = quick({8});
    const double raw = empirical_risk_raw(data, c, 8);
    CHECK(std::isfinite(raw));
    CHECK(raw > 0.0);
    CHECK(empirical_risk_raw(data, c, 8) == raw);
}

TEST_CASE("model bundles round trip") {
    const auto m = fit(fixture(150), quick({8}));
    const auto text = serialize(m);
    const auto back = deserialize_fewnet(text);
    CHECK(serialize(back) == text);
    CHECK(forecast(back, 24) == forecast(m, 24));
    CHECK(empirical_risk_w(back) == empirical_risk_w(m));
    CHECK_ERRC(deserialize_fewnet("fewnet 9\n"), Errc::format);
    CHECK_ERRC(deserialize_fewnet(text.substr(0, 200)), Errc::format);
}

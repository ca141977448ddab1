#include "metrics.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>

namespace fewnet {

namespace {

void check_aligned(std::span<const double> a, std::span<const double> b, const char* what) {
    if (a.size() != b.size()) {
        throw Error(Errc::shape, std::string(what) + ": lengths differ (" + std::to_string(a.size()) + " vs " +
                                     std::to_string(b.size()) + ")");
    }
    if (a.empty()) throw Error(Errc::shape, std::string(what) + ": empty input");
}

double mean_square(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s / static_cast<double>(v.size());
}

}  // namespace

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names{"rmse", "mase", "smape", "theils_u1", "mdrae", "mdape"};
    return names;
}

double MetricReport::get(std::string_view name) const {
    const auto require = [&](const std::optional<double>& v) {
        if (!v) throw Error(Errc::metric_undefined, std::string(name) + " is undefined for this forecast");
        return *v;
    };
    if (name == "rmse") return rmse;
    if (name == "mase") return require(mase);
    if (name == "smape") return smape_percent;
    if (name == "theils_u1") return theils_u1;
    if (name == "mdrae") return require(mdrae);
    if (name == "mdape") return require(mdape);
    throw Error(Errc::lookup, "unknown metric '" + std::string(name) + "'");
}

double median(std::vector<double> values) {
    if (values.empty()) throw Error(Errc::shape, "median of an empty set");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

double rmse(std::span<const double> actual, std::span<const double> forecast) {
    check_aligned(actual, forecast, "rmse");
    double s = 0.0;
    for (std::size_t t = 0; t < actual.size(); ++t) {
        const double e = actual[t] - forecast[t];
        s += e * e;
    }
    return std::sqrt(s / static_cast<double>(actual.size()));
}

double smape_percent(std::span<const double> actual, std::span<const double> forecast) {
    check_aligned(actual, forecast, "smape");
    double s = 0.0;
    for (std::size_t t = 0; t < actual.size(); ++t) {
        const double den = (std::abs(forecast[t]) + std::abs(actual[t])) / 2.0;
        if (den > 0.0) s += std::abs(forecast[t] - actual[t]) / den;
    }
    return 100.0 * s / static_cast<double>(actual.size());
}

double theils_u1(std::span<const double> actual, std::span<const double> forecast) {
    const double num = rmse(actual, forecast);
    if (num == 0.0) return 0.0;
    return num / (std::sqrt(mean_square(actual)) * std::sqrt(mean_square(forecast)));
}

double mase(std::span<const double> actual, std::span<const double> forecast, std::span<const double> train,
            std::size_t seasonal_lag) {
    check_aligned(actual, forecast, "mase");
    if (seasonal_lag < 1 || train.size() <= seasonal_lag) {
        throw Error(Errc::bounds, "mase: training length must exceed the seasonal lag");
    }
    double scale = 0.0;
    for (std::size_t t = seasonal_lag; t < train.size(); ++t) scale += std::abs(train[t] - train[t - seasonal_lag]);
    scale /= static_cast<double>(train.size() - seasonal_lag);
    if (scale == 0.0) throw Error(Errc::metric_undefined, "mase: training series has no variation at the seasonal lag");
    double mae = 0.0;
    for (std::size_t t = 0; t < actual.size(); ++t) mae += std::abs(forecast[t] - actual[t]);
    mae /= static_cast<double>(actual.size());
    return mae / scale;
}

double mdrae(std::span<const double> actual, std::span<const double> forecast, std::span<const double> naive) {
    check_aligned(actual, forecast, "mdrae");
    check_aligned(actual, naive, "mdrae");
    std::vector<double> r(actual.size());
    for (std::size_t t = 0; t < actual.size(); ++t) {
        const double den = actual[t] - naive[t];
        if (den == 0.0) {
            throw Error(Errc::metric_undefined, "mdrae: naive forecast equals the actual at step " + std::to_string(t + 1));
        }
        r[t] = std::abs(actual[t] - forecast[t]) / den;
    }
    return median(std::move(r));
}

double mdape(std::span<const double> actual, std::span<const double> forecast) {
    check_aligned(actual, forecast, "mdape");
    std::vector<double> r(actual.size());
    for (std::size_t t = 0; t < actual.size(); ++t) {
        if (actual[t] == 0.0) throw Error(Errc::metric_undefined, "mdape: zero actual at step " + std::to_string(t + 1));
        r[t] = std::abs(actual[t] - forecast[t]) / actual[t];
    }
    return 100.0 * median(std::move(r));
}

MetricReport compute_metrics(std::span<const double> actual, std::span<const double> forecast,
                             std::span<const double> train, std::size_t seasonal_lag, std::span<const double> naive) {
    check_aligned(actual, forecast, "metrics");
    check_aligned(actual, naive, "metrics");
    if (seasonal_lag < 1 || train.size() <= seasonal_lag) {
        throw Error(Errc::bounds, "metrics: training length must exceed the seasonal lag");
    }
    MetricReport m;
    m.rmse = rmse(actual, forecast);
    m.smape_percent = smape_percent(actual, forecast);
    m.theils_u1 = theils_u1(actual, forecast);
    const auto attempt = [&](std::optional<double>& slot, auto&& fn) {
        try {
            slot = fn();
        } catch (const Error& e) {
            if (e.code() != Errc::metric_undefined) throw;
            m.undefined.emplace_back(e.what());
        }
    };
    attempt(m.mase, [&] { return mase(actual, forecast, train, seasonal_lag); });
    attempt(m.mdrae, [&] { return mdrae(actual, forecast, naive); });
    attempt(m.mdape, [&] { return mdape(actual, forecast); });
    return m;
}

double empirical_risk(std::span<const double> predicted, std::span<const double> actual) {
    check_aligned(predicted, actual, "empirical risk");
    double s = 0.0;
    for (std::size_t t = 0; t < actual.size(); ++t) {
        const double e = actual[t] - predicted[t];
        s += e * e;
    }
    return s / static_cast<double>(actual.size());
}

}  // namespace fewnet

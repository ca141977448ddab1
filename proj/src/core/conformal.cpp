#include "conformal.hpp"

#include "error.hpp"
#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fewnet {

namespace {

constexpr double kScaleFloor = 1e-8;

}  // namespace

ScaleModel parse_scale_model(std::string_view name) {
    if (name == "unit") return ScaleModel::unit;
    if (name == "rolling_mad") return ScaleModel::rolling_mad;
    throw Error(Errc::lookup, "unknown conformal scale model '" + std::string(name) + "'");
}

const char* scale_model_name(ScaleModel model) noexcept {
    return model == ScaleModel::unit ? "unit" : "rolling_mad";
}

void ConformalConfig::validate() const {
    if (kappa < 1) throw Error(Errc::domain, "conformal window kappa must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::domain, "conformal alpha must lie in (0, 1)");
}

std::vector<double> conformal_scores(std::span<const double> actual, std::span<const double> predicted,
                                     std::span<const double> scale) {
    if (actual.size() != predicted.size() || actual.size() != scale.size()) {
        throw Error(Errc::shape, "conformal scores: inputs must be aligned");
    }
    std::vector<double> s(actual.size());
    for (std::size_t t = 0; t < actual.size(); ++t) {
        if (!(scale[t] > 0.0)) throw Error(Errc::domain, "conformal scores: scale must be positive");
        s[t] = std::abs(actual[t] - predicted[t]) / scale[t];
    }
    return s;
}

double windowed_quantile(std::span<const double> scores, std::size_t t, std::size_t kappa, double alpha) {
    if (t < 2) throw Error(Errc::index, "conformal quantile needs t >= 2");
    if (t - 1 > scores.size()) throw Error(Errc::index, "conformal quantile: scores before t are not available");
    if (kappa < 1) throw Error(Errc::domain, "conformal window kappa must be at least 1");
    const std::size_t count = std::min(kappa, t - 1);
    // 1-based times t - count .. t - 1 are 0-based t - 1 - count .. t - 2.
    std::vector<double> window(scores.begin() + static_cast<std::ptrdiff_t>(t - 1 - count),
                               scores.begin() + static_cast<std::ptrdiff_t>(t - 1));
    std::sort(window.begin(), window.end());
    const double denom = static_cast<double>(count + 1);
    for (std::size_t i = 0; i < window.size(); ++i) {
        // Include ties so the count is of scores <= window[i].
        std::size_t j = i;
        while (j + 1 < window.size() && window[j + 1] == window[i]) ++j;
        if (static_cast<double>(j + 1) / denom >= 1.0 - alpha) return window[i];
        i = j;
    }
    return kUnboundedQuantile;
}

IntervalSeries intervals(std::span<const double> point_forecast, std::span<const double> quantiles,
                         std::span<const double> scale) {
    if (point_forecast.size() != quantiles.size() || point_forecast.size() != scale.size()) {
        throw Error(Errc::shape, "intervals: inputs must be aligned");
    }
    IntervalSeries out(point_forecast.size());
    for (std::size_t t = 0; t < out.size(); ++t) {
        if (quantiles[t] < 0.0 || std::isnan(quantiles[t])) throw Error(Errc::domain, "intervals: negative quantile");
        const double half = quantiles[t] == 0.0 ? 0.0 : quantiles[t] * scale[t];
        out[t] = {point_forecast[t] - half, point_forecast[t], point_forecast[t] + half};
    }
    return out;
}

double rolling_mad(std::span<const double> residuals, std::size_t kappa) {
    if (residuals.empty()) throw Error(Errc::shape, "rolling MAD of an empty residual set");
    const std::size_t n = std::min(kappa, residuals.size());
    std::vector<double> tail(residuals.end() - static_cast<std::ptrdiff_t>(n), residuals.end());
    const double med = median(tail);
    for (auto& v : tail) v = std::abs(v - med);
    return std::max(median(std::move(tail)), kScaleFloor);
}

IntervalSeries calibrated_intervals(std::span<const double> calibration_actual,
                                    std::span<const double> calibration_predicted,
                                    std::span<const double> point_forecast, const ConformalConfig& config) {
    config.validate();
    const std::size_t n = calibration_actual.size();
    if (n == 0 || calibration_predicted.size() != n) {
        throw Error(Errc::shape, "calibration actuals and predictions must be aligned and non-empty");
    }
    std::vector<double> residuals(n);
    for (std::size_t t = 0; t < n; ++t) residuals[t] = calibration_actual[t] - calibration_predicted[t];

    std::vector<double> scale(n, 1.0);
    double forecast_scale = 1.0;
    if (config.scale == ScaleModel::rolling_mad) {
        // Scale at time t uses residuals strictly before t; the first point reuses its own.
        for (std::size_t t = 0; t < n; ++t) {
            scale[t] = rolling_mad(std::span<const double>(residuals).first(std::max<std::size_t>(t, 1)), config.kappa);
        }
        forecast_scale = rolling_mad(residuals, config.kappa);
    }
    const auto scores = conformal_scores(calibration_actual, calibration_predicted, scale);
    const double q = windowed_quantile(scores, n + 1, config.kappa, config.alpha);
    const std::vector<double> qs(point_forecast.size(), q);
    const std::vector<double> sc(point_forecast.size(), forecast_scale);
    return intervals(point_forecast, qs, sc);
}

}  // namespace fewnet

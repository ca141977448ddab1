#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace fewnet {

enum class ScaleModel { unit, rolling_mad };

[[nodiscard]] ScaleModel parse_scale_model(std::string_view name);
[[nodiscard]] const char* scale_model_name(ScaleModel model) noexcept;

struct ConformalConfig {
    std::size_t kappa = 12;
    double alpha = 0.1;
    ScaleModel scale = ScaleModel::unit;

    void validate() const;

    friend bool operator==(const ConformalConfig&, const ConformalConfig&) = default;
};

inline constexpr double kUnboundedQuantile = std::numeric_limits<double>::infinity();

struct Interval {
    double lower = 0.0;
    double center = 0.0;
    double upper = 0.0;
};

using IntervalSeries = std::vector<Interval>;

/// |y - f| / scale. Throws Errc::domain for a non-positive scale.
[[nodiscard]] std::vector<double> conformal_scores(std::span<const double> actual, std::span<const double> predicted,
                                                   std::span<const double> scale);

/// Conformal quantile at 1-based time t from the scores of times t - kappa .. t - 1:
/// the smallest windowed score q with count(score <= q) / (min(kappa, t - 1) + 1) >= 1 - alpha,
/// or kUnboundedQuantile when no score qualifies. Throws Errc::index for t < 2.
[[nodiscard]] double windowed_quantile(std::span<const double> scores, std::size_t t, std::size_t kappa, double alpha);

/// center +/- quantile * scale. Throws Errc::domain for a negative quantile.
[[nodiscard]] IntervalSeries intervals(std::span<const double> point_forecast, std::span<const double> quantiles,
                                       std::span<const double> scale);

/// Median absolute deviation of the last `kappa` residuals, floored at 1e-8.
[[nodiscard]] double rolling_mad(std::span<const double> residuals, std::size_t kappa);

/// Intervals for a forecast from calibration residuals (actual - predicted on a
/// held-out slice). Every step uses the quantile computed from the last kappa
/// calibration scores, i.e. the quantile at time n + 1 of the calibration record.
[[nodiscard]] IntervalSeries calibrated_intervals(std::span<const double> calibration_actual,
                                                  std::span<const double> calibration_predicted,
                                                  std::span<const double> point_forecast, const ConformalConfig& config);

}  // namespace fewnet

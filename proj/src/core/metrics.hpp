#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fewnet {

/// Accuracy of one m-step forecast. A metric whose formula has a zero
/// denominator is left empty and the reason is recorded.
struct MetricReport {
    double rmse = 0.0;
    std::optional<double> mase;
    double smape_percent = 0.0;
    double theils_u1 = 0.0;
    std::optional<double> mdrae;
    std::optional<double> mdape;
    std::vector<std::string> undefined;  // "mase: ...", one entry per empty metric

    /// Value of a metric by name (rmse, mase, smape, theils_u1, mdrae, mdape);
    /// throws Errc::metric_undefined for an empty one, Errc::lookup for an unknown name.
    [[nodiscard]] double get(std::string_view name) const;
};

[[nodiscard]] const std::vector<std::string>& metric_names();

[[nodiscard]] double rmse(std::span<const double> actual, std::span<const double> forecast);

/// Symmetric MAPE in percent with the (|y| + |f|)/2 denominator; a 0/0 term counts as 0.
[[nodiscard]] double smape_percent(std::span<const double> actual, std::span<const double> forecast);

/// Theil's U1: RMSE / (sqrt(mean y^2) * sqrt(mean f^2)).
[[nodiscard]] double theils_u1(std::span<const double> actual, std::span<const double> forecast);

/// Mean absolute error scaled by the in-sample mean absolute seasonal difference at lag S.
/// Throws Errc::metric_undefined when the training series has no variation at that lag.
[[nodiscard]] double mase(std::span<const double> actual, std::span<const double> forecast,
                          std::span<const double> train, std::size_t seasonal_lag);

/// Median of |y - f| / (y - naive). Throws Errc::metric_undefined if y equals the naive forecast anywhere.
[[nodiscard]] double mdrae(std::span<const double> actual, std::span<const double> forecast,
                           std::span<const double> naive);

/// Median of |y - f| / y, times 100. Throws Errc::metric_undefined on a zero actual.
[[nodiscard]] double mdape(std::span<const double> actual, std::span<const double> forecast);

/// All six metrics. Throws Errc::shape on misaligned inputs and Errc::bounds when
/// the training series is not longer than the seasonal lag.
[[nodiscard]] MetricReport compute_metrics(std::span<const double> actual, std::span<const double> forecast,
                                           std::span<const double> train, std::size_t seasonal_lag,
                                           std::span<const double> naive);

/// Mean squared in-sample residual.
[[nodiscard]] double empirical_risk(std::span<const double> predicted, std::span<const double> actual);

[[nodiscard]] double median(std::vector<double> values);

}  // namespace fewnet

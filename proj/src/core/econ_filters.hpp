#pragma once

#include "series.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace fewnet {

inline constexpr double kHpLambdaMonthly = 129600.0;
inline constexpr double kCfLowerMonths = 18.0;
inline constexpr double kCfUpperMonths = 96.0;

struct HpResult {
    std::vector<double> trend;
    std::vector<double> cycle;  // input - trend
    double lambda = 0.0;
};

struct CfResult {
    std::vector<double> cycle;
    double lower_period = 0.0;  // p_l
    double upper_period = 0.0;  // p_u
};

/// Hodrick-Prescott trend: the solution of (I + lambda D'D) trend = y with D the
/// second difference operator, computed through the equivalent pentadiagonal
/// system (D D' + I / lambda) z = D y, cycle = D' z, trend = y - cycle.
[[nodiscard]] HpResult hp_filter(std::span<const double> series, double lambda = kHpLambdaMonthly);

/// Christiano-Fitzgerald random-walk band-pass filter over the full sample,
/// keeping cycles with periods between lower_period and upper_period months.
[[nodiscard]] CfResult cf_filter(std::span<const double> series, double lower_period = kCfLowerMonths,
                                 double upper_period = kCfUpperMonths);

/// Row t of the CF weight matrix: cycle_t = sum_s weights[s] * y_s.
[[nodiscard]] std::vector<double> cf_weights(std::size_t length, std::size_t t, double lower_period,
                                             double upper_period);

/// Trends and cycles of the inflation target and the two uncertainty indices,
/// in the fixed column order below.
struct ExogenousFeatures {
    static constexpr std::size_t kColumns = 6;
    static constexpr std::array<std::string_view, kColumns> kNames{
        "hp_trend_cpi", "hp_trend_log_epu", "hp_trend_gprc", "cf_cycle_cpi", "cf_cycle_log_epu", "cf_cycle_gprc",
    };

    YearMonth start;
    std::array<std::vector<double>, kColumns> columns;

    [[nodiscard]] std::size_t size() const noexcept { return columns[0].size(); }
    /// Row-major rows x 6 copy.
    [[nodiscard]] std::vector<double> row_major() const;
    [[nodiscard]] std::array<double, kColumns> row(std::size_t t) const;
};

struct EconFilterOptions {
    double hp_lambda = kHpLambdaMonthly;
    double cf_lower = kCfLowerMonths;
    double cf_upper = kCfUpperMonths;

    friend bool operator==(const EconFilterOptions&, const EconFilterOptions&) = default;
};

[[nodiscard]] ExogenousFeatures build_exogenous(const TimeSeries& cpi_inflation, const TimeSeries& log_epu,
                                                const TimeSeries& gprc, const EconFilterOptions& options = {});

}  // namespace fewnet

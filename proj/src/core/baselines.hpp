#pragma once

#include "arnnx.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace fewnet {

/// Last observed value repeated.
[[nodiscard]] std::vector<double> rw_forecast(std::span<const double> train, std::size_t horizon);

/// Last value plus h times the mean first difference (Y_N - Y_1) / (N - 1).
[[nodiscard]] std::vector<double> rwd_forecast(std::span<const double> train, std::size_t horizon);

struct ArModel {
    std::size_t order = 0;
    double intercept = 0.0;
    std::vector<double> coefficients;  // phi_1..phi_p
    double aic = 0.0;
    double sigma2 = 0.0;               // residual variance (ML)
};

/// OLS fit of an AR(p) with intercept on rows t = max_order..N-1 so that all
/// candidate orders share one sample.
[[nodiscard]] ArModel ar_fit_order(std::span<const double> train, std::size_t order, std::size_t sample_start);

/// Order chosen by minimum Gaussian AIC over 1..max_order (ties: smaller order).
/// Throws Errc::bounds when train is not longer than max_order + 1 and
/// Errc::domain when the lag design is singular.
[[nodiscard]] ArModel ar_fit(std::span<const double> train, std::size_t max_order = 13);

[[nodiscard]] std::vector<double> ar_forecast(const ArModel& model, std::span<const double> train, std::size_t horizon);

/// Unconditional mean intercept / (1 - sum phi).
[[nodiscard]] double ar_mean(const ArModel& model);

/// Largest modulus of the companion-matrix eigenvalues.
[[nodiscard]] double ar_spectral_radius(const ArModel& model);

/// ARNNx trained directly on the undecomposed series.
struct RawArnnxFit {
    ArnnxModel model;
    DesignSet design;
};

[[nodiscard]] RawArnnxFit arnnx_raw_fit(std::span<const double> train, const FeatureMatrix* exog,
                                        const ArnnxConfig& config);

[[nodiscard]] std::vector<double> arnnx_raw_forecast(std::span<const double> train, const FeatureMatrix* exog,
                                                     const ArnnxConfig& config, std::size_t horizon);

}  // namespace fewnet

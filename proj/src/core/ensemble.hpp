#pragma once

#include "arnnx.hpp"
#include "econ_filters.hpp"
#include "modwt.hpp"
#include "series.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fewnet {

/// q = (p + 1) / 2 rounded half to even, at least 1.
[[nodiscard]] std::size_t hidden_size(std::size_t p);

/// Candidate input widths: n_exog + 1 .. 24, i.e. 7..24 with the six filtered
/// features and 1..24 without them.
[[nodiscard]] std::vector<std::size_t> default_p_grid(std::size_t n_exog);

struct FewnetConfig {
    std::string wavelet = "haar";
    std::optional<int> levels;              // default floor(ln N)
    std::vector<std::size_t> p_grid;        // empty: default_p_grid
    bool use_econ_filters = true;           // false gives the filterless variant (EWNet)
    EconFilterOptions filters;
    TrainingOptions training;
    std::size_t cv_folds = 5;
    std::size_t cv_horizon = 12;
    std::vector<int> zero_detail_levels;    // 1-based detail levels forecast as 0
    std::uint64_t seed = 0;
    unsigned threads = 1;

    [[nodiscard]] std::size_t n_exog() const noexcept { return use_econ_filters ? ExogenousFeatures::kColumns : 0; }
    [[nodiscard]] std::vector<std::size_t> grid() const;
    /// Throws Errc::domain.
    void validate() const;

    friend bool operator==(const FewnetConfig&, const FewnetConfig&) = default;
};

/// Target (CPI inflation) plus the two uncertainty indices, all on the same months.
/// The indices may be absent when econ filters are off.
struct FewnetData {
    TimeSeries target;
    std::optional<TimeSeries> log_epu;
    std::optional<TimeSeries> gprc;

    [[nodiscard]] FewnetData slice(std::size_t offset, std::size_t count) const;
};

/// Six filtered features as a row-major matrix, or nullopt without econ filters.
[[nodiscard]] std::optional<FeatureMatrix> exogenous_matrix(const FewnetData& data, const FewnetConfig& config);

struct CandidateScore {
    std::size_t p = 0;
    std::vector<double> fold_smape;
    std::optional<double> mean_smape;  // empty when any fold failed
    std::string failure;
};

struct SelectionResult {
    std::size_t p = 0;
    std::vector<CandidateScore> candidates;
};

struct FewnetModel {
    FewnetConfig config;
    int levels = 0;
    std::size_t p = 0;
    std::size_t q = 0;
    YearMonth start;
    std::vector<double> target;
    MraDecomposition mra;
    std::optional<FeatureMatrix> exog;
    std::vector<ArnnxModel> components;  // details 1..K, then the smooth
    SelectionResult selection;

    [[nodiscard]] std::size_t n_exog() const noexcept { return exog ? exog->cols : 0; }
    [[nodiscard]] std::size_t lags() const noexcept { return p - n_exog(); }
    /// Sub-series modelled by component k (k < K: detail k + 1, k == K: smooth).
    [[nodiscard]] std::span<const double> component_series(std::size_t k) const;
    [[nodiscard]] DesignSet component_design(std::size_t k) const;
};

/// Fits the K + 1 component networks with a fixed input width p.
[[nodiscard]] FewnetModel fit_fixed(const FewnetData& data, const FewnetConfig& config, std::size_t p);

/// Picks p from the grid by mean SMAPE of validation forecasts over the folds,
/// each fold refitting the whole model on its training slice. Ties go to the
/// smaller p; failing candidates are skipped. Throws Errc::selection when every
/// candidate fails.
[[nodiscard]] SelectionResult select_p(const FewnetData& data, const FewnetConfig& config, const FoldSet& folds);

/// Selects p (cross-validation unless the grid has one entry) and fits.
[[nodiscard]] FewnetModel fit(const FewnetData& data, const FewnetConfig& config);

/// Per-component recursive forecasts, details first then the smooth. Without
/// `future_exog` (row-major rows N, N + 1, ...) the filtered features are held
/// at their last training values.
[[nodiscard]] std::vector<std::vector<double>> forecast_components(const FewnetModel& model, std::size_t horizon,
                                                                   std::span<const double> future_exog = {});

/// Sum of the component forecasts at each step.
[[nodiscard]] std::vector<double> forecast(const FewnetModel& model, std::size_t horizon,
                                           std::span<const double> future_exog = {});

/// Recombined in-sample predictions and the matching target values, rows p_lags..N-1.
struct InSampleFit {
    std::size_t first_row = 0;
    std::vector<double> predicted;
    std::vector<double> actual;
    std::vector<double> residual_sum;  // sum over components of (component - prediction)
};

[[nodiscard]] InSampleFit ensemble_in_sample(const FewnetModel& model);

/// Mean squared sum of component in-sample residuals.
[[nodiscard]] double empirical_risk_w(const FewnetModel& model);

/// Same risk for one ARNNx trained on the undecomposed target with the same
/// (p, q, training options, exogenous features) and evaluated on the same rows.
[[nodiscard]] double empirical_risk_raw(const FewnetData& data, const FewnetConfig& config, std::size_t p);

[[nodiscard]] std::string serialize(const FewnetModel& model);
[[nodiscard]] FewnetModel deserialize_fewnet(std::string_view text);

}  // namespace fewnet

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fewnet {

/// losses[model][dataset], lower is better.
struct ErrorMatrix {
    std::vector<std::string> models;
    std::vector<std::string> datasets;
    std::vector<std::vector<double>> losses;

    /// Throws Errc::shape when not rectangular or a cell is not finite.
    void validate() const;
};

struct McbInterval {
    double lower = 0.0;
    double upper = 0.0;
};

struct McbResult {
    std::vector<std::string> models;
    std::vector<double> mean_rank;
    std::vector<McbInterval> intervals;  // mean rank -/+ CD/2
    double critical_distance = 0.0;
    double reference_upper = 0.0;        // upper end of the best model's interval
    std::size_t best = 0;
    std::vector<bool> worse_than_best;   // interval entirely above reference_upper
    double alpha = 0.05;
};

/// Upper-alpha quantile of the studentized range for k groups and infinite
/// degrees of freedom, k in 2..20, alpha in {0.01, 0.05, 0.10}. Throws Errc::lookup.
[[nodiscard]] double studentized_range_quantile(std::size_t groups, double alpha);

/// q_alpha * sqrt(M (M + 1) / (6 D)).
[[nodiscard]] double mcb_critical_distance(std::size_t models, std::size_t datasets, double alpha);

/// Ranks of the values (1 = smallest), ties sharing their average rank.
[[nodiscard]] std::vector<double> average_ranks(std::span<const double> values);

/// Multiple comparison with the best by mean ranks across datasets.
/// Throws Errc::domain for fewer than two models or datasets.
[[nodiscard]] McbResult mcb_test(const ErrorMatrix& errors, double alpha);

struct FluctuationResult {
    std::vector<std::size_t> window_end;          // 0-based index of the last loss in each window
    std::vector<std::optional<double>> statistic; // empty where the window variance is zero
    double critical_value = 0.0;
    double mu = 0.0;
    double table_mu = 0.0;                        // grid value used for the critical value
    double alpha = 0.05;
    std::size_t window = 0;
    std::optional<std::string> warning;

    /// True when |statistic| exceeds the critical value in every defined window.
    [[nodiscard]] bool rejects_everywhere() const;
};

/// Two-sided critical value of the fluctuation test at the grid value of mu
/// nearest to `mu` (grid 0.1..0.9), alpha in {0.05, 0.10}. Throws Errc::lookup.
[[nodiscard]] double fluctuation_critical_value(double mu, double alpha, double* grid_mu = nullptr);

/// Long-run variance of `d` by a Bartlett kernel with truncation lag `lag`.
[[nodiscard]] double bartlett_variance(std::span<const double> d, std::size_t lag);

/// Rolling standardized mean loss differential loss_a - loss_b over windows of
/// round(mu * n) observations. Positive values favour model b.
/// Throws Errc::window when the window is shorter than 2 or mu is outside (0, 1).
[[nodiscard]] FluctuationResult gr_fluctuation_test(std::span<const double> loss_a, std::span<const double> loss_b,
                                                    double mu, double alpha);

}  // namespace fewnet

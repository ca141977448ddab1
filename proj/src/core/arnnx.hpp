#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fewnet {

struct TrainingOptions {
    std::size_t epochs = 500;
    double learning_rate = 0.05;
    std::size_t restarts = 20;

    friend bool operator==(const TrainingOptions&, const TrainingOptions&) = default;
};

/// Shape and training settings of one autoregressive network. `p` counts every
/// input node: the target lags plus the exogenous columns.
struct ArnnxConfig {
    std::size_t p = 1;
    std::size_t q = 1;
    std::size_t n_exog = 0;
    TrainingOptions training;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t lags() const noexcept { return p - n_exog; }
    /// Throws Errc::domain when an invariant does not hold.
    void validate() const;
};

/// Dense row-major matrix of exogenous regressors, one row per month.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    [[nodiscard]] std::span<const double> row(std::size_t r) const {
        return std::span<const double>(data).subspan(r * cols, cols);
    }
};

/// Supervised rows built from a target series: lags (most recent first), the
/// exogenous row of the previous month, and the label.
struct DesignSet {
    std::size_t lag_count = 0;
    std::size_t exog_count = 0;
    std::vector<double> inputs;   // rows x (lag_count + exog_count), lags first
    std::vector<double> targets;  // rows
    std::size_t first_target = 0; // index in the source series of targets[0]

    [[nodiscard]] std::size_t rows() const noexcept { return targets.size(); }
    [[nodiscard]] std::size_t width() const noexcept { return lag_count + exog_count; }
    [[nodiscard]] std::span<const double> input(std::size_t r) const {
        return std::span<const double>(inputs).subspan(r * width(), width());
    }
    [[nodiscard]] std::span<const double> lags(std::size_t r) const { return input(r).first(lag_count); }
    [[nodiscard]] std::span<const double> exog(std::size_t r) const { return input(r).subspan(lag_count); }
    [[nodiscard]] double target(std::size_t r) const { return targets[r]; }
};

/// Throws Errc::bounds when the series is too short for the lag order or the
/// design would have fewer rows than inputs, Errc::shape for misaligned exog.
[[nodiscard]] DesignSet make_design(std::span<const double> target, std::size_t p_lags,
                                    const FeatureMatrix* exog = nullptr);

/// Single-hidden-layer network with logistic hidden units and a linear output:
/// out = output_bias + sum_i output_weights[i] * sigmoid(hidden_bias[i] + <input_weights row i, x>).
struct Network {
    std::size_t inputs = 0;
    std::size_t hidden = 0;
    std::vector<double> input_weights;   // hidden x inputs, row-major
    std::vector<double> hidden_bias;     // hidden
    std::vector<double> output_weights;  // hidden
    double output_bias = 0.0;

    Network() = default;
    Network(std::size_t n_inputs, std::size_t n_hidden);

    [[nodiscard]] double operator()(std::span<const double> x) const;

    /// Flat parameter order: input_weights, hidden_bias, output_weights, output_bias.
    [[nodiscard]] std::size_t parameter_count() const noexcept { return hidden * inputs + 2 * hidden + 1; }
    [[nodiscard]] std::vector<double> parameters() const;
    void set_parameters(std::span<const double> values);

    friend bool operator==(const Network&, const Network&) = default;
};

[[nodiscard]] double sigmoid(double z) noexcept;

/// Mean squared error of `net` over row-major `inputs`; fills `gradient` (same
/// shape as net) with its analytic derivative when non-null.
double mse_loss_gradient(const Network& net, std::span<const double> inputs, std::span<const double> targets,
                         Network* gradient);

/// Per-column standardization applied to network inputs and to the target.
struct InputScaling {
    std::vector<double> center;
    std::vector<double> scale;
    double target_center = 0.0;
    double target_scale = 1.0;

    [[nodiscard]] static InputScaling identity(std::size_t width);

    friend bool operator==(const InputScaling&, const InputScaling&) = default;
};

struct ArnnxModel {
    ArnnxConfig config;
    InputScaling scaling;
    std::vector<Network> networks;  // one per restart; predictions are averaged

    friend bool operator==(const ArnnxModel& a, const ArnnxModel& b) {
        return a.config.p == b.config.p && a.config.q == b.config.q && a.config.n_exog == b.config.n_exog &&
               a.config.seed == b.config.seed && a.config.training.epochs == b.config.training.epochs &&
               a.config.training.learning_rate == b.config.training.learning_rate &&
               a.config.training.restarts == b.config.training.restarts && a.scaling == b.scaling &&
               a.networks == b.networks;
    }
};

/// Loss recorded before each update, per restart.
struct TrainTrace {
    std::vector<std::vector<double>> loss;
};

/// Full-batch gradient descent on standardized data, once per restart from a
/// seeded uniform [-0.5, 0.5] initialization. Throws Errc::divergence when the
/// loss becomes non-finite.
[[nodiscard]] ArnnxModel train_arnnx(const DesignSet& design, const ArnnxConfig& config,
                                     TrainTrace* trace = nullptr);

/// Restart-averaged one-step prediction in the target's units.
[[nodiscard]] double predict_one(const ArnnxModel& model, std::span<const double> lags,
                                 std::span<const double> exog);

/// Prediction of a single restart's network, in the target's units.
[[nodiscard]] double predict_restart(const ArnnxModel& model, std::size_t restart, std::span<const double> lags,
                                     std::span<const double> exog);

[[nodiscard]] std::vector<double> in_sample_predictions(const ArnnxModel& model, const DesignSet& design);

/// Exogenous rows used while forecasting. Step h (1-based) forecasts month
/// N + h - 1 of a history of length N and is paired with row N + h - 2, so
/// step 1 uses the last observed row. Without a supplied future path every
/// step reuses the last observed row.
struct ExogPolicy {
    std::vector<double> last_observed;
    std::vector<double> future;  // row-major rows N, N+1, ...

    [[nodiscard]] static ExogPolicy none() { return {}; }
    [[nodiscard]] static ExogPolicy frozen(std::vector<double> last_row) { return {std::move(last_row), {}}; }

    [[nodiscard]] std::span<const double> row(std::size_t step) const;
};

/// Recursive multi-step forecast: each prediction is appended to the lag window.
[[nodiscard]] std::vector<double> forecast_recursive(const ArnnxModel& model, std::span<const double> history,
                                                     const ExogPolicy& exog, std::size_t horizon);

/// Text form that restores every weight bit for bit.
[[nodiscard]] std::string serialize(const ArnnxModel& model);
[[nodiscard]] ArnnxModel deserialize_arnnx(std::string_view text);

}  // namespace fewnet

#pragma once

#include "baselines.hpp"
#include "comparison.hpp"
#include "conformal.hpp"
#include "ensemble.hpp"
#include "metrics.hpp"
#include "series.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fewnet {

inline constexpr int kConfigVersion = 1;

/// Pipeline stage that raised an error; selects the CLI exit status.
enum class Stage { config, data, training, evaluation, output };

[[nodiscard]] const char* stage_name(Stage stage) noexcept;
[[nodiscard]] int exit_code(Stage stage) noexcept;

class StageError : public std::runtime_error {
public:
    StageError(Stage stage, const std::string& message)
        : std::runtime_error(std::string(stage_name(stage)) + ": " + message), stage_(stage) {}

    [[nodiscard]] Stage stage() const noexcept { return stage_; }

private:
    Stage stage_;
};

struct SeriesInput {
    std::string path;
    std::string date_column = "date";
    std::string value_column = "value";

    friend bool operator==(const SeriesInput&, const SeriesInput&) = default;
};

enum class CpiKind { index, inflation };

struct DatasetConfig {
    std::string name;
    SeriesInput cpi;
    CpiKind cpi_kind = CpiKind::index;
    std::optional<SeriesInput> epu;
    bool epu_apply_log = true;
    std::optional<SeriesInput> gprc;
    SplitSpec split;
    std::optional<std::string> external_forecasts;

    friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

enum class ModelKind { fewnet, rw, rwd, ar, arnnx };

[[nodiscard]] const char* model_kind_name(ModelKind kind) noexcept;

struct ModelConfig {
    std::string name;
    ModelKind kind = ModelKind::rw;
    FewnetConfig fewnet;             // kind == fewnet
    std::size_t ar_max_order = 13;   // kind == ar
    std::size_t arnnx_p = 12;        // kind == arnnx
    bool arnnx_econ_filters = true;
    TrainingOptions arnnx_training;

    [[nodiscard]] bool needs_exogenous() const noexcept;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct McbOptions {
    double alpha = 0.05;
    std::string metric = "rmse";

    friend bool operator==(const McbOptions&, const McbOptions&) = default;
};

struct GrOptions {
    std::vector<std::pair<std::string, std::string>> pairs;
    double mu = 0.5;
    double alpha = 0.05;

    friend bool operator==(const GrOptions&, const GrOptions&) = default;
};

struct ConformalOptions {
    std::string model;
    ConformalConfig config;
    std::size_t calibration_length = 24;

    friend bool operator==(const ConformalOptions&, const ConformalOptions&) = default;
};

struct EvaluationConfig {
    std::size_t seasonal_lag = 1;
    std::optional<McbOptions> mcb;
    std::optional<GrOptions> gr;
    std::optional<ConformalOptions> conformal;

    friend bool operator==(const EvaluationConfig&, const EvaluationConfig&) = default;
};

struct ExperimentConfig {
    int config_version = kConfigVersion;
    std::uint64_t seed = 0;
    std::vector<DatasetConfig> datasets;
    std::vector<ModelConfig> models;
    EvaluationConfig evaluation;
    std::string output_dir = "output";
    unsigned threads = 1;
    std::filesystem::path base_dir;  // relative input paths resolve against it

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct ConfigValidation {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;  // "field.path: message"

    [[nodiscard]] bool ok() const noexcept { return errors.empty(); }
};

/// Parses and checks a JSON configuration, collecting every problem found.
[[nodiscard]] ConfigValidation validate_config_text(const std::string& text, const std::filesystem::path& base_dir);
[[nodiscard]] ConfigValidation validate_config(const std::filesystem::path& path);

/// Effective configuration with defaults filled in, as JSON text. Excludes the
/// output directory and thread count, which never affect results.
[[nodiscard]] std::string effective_config_json(const ExperimentConfig& config);

struct RunOptions {
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

/// Runs the whole pipeline and writes forecasts.csv, metrics.csv and, when
/// enabled, intervals.csv, mcb.json and fluctuation.json plus report.json into
/// the output directory. Returns the report JSON. Throws StageError; files of a
/// failed run are removed.
std::string run_experiment(ExperimentConfig config, const RunOptions& options = {});

/// FEWNet settings from a JSON object holding the model "params" keys plus
/// optional "seed" and "threads". Throws Errc::config listing every problem.
[[nodiscard]] FewnetConfig parse_fewnet_config(const std::string& text);

/// MODWT multi-resolution analysis of a CSV series as CSV (t, d1..dK, smooth).
/// levels <= 0 selects floor(ln N).
[[nodiscard]] std::string decompose_csv(const std::filesystem::path& series_path, const std::string& date_column,
                                        const std::string& value_column, const std::string& filter, int levels);

/// Accuracy of a forecast CSV against a CSV of actuals. The forecast months must
/// lie inside the actuals; the actual months before the first forecast month act
/// as the training history (for MASE and the random-walk reference of MDRAE).
[[nodiscard]] std::string metrics_csv(const std::filesystem::path& actual_path,
                                      const std::filesystem::path& forecast_path, std::size_t seasonal_lag);

/// Hex SHA-256 digest.
[[nodiscard]] std::string sha256_hex(std::string_view data);

}  // namespace fewnet

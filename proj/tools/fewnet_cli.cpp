#include "fewnet/fewnet.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kData = 3, kTraining = 4, kEvaluation = 5 };

int exit_for(fewnet_status status) {
    switch (status) {
        case FEWNET_OK: return kOk;
        case FEWNET_ERR_CONFIG:
        case FEWNET_ERR_INVALID_ARGUMENT: return kConfig;
        case FEWNET_ERR_DATA:
        case FEWNET_ERR_FORMAT:
        case FEWNET_ERR_CONTINUITY:
        case FEWNET_ERR_DOMAIN:
        case FEWNET_ERR_BOUNDS:
        case FEWNET_ERR_LOOKUP:
        case FEWNET_ERR_LEVEL:
        case FEWNET_ERR_SHAPE: return kData;
        case FEWNET_ERR_TRAINING:
        case FEWNET_ERR_DIVERGENCE:
        case FEWNET_ERR_SELECTION: return kTraining;
        case FEWNET_ERR_EVALUATION:
        case FEWNET_ERR_METRIC_UNDEFINED:
        case FEWNET_ERR_INDEX:
        case FEWNET_ERR_WINDOW: return kEvaluation;
        default: return kOther;
    }
}

int report_failure(fewnet_status status) {
    std::cerr << "error: " << fewnet_last_error() << "\n";
    return exit_for(status);
}

int emit(char* text, const std::string& output) {
    int code = kOk;
    if (output.empty() || output == "-") {
        std::cout << text;
    } else {
        std::ofstream f(output, std::ios::binary | std::ios::trunc);
        f << text;
        if (!f) {
            std::cerr << "error: cannot write " << output << "\n";
            code = kOther;
        }
    }
    fewnet_string_free(text);
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wavelet-decomposed ARNNx ensemble forecasting for monthly inflation"};
    app.set_version_flag("--version", std::string(fewnet_version()));
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
    run->add_option("config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
    run->add_option("--output-dir", output_dir, "Output directory (overrides the config)");
    run->add_option("--seed", seed, "Master seed (overrides the config)");
    run->add_option("--threads", threads, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
    run->add_flag("--quiet", quiet, "Do not print the report");

    auto* validate = app.add_subcommand("validate", "Check a config without running it");
    validate->add_option("config", config_path, "Experiment config")->required();

    std::string series_path, wavelet = "haar", date_column = "date", value_column = "value", output;
    int levels = 0;
    auto* decompose = app.add_subcommand("decompose", "MODWT multi-resolution analysis of a series");
    decompose->add_option("series", series_path, "Series CSV")->required();
    decompose->add_option("--wavelet", wavelet, "haar, d8, la8, c6 or bl14")->capture_default_str();
    decompose->add_option("--levels", levels, "Decomposition depth (default floor(ln N))");
    decompose->add_option("--date-column", date_column)->capture_default_str();
    decompose->add_option("--value-column", value_column)->capture_default_str();
    decompose->add_option("-o,--output", output, "Output CSV (default stdout)");

    std::string actual_path, forecast_path;
    std::size_t seasonal_lag = 1;
    auto* metrics = app.add_subcommand("metrics", "Accuracy of a forecast CSV against actuals");
    metrics->add_option("actual", actual_path, "Actuals CSV (date,value)")->required();
    metrics->add_option("forecast", forecast_path, "Forecast CSV (date,value)")->required();
    metrics->add_option("--seasonal-lag", seasonal_lag, "MASE scaling lag")->capture_default_str();
    metrics->add_option("-o,--output", output, "Output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    if (*run) {
        fewnet_run_options opts{};
        opts.output_dir = output_dir ? output_dir->c_str() : nullptr;
        opts.override_seed = seed.has_value();
        opts.seed = seed.value_or(0);
        opts.threads = threads;
        char* report = nullptr;
        const auto status = fewnet_run_experiment(config_path.c_str(), &opts, &report);
        if (status != FEWNET_OK) return report_failure(status);
        if (quiet) {
            fewnet_string_free(report);
            return kOk;
        }
        return emit(report, "");
    }
    if (*validate) {
        char* messages = nullptr;
        const auto status = fewnet_config_validate(config_path.c_str(), &messages);
        if (status == FEWNET_OK) {
            std::cout << "ok\n";
            return kOk;
        }
        if (messages != nullptr) {
            std::cerr << messages;
            fewnet_string_free(messages);
        } else {
            std::cerr << "error: " << fewnet_last_error() << "\n";
        }
        return exit_for(status);
    }
    if (*decompose) {
        char* csv = nullptr;
        const auto status = fewnet_decompose_csv(series_path.c_str(), date_column.c_str(), value_column.c_str(),
                                                 wavelet.c_str(), levels, &csv);
        if (status != FEWNET_OK) return report_failure(status);
        return emit(csv, output);
    }
    if (*metrics) {
        char* csv = nullptr;
        const auto status =
            fewnet_metrics_from_csv(actual_path.c_str(), forecast_path.c_str(), seasonal_lag, &csv);
        if (status != FEWNET_OK) return report_failure(status);
        return emit(csv, output);
    }
    return kOther;
}

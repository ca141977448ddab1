#include "fewnet/fewnet.h"

#include "baselines.hpp"
#include "conformal.hpp"
#include "econ_filters.hpp"
#include "ensemble.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "metrics.hpp"
#include "modwt.hpp"
#include "series.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

struct fewnet_series {
    fewnet::TimeSeries value;
};

struct fewnet_mra {
    fewnet::MraDecomposition value;
};

struct fewnet_model {
    fewnet::FewnetModel value;
};

namespace {

thread_local std::string g_last_error;

fewnet_status from_errc(fewnet::Errc code) {
    using fewnet::Errc;
    switch (code) {
        case Errc::format: return FEWNET_ERR_FORMAT;
        case Errc::continuity: return FEWNET_ERR_CONTINUITY;
        case Errc::domain: return FEWNET_ERR_DOMAIN;
        case Errc::bounds: return FEWNET_ERR_BOUNDS;
        case Errc::lookup: return FEWNET_ERR_LOOKUP;
        case Errc::level: return FEWNET_ERR_LEVEL;
        case Errc::shape: return FEWNET_ERR_SHAPE;
        case Errc::divergence: return FEWNET_ERR_DIVERGENCE;
        case Errc::selection: return FEWNET_ERR_SELECTION;
        case Errc::metric_undefined: return FEWNET_ERR_METRIC_UNDEFINED;
        case Errc::index: return FEWNET_ERR_INDEX;
        case Errc::window: return FEWNET_ERR_WINDOW;
        case Errc::config: return FEWNET_ERR_CONFIG;
        case Errc::io: return FEWNET_ERR_IO;
    }
    return FEWNET_ERR_INTERNAL;
}

fewnet_status from_stage(fewnet::Stage stage) {
    using fewnet::Stage;
    switch (stage) {
        case Stage::config: return FEWNET_ERR_CONFIG;
        case Stage::data: return FEWNET_ERR_DATA;
        case Stage::training: return FEWNET_ERR_TRAINING;
        case Stage::evaluation: return FEWNET_ERR_EVALUATION;
        case Stage::output: return FEWNET_ERR_IO;
    }
    return FEWNET_ERR_INTERNAL;
}

fewnet_status fail(fewnet_status status, std::string message) {
    g_last_error = std::move(message);
    return status;
}

template <class Fn>
fewnet_status guarded(Fn&& fn) {
    try {
        g_last_error.clear();
        return fn();
    } catch (const fewnet::StageError& e) {
        return fail(from_stage(e.stage()), e.what());
    } catch (const fewnet::Error& e) {
        return fail(from_errc(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(FEWNET_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(FEWNET_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(FEWNET_ERR_INTERNAL, "unknown failure");
    }
}

char* copy_string(const std::string& s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

#define FEWNET_REQUIRE(cond, what)                                          \
    do {                                                                   \
        if (!(cond)) return fail(FEWNET_ERR_INVALID_ARGUMENT, what);       \
    } while (0)

std::span<const double> view(const double* p, std::size_t n) { return {p, n}; }

}  // namespace

extern "C" {

const char* fewnet_version(void) { return FEWNET_VERSION_STRING; }

const char* fewnet_status_string(fewnet_status status) {
    switch (status) {
        case FEWNET_OK: return "ok";
        case FEWNET_ERR_INVALID_ARGUMENT: return "invalid argument";
        case FEWNET_ERR_FORMAT: return "format error";
        case FEWNET_ERR_CONTINUITY: return "continuity error";
        case FEWNET_ERR_DOMAIN: return "domain error";
        case FEWNET_ERR_BOUNDS: return "bounds error";
        case FEWNET_ERR_LOOKUP: return "lookup error";
        case FEWNET_ERR_LEVEL: return "level error";
        case FEWNET_ERR_SHAPE: return "shape error";
        case FEWNET_ERR_DIVERGENCE: return "training diverged";
        case FEWNET_ERR_SELECTION: return "selection error";
        case FEWNET_ERR_METRIC_UNDEFINED: return "metric undefined";
        case FEWNET_ERR_INDEX: return "index error";
        case FEWNET_ERR_WINDOW: return "window error";
        case FEWNET_ERR_CONFIG: return "configuration error";
        case FEWNET_ERR_DATA: return "data error";
        case FEWNET_ERR_TRAINING: return "training error";
        case FEWNET_ERR_EVALUATION: return "evaluation error";
        case FEWNET_ERR_IO: return "i/o error";
        case FEWNET_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* fewnet_last_error(void) { return g_last_error.c_str(); }

void fewnet_string_free(char* text) { std::free(text); }

fewnet_status fewnet_series_load_csv(const char* path, const char* date_column, const char* value_column,
                                     fewnet_series** out) {
    FEWNET_REQUIRE(path && date_column && value_column && out, "null argument");
    return guarded([&] {
        *out = new fewnet_series{fewnet::load_csv(path, date_column, value_column)};
        return FEWNET_OK;
    });
}

fewnet_status fewnet_series_create(int start_year, int start_month, const double* values, size_t length,
                                   fewnet_series** out) {
    FEWNET_REQUIRE(values && out && length > 0, "null argument or empty series");
    FEWNET_REQUIRE(start_month >= 1 && start_month <= 12, "month must be 1..12");
    return guarded([&] {
        *out = new fewnet_series{fewnet::TimeSeries({start_year, start_month}, std::vector<double>(values, values + length))};
        return FEWNET_OK;
    });
}

void fewnet_series_free(fewnet_series* series) { delete series; }

size_t fewnet_series_length(const fewnet_series* series) { return series ? series->value.size() : 0; }

const double* fewnet_series_values(const fewnet_series* series) {
    return series ? series->value.values().data() : nullptr;
}

fewnet_status fewnet_series_start(const fewnet_series* series, int* year, int* month) {
    FEWNET_REQUIRE(series && year && month, "null argument");
    *year = series->value.start().year;
    *month = series->value.start().month;
    return FEWNET_OK;
}

fewnet_status fewnet_series_yoy(const fewnet_series* index, fewnet_series** out) {
    FEWNET_REQUIRE(index && out, "null argument");
    return guarded([&] {
        *out = new fewnet_series{fewnet::yoy_inflation(index->value)};
        return FEWNET_OK;
    });
}

fewnet_status fewnet_series_log10(const fewnet_series* series, fewnet_series** out) {
    FEWNET_REQUIRE(series && out, "null argument");
    return guarded([&] {
        *out = new fewnet_series{fewnet::log_transform(series->value)};
        return FEWNET_OK;
    });
}

fewnet_status fewnet_split_lengths(const fewnet_series* series, int train_end_year, int train_end_month,
                                   size_t horizon, size_t* train_length, size_t* test_length) {
    FEWNET_REQUIRE(series && train_length && test_length, "null argument");
    FEWNET_REQUIRE(train_end_month >= 1 && train_end_month <= 12, "month must be 1..12");
    return guarded([&] {
        const auto parts = fewnet::split(series->value, {{train_end_year, train_end_month}, horizon});
        *train_length = parts.train.size();
        *test_length = parts.test.size();
        return FEWNET_OK;
    });
}

fewnet_status fewnet_default_level(size_t length, int* level) {
    FEWNET_REQUIRE(level, "null argument");
    return guarded([&] {
        *level = fewnet::default_level(length);
        return FEWNET_OK;
    });
}

fewnet_status fewnet_mra_create(const double* values, size_t length, const char* filter, int levels,
                                fewnet_mra** out) {
    FEWNET_REQUIRE(values && filter && out, "null argument");
    return guarded([&] {
        const int k = levels > 0 ? levels : fewnet::default_level(length);
        const auto dec = fewnet::modwt(view(values, length), fewnet::filter_coefficients(filter), k);
        *out = new fewnet_mra{fewnet::mra(dec)};
        return FEWNET_OK;
    });
}

void fewnet_mra_free(fewnet_mra* mra) { delete mra; }

int fewnet_mra_levels(const fewnet_mra* mra) { return mra ? mra->value.levels() : 0; }

size_t fewnet_mra_length(const fewnet_mra* mra) { return mra ? mra->value.size() : 0; }

const double* fewnet_mra_detail(const fewnet_mra* mra, int level) {
    if (mra == nullptr || level < 1 || level > mra->value.levels()) return nullptr;
    return mra->value.details[static_cast<std::size_t>(level - 1)].data();
}

const double* fewnet_mra_smooth(const fewnet_mra* mra) { return mra ? mra->value.smooth.data() : nullptr; }

fewnet_status fewnet_hp_filter(const double* values, size_t length, double lambda, double* trend, double* cycle) {
    FEWNET_REQUIRE(values && (trend || cycle), "null argument");
    return guarded([&] {
        const auto r = fewnet::hp_filter(view(values, length), lambda);
        if (trend) std::copy(r.trend.begin(), r.trend.end(), trend);
        if (cycle) std::copy(r.cycle.begin(), r.cycle.end(), cycle);
        return FEWNET_OK;
    });
}

fewnet_status fewnet_cf_filter(const double* values, size_t length, double lower_period, double upper_period,
                               double* cycle) {
    FEWNET_REQUIRE(values && cycle, "null argument");
    return guarded([&] {
        const auto r = fewnet::cf_filter(view(values, length), lower_period, upper_period);
        std::copy(r.cycle.begin(), r.cycle.end(), cycle);
        return FEWNET_OK;
    });
}

fewnet_status fewnet_compute_metrics(const double* actual, const double* forecast, size_t horizon, const double* train,
                                     size_t train_length, size_t seasonal_lag, const double* naive,
                                     fewnet_metrics* out) {
    FEWNET_REQUIRE(actual && forecast && train && naive && out, "null argument");
    return guarded([&] {
        const auto m = fewnet::compute_metrics(view(actual, horizon), view(forecast, horizon), view(train, train_length),
                                               seasonal_lag, view(naive, horizon));
        *out = fewnet_metrics{m.rmse,
                              m.mase.value_or(0.0),
                              m.smape_percent,
                              m.theils_u1,
                              m.mdrae.value_or(0.0),
                              m.mdape.value_or(0.0),
                              m.mase.has_value(),
                              m.mdrae.has_value(),
                              m.mdape.has_value()};
        return FEWNET_OK;
    });
}

fewnet_status fewnet_rw_forecast(const double* train, size_t length, size_t horizon, double* out) {
    FEWNET_REQUIRE(train && out, "null argument");
    return guarded([&] {
        const auto f = fewnet::rw_forecast(view(train, length), horizon);
        std::copy(f.begin(), f.end(), out);
        return FEWNET_OK;
    });
}

fewnet_status fewnet_rwd_forecast(const double* train, size_t length, size_t horizon, double* out) {
    FEWNET_REQUIRE(train && out, "null argument");
    return guarded([&] {
        const auto f = fewnet::rwd_forecast(view(train, length), horizon);
        std::copy(f.begin(), f.end(), out);
        return FEWNET_OK;
    });
}

fewnet_status fewnet_ar_forecast(const double* train, size_t length, size_t max_order, size_t horizon, double* out,
                                 size_t* selected_order) {
    FEWNET_REQUIRE(train && out, "null argument");
    return guarded([&] {
        const auto model = fewnet::ar_fit(view(train, length), max_order);
        const auto f = fewnet::ar_forecast(model, view(train, length), horizon);
        std::copy(f.begin(), f.end(), out);
        if (selected_order) *selected_order = model.order;
        return FEWNET_OK;
    });
}

fewnet_status fewnet_model_fit(const fewnet_series* target, const fewnet_series* log_epu, const fewnet_series* gprc,
                               const char* settings_json, fewnet_model** out) {
    FEWNET_REQUIRE(target && out, "null argument");
    return guarded([&] {
        const auto config = fewnet::parse_fewnet_config(settings_json ? settings_json : "");
        fewnet::FewnetData data{target->value, std::nullopt, std::nullopt};
        if (log_epu) data.log_epu = log_epu->value;
        if (gprc) data.gprc = gprc->value;
        *out = new fewnet_model{fewnet::fit(data, config)};
        return FEWNET_OK;
    });
}

void fewnet_model_free(fewnet_model* model) { delete model; }

fewnet_status fewnet_model_info(const fewnet_model* model, size_t* p, size_t* q, int* levels, size_t* components) {
    FEWNET_REQUIRE(model, "null argument");
    if (p) *p = model->value.p;
    if (q) *q = model->value.q;
    if (levels) *levels = model->value.levels;
    if (components) *components = model->value.components.size();
    return FEWNET_OK;
}

fewnet_status fewnet_model_forecast(const fewnet_model* model, size_t horizon, double* out) {
    FEWNET_REQUIRE(model && out, "null argument");
    return guarded([&] {
        const auto f = fewnet::forecast(model->value, horizon);
        std::copy(f.begin(), f.end(), out);
        return FEWNET_OK;
    });
}

fewnet_status fewnet_model_component_forecast(const fewnet_model* model, size_t component, size_t horizon,
                                              double* out) {
    FEWNET_REQUIRE(model && out, "null argument");
    FEWNET_REQUIRE(component < model->value.components.size(), "component index out of range");
    return guarded([&] {
        const auto parts = fewnet::forecast_components(model->value, horizon);
        std::copy(parts[component].begin(), parts[component].end(), out);
        return FEWNET_OK;
    });
}

fewnet_status fewnet_model_empirical_risk(const fewnet_model* model, double* out) {
    FEWNET_REQUIRE(model && out, "null argument");
    return guarded([&] {
        *out = fewnet::empirical_risk_w(model->value);
        return FEWNET_OK;
    });
}

fewnet_status fewnet_model_save(const fewnet_model* model, const char* path) {
    FEWNET_REQUIRE(model && path, "null argument");
    return guarded([&] {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw fewnet::Error(fewnet::Errc::io, std::string("cannot write ") + path);
        f << fewnet::serialize(model->value);
        if (!f) throw fewnet::Error(fewnet::Errc::io, std::string("failed writing ") + path);
        return FEWNET_OK;
    });
}

fewnet_status fewnet_model_load(const char* path, fewnet_model** out) {
    FEWNET_REQUIRE(path && out, "null argument");
    return guarded([&] {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw fewnet::Error(fewnet::Errc::io, std::string("cannot open ") + path);
        std::ostringstream buf;
        buf << f.rdbuf();
        *out = new fewnet_model{fewnet::deserialize_fewnet(buf.str())};
        return FEWNET_OK;
    });
}

fewnet_status fewnet_conformal_intervals(const double* calibration_actual, const double* calibration_predicted,
                                         size_t calibration_length, const double* point_forecast, size_t horizon,
                                         size_t kappa, double alpha, const char* scale, double* lower, double* upper) {
    FEWNET_REQUIRE(calibration_actual && calibration_predicted && point_forecast && lower && upper, "null argument");
    return guarded([&] {
        fewnet::ConformalConfig c{kappa, alpha, fewnet::parse_scale_model(scale ? scale : "unit")};
        const auto iv = fewnet::calibrated_intervals(view(calibration_actual, calibration_length),
                                                     view(calibration_predicted, calibration_length),
                                                     view(point_forecast, horizon), c);
        for (std::size_t h = 0; h < iv.size(); ++h) {
            lower[h] = iv[h].lower;
            upper[h] = iv[h].upper;
        }
        return FEWNET_OK;
    });
}

fewnet_status fewnet_config_validate(const char* config_path, char** messages) {
    FEWNET_REQUIRE(config_path, "null argument");
    if (messages) *messages = nullptr;
    return guarded([&] {
        const auto v = fewnet::validate_config(config_path);
        if (v.ok()) return FEWNET_OK;
        std::string text;
        for (const auto& e : v.errors) text += e + "\n";
        if (messages) *messages = copy_string(text);
        return fail(FEWNET_ERR_CONFIG, text);
    });
}

fewnet_status fewnet_run_experiment(const char* config_path, const fewnet_run_options* options, char** report) {
    FEWNET_REQUIRE(config_path, "null argument");
    if (report) *report = nullptr;
    return guarded([&] {
        auto v = fewnet::validate_config(config_path);
        if (!v.ok()) {
            std::string text = "config:";
            for (const auto& e : v.errors) text += "\n  " + e;
            return fail(FEWNET_ERR_CONFIG, text);
        }
        fewnet::RunOptions ro;
        if (options) {
            if (options->output_dir) ro.output_dir = options->output_dir;
            if (options->override_seed) ro.seed = options->seed;
            if (options->threads > 0) ro.threads = options->threads;
        }
        const auto text = fewnet::run_experiment(std::move(*v.config), ro);
        if (report) *report = copy_string(text);
        return FEWNET_OK;
    });
}

fewnet_status fewnet_decompose_csv(const char* series_path, const char* date_column, const char* value_column,
                                   const char* filter, int levels, char** csv_out) {
    FEWNET_REQUIRE(series_path && csv_out, "null argument");
    return guarded([&] {
        *csv_out = copy_string(fewnet::decompose_csv(series_path, date_column ? date_column : "date",
                                                     value_column ? value_column : "value", filter ? filter : "haar",
                                                     levels));
        return FEWNET_OK;
    });
}

fewnet_status fewnet_metrics_from_csv(const char* actual_path, const char* forecast_path, size_t seasonal_lag,
                                      char** csv_out) {
    FEWNET_REQUIRE(actual_path && forecast_path && csv_out, "null argument");
    return guarded([&] {
        *csv_out = copy_string(fewnet::metrics_csv(actual_path, forecast_path, seasonal_lag));
        return FEWNET_OK;
    });
}

}  // extern "C"

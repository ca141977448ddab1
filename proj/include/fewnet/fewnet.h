#ifndef FEWNET_FEWNET_H
#define FEWNET_FEWNET_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FEWNET_BUILDING_LIBRARY)
#    define FEWNET_API __declspec(dllexport)
#  else
#    define FEWNET_API __declspec(dllimport)
#  endif
#else
#  define FEWNET_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fewnet_status {
    FEWNET_OK = 0,
    FEWNET_ERR_INVALID_ARGUMENT = 1,
    FEWNET_ERR_FORMAT = 2,
    FEWNET_ERR_CONTINUITY = 3,
    FEWNET_ERR_DOMAIN = 4,
    FEWNET_ERR_BOUNDS = 5,
    FEWNET_ERR_LOOKUP = 6,
    FEWNET_ERR_LEVEL = 7,
    FEWNET_ERR_SHAPE = 8,
    FEWNET_ERR_DIVERGENCE = 9,
    FEWNET_ERR_SELECTION = 10,
    FEWNET_ERR_METRIC_UNDEFINED = 11,
    FEWNET_ERR_INDEX = 12,
    FEWNET_ERR_WINDOW = 13,
    FEWNET_ERR_CONFIG = 14,
    FEWNET_ERR_DATA = 15,
    FEWNET_ERR_TRAINING = 16,
    FEWNET_ERR_EVALUATION = 17,
    FEWNET_ERR_IO = 18,
    FEWNET_ERR_INTERNAL = 19
} fewnet_status;

/* Opaque handles. Each *_free accepts NULL. */
typedef struct fewnet_series fewnet_series;
typedef struct fewnet_mra fewnet_mra;
typedef struct fewnet_model fewnet_model;

FEWNET_API const char* fewnet_version(void);
FEWNET_API const char* fewnet_status_string(fewnet_status status);
/* Message of the last failed call on this thread; empty after a success. */
FEWNET_API const char* fewnet_last_error(void);
/* Releases strings returned through char** out-parameters. */
FEWNET_API void fewnet_string_free(char* text);

/* ---- series ---- */
FEWNET_API fewnet_status fewnet_series_load_csv(const char* path, const char* date_column, const char* value_column,
                                                fewnet_series** out);
FEWNET_API fewnet_status fewnet_series_create(int start_year, int start_month, const double* values, size_t length,
                                              fewnet_series** out);
FEWNET_API void fewnet_series_free(fewnet_series* series);
FEWNET_API size_t fewnet_series_length(const fewnet_series* series);
/* Borrowed pointer valid until the series is freed. */
FEWNET_API const double* fewnet_series_values(const fewnet_series* series);
FEWNET_API fewnet_status fewnet_series_start(const fewnet_series* series, int* year, int* month);
FEWNET_API fewnet_status fewnet_series_yoy(const fewnet_series* index, fewnet_series** out);
FEWNET_API fewnet_status fewnet_series_log10(const fewnet_series* series, fewnet_series** out);
FEWNET_API fewnet_status fewnet_split_lengths(const fewnet_series* series, int train_end_year, int train_end_month,
                                              size_t horizon, size_t* train_length, size_t* test_length);

/* ---- wavelets ---- */
FEWNET_API fewnet_status fewnet_default_level(size_t length, int* level);
/* filter: haar, d8, la8, c6 or bl14; levels <= 0: floor(ln N). */
FEWNET_API fewnet_status fewnet_mra_create(const double* values, size_t length, const char* filter, int levels,
                                           fewnet_mra** out);
FEWNET_API void fewnet_mra_free(fewnet_mra* mra);
FEWNET_API int fewnet_mra_levels(const fewnet_mra* mra);
FEWNET_API size_t fewnet_mra_length(const fewnet_mra* mra);
/* level is 1-based; returns NULL when out of range. */
FEWNET_API const double* fewnet_mra_detail(const fewnet_mra* mra, int level);
FEWNET_API const double* fewnet_mra_smooth(const fewnet_mra* mra);

/* ---- economic filters; outputs hold `length` values ---- */
FEWNET_API fewnet_status fewnet_hp_filter(const double* values, size_t length, double lambda, double* trend,
                                          double* cycle);
FEWNET_API fewnet_status fewnet_cf_filter(const double* values, size_t length, double lower_period,
                                          double upper_period, double* cycle);

/* ---- metrics ---- */
typedef struct fewnet_metrics {
    double rmse;
    double mase;
    double smape;
    double theils_u1;
    double mdrae;
    double mdape;
    int mase_defined;
    int mdrae_defined;
    int mdape_defined;
} fewnet_metrics;

FEWNET_API fewnet_status fewnet_compute_metrics(const double* actual, const double* forecast, size_t horizon,
                                                const double* train, size_t train_length, size_t seasonal_lag,
                                                const double* naive, fewnet_metrics* out);

/* ---- baselines; `out` holds `horizon` values ---- */
FEWNET_API fewnet_status fewnet_rw_forecast(const double* train, size_t length, size_t horizon, double* out);
FEWNET_API fewnet_status fewnet_rwd_forecast(const double* train, size_t length, size_t horizon, double* out);
FEWNET_API fewnet_status fewnet_ar_forecast(const double* train, size_t length, size_t max_order, size_t horizon,
                                            double* out, size_t* selected_order);

/* ---- FEWNet model ----
 * settings_json: JSON object with the model parameters accepted in experiment
 * configs (wavelet, levels, p_grid, use_econ_filters, epochs, ...) plus "seed"
 * and "threads"; NULL or "" takes the defaults. log_epu and gprc may be NULL
 * when use_econ_filters is false. */
FEWNET_API fewnet_status fewnet_model_fit(const fewnet_series* target, const fewnet_series* log_epu,
                                          const fewnet_series* gprc, const char* settings_json, fewnet_model** out);
FEWNET_API void fewnet_model_free(fewnet_model* model);
FEWNET_API fewnet_status fewnet_model_info(const fewnet_model* model, size_t* p, size_t* q, int* levels,
                                           size_t* components);
FEWNET_API fewnet_status fewnet_model_forecast(const fewnet_model* model, size_t horizon, double* out);
/* component < levels: detail component + 1; component == levels: smooth. */
FEWNET_API fewnet_status fewnet_model_component_forecast(const fewnet_model* model, size_t component, size_t horizon,
                                                         double* out);
FEWNET_API fewnet_status fewnet_model_empirical_risk(const fewnet_model* model, double* out);
FEWNET_API fewnet_status fewnet_model_save(const fewnet_model* model, const char* path);
FEWNET_API fewnet_status fewnet_model_load(const char* path, fewnet_model** out);

/* ---- conformal intervals; scale: "unit" or "rolling_mad" ---- */
FEWNET_API fewnet_status fewnet_conformal_intervals(const double* calibration_actual,
                                                    const double* calibration_predicted, size_t calibration_length,
                                                    const double* point_forecast, size_t horizon, size_t kappa,
                                                    double alpha, const char* scale, double* lower, double* upper);

/* ---- experiment runner ---- */
typedef struct fewnet_run_options {
    const char* output_dir; /* NULL: from the config */
    int override_seed;      /* nonzero: use `seed` */
    uint64_t seed;
    unsigned threads;       /* 0: from the config */
} fewnet_run_options;

/* On FEWNET_ERR_CONFIG, *messages (if non-NULL) receives one error per line. */
FEWNET_API fewnet_status fewnet_config_validate(const char* config_path, char** messages);
/* *report receives the report JSON. Failures map to FEWNET_ERR_CONFIG, _DATA,
 * _TRAINING, _EVALUATION or _IO by pipeline stage. */
FEWNET_API fewnet_status fewnet_run_experiment(const char* config_path, const fewnet_run_options* options,
                                               char** report);
/* levels <= 0: floor(ln N). */
FEWNET_API fewnet_status fewnet_decompose_csv(const char* series_path, const char* date_column,
                                              const char* value_column, const char* filter, int levels,
                                              char** csv_out);
FEWNET_API fewnet_status fewnet_metrics_from_csv(const char* actual_path, const char* forecast_path,
                                                 size_t seasonal_lag, char** csv_out);

#ifdef __cplusplus
}
#endif

#endif

#include "ensemble.hpp"

#include "csv.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "seed.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fewnet {

namespace {

constexpr std::size_t kMaxGridP = 24;

}  // namespace

std::size_t hidden_size(std::size_t p) {
    if (p % 2 == 1) return std::max<std::size_t>((p + 1) / 2, 1);
    // (p + 1) / 2 = p/2 + 0.5: pick the even neighbour.
    const std::size_t low = p / 2;
    return std::max<std::size_t>(low % 2 == 0 ? low : low + 1, 1);
}

std::vector<std::size_t> default_p_grid(std::size_t n_exog) {
    std::vector<std::size_t> grid;
    for (std::size_t p = n_exog + 1; p <= kMaxGridP; ++p) grid.push_back(p);
    return grid;
}

std::vector<std::size_t> FewnetConfig::grid() const { return p_grid.empty() ? default_p_grid(n_exog()) : p_grid; }

void FewnetConfig::validate() const {
    (void)filter_coefficients(wavelet);
    if (levels && *levels < 1) throw Error(Errc::domain, "decomposition level must be at least 1");
    for (std::size_t p : grid()) {
        if (p <= n_exog()) {
            throw Error(Errc::domain, "p = " + std::to_string(p) + " must exceed the " + std::to_string(n_exog()) +
                                          " exogenous inputs");
        }
    }
    if (cv_folds < 1) throw Error(Errc::domain, "cv_folds must be at least 1");
    if (cv_horizon < 1) throw Error(Errc::domain, "cv_horizon must be at least 1");
    ArnnxConfig probe;
    probe.p = n_exog() + 1;
    probe.n_exog = n_exog();
    probe.training = training;
    probe.validate();
    for (int level : zero_detail_levels) {
        if (level < 1) throw Error(Errc::domain, "zeroed detail levels are 1-based");
    }
}

FewnetData FewnetData::slice(std::size_t offset, std::size_t count) const {
    FewnetData out{target.slice(offset, count), std::nullopt, std::nullopt};
    if (log_epu) out.log_epu = log_epu->slice(offset, count);
    if (gprc) out.gprc = gprc->slice(offset, count);
    return out;
}

std::optional<FeatureMatrix> exogenous_matrix(const FewnetData& data, const FewnetConfig& config) {
    if (!config.use_econ_filters) return std::nullopt;
    if (!data.log_epu || !data.gprc) throw Error(Errc::shape, "econ filters need the EPU and GPRC series");
    const auto features = build_exogenous(data.target, *data.log_epu, *data.gprc, config.filters);
    return FeatureMatrix{features.size(), ExogenousFeatures::kColumns, features.row_major()};
}

std::span<const double> FewnetModel::component_series(std::size_t k) const {
    if (k < mra.details.size()) return mra.details[k];
    if (k == mra.details.size()) return mra.smooth;
    throw Error(Errc::bounds, "component index out of range");
}

DesignSet FewnetModel::component_design(std::size_t k) const {
    return make_design(component_series(k), lags(), exog ? &*exog : nullptr);
}

FewnetModel fit_fixed(const FewnetData& data, const FewnetConfig& config, std::size_t p) {
    config.validate();
    const std::size_t n = data.target.size();
    FewnetModel model;
    model.config = config;
    model.levels = config.levels.value_or(default_level(n));
    model.p = p;
    model.q = hidden_size(p);
    model.start = data.target.start();
    model.target = data.target.values();
    model.exog = exogenous_matrix(data, config);
    if (p <= model.n_exog()) throw Error(Errc::domain, "p must exceed the exogenous column count");

    const auto filter = filter_coefficients(config.wavelet);
    model.mra = mra(modwt(data.target.view(), filter, model.levels));

    const std::size_t count = static_cast<std::size_t>(model.levels) + 1;
    std::vector<DesignSet> designs;
    designs.reserve(count);
    for (std::size_t k = 0; k < count; ++k) designs.push_back(model.component_design(k));

    model.components.resize(count);
    parallel_for(count, config.threads, [&](std::size_t k) {
        ArnnxConfig c;
        c.p = p;
        c.q = model.q;
        c.n_exog = model.n_exog();
        c.training = config.training;
        c.seed = derive_seed(config.seed, "component", k);
        model.components[k] = train_arnnx(designs[k], c);
    });
    return model;
}

SelectionResult select_p(const FewnetData& data, const FewnetConfig& config, const FoldSet& folds) {
    config.validate();
    if (folds.folds.empty()) throw Error(Errc::selection, "no cross-validation folds");
    const auto grid = config.grid();
    SelectionResult result;
    result.candidates.resize(grid.size());

    FewnetConfig inner = config;
    inner.threads = 1;
    parallel_for(grid.size(), config.threads, [&](std::size_t i) {
        CandidateScore& score = result.candidates[i];
        score.p = grid[i];
        try {
            for (std::size_t f = 0; f < folds.folds.size(); ++f) {
                const Fold& fold = folds.folds[f];
                FewnetConfig fold_config = inner;
                fold_config.seed = derive_seed(config.seed, "fold", f);
                const auto model = fit_fixed(data.slice(fold.train.begin, fold.train.size()), fold_config, grid[i]);
                const auto predicted = forecast(model, fold.validation.size());
                const auto actual = data.target.view().subspan(fold.validation.begin, fold.validation.size());
                score.fold_smape.push_back(smape_percent(actual, predicted));
            }
            double sum = 0.0;
            for (double v : score.fold_smape) sum += v;
            score.mean_smape = sum / static_cast<double>(score.fold_smape.size());
        } catch (const Error& e) {
            score.failure = e.what();
        }
    });

    const CandidateScore* best = nullptr;
    for (const auto& c : result.candidates) {
        if (!c.mean_smape) continue;
        if (best == nullptr || *c.mean_smape < *best->mean_smape ||
            (*c.mean_smape == *best->mean_smape && c.p < best->p)) {
            best = &c;
        }
    }
    if (best == nullptr) {
        std::string detail = result.candidates.empty() ? std::string("empty grid") : result.candidates.front().failure;
        throw Error(Errc::selection, "every candidate p failed (first failure: " + detail + ")");
    }
    result.p = best->p;
    return result;
}

FewnetModel fit(const FewnetData& data, const FewnetConfig& config) {
    config.validate();
    const auto grid = config.grid();
    SelectionResult selection;
    if (grid.size() == 1) {
        selection.p = grid.front();
        selection.candidates.push_back({grid.front(), {}, std::nullopt, {}});
    } else {
        const auto folds = rolling_origin_folds(data.target.size(), config.cv_folds, config.cv_horizon);
        selection = select_p(data, config, folds);
    }
    FewnetModel model = fit_fixed(data, config, selection.p);
    model.selection = std::move(selection);
    return model;
}

std::vector<std::vector<double>> forecast_components(const FewnetModel& model, std::size_t horizon,
                                                     std::span<const double> future_exog) {
    ExogPolicy policy;
    if (model.exog) {
        const auto last = model.exog->row(model.exog->rows - 1);
        policy.last_observed.assign(last.begin(), last.end());
        policy.future.assign(future_exog.begin(), future_exog.end());
    }
    std::vector<std::vector<double>> out;
    out.reserve(model.components.size());
    const auto& zeroed = model.config.zero_detail_levels;
    for (std::size_t k = 0; k < model.components.size(); ++k) {
        const bool is_detail = k < model.mra.details.size();
        if (is_detail && std::find(zeroed.begin(), zeroed.end(), static_cast<int>(k + 1)) != zeroed.end()) {
            out.emplace_back(horizon, 0.0);
            continue;
        }
        out.push_back(forecast_recursive(model.components[k], model.component_series(k), policy, horizon));
    }
    return out;
}

std::vector<double> forecast(const FewnetModel& model, std::size_t horizon, std::span<const double> future_exog) {
    const auto parts = forecast_components(model, horizon, future_exog);
    std::vector<double> total(horizon, 0.0);
    for (const auto& part : parts) {
        for (std::size_t h = 0; h < horizon; ++h) total[h] += part[h];
    }
    return total;
}

InSampleFit ensemble_in_sample(const FewnetModel& model) {
    InSampleFit fit;
    fit.first_row = model.lags();
    const std::size_t rows = model.target.size() - fit.first_row;
    fit.predicted.assign(rows, 0.0);
    fit.residual_sum.assign(rows, 0.0);
    for (std::size_t k = 0; k < model.components.size(); ++k) {
        const auto design = model.component_design(k);
        const auto pred = in_sample_predictions(model.components[k], design);
        for (std::size_t r = 0; r < rows; ++r) {
            fit.predicted[r] += pred[r];
            fit.residual_sum[r] += design.target(r) - pred[r];
        }
    }
    fit.actual.assign(model.target.begin() + static_cast<std::ptrdiff_t>(fit.first_row), model.target.end());
    return fit;
}

double empirical_risk_w(const FewnetModel& model) {
    const auto fit = ensemble_in_sample(model);
    double s = 0.0;
    for (double r : fit.residual_sum) s += r * r;
    return s / static_cast<double>(fit.residual_sum.size());
}

double empirical_risk_raw(const FewnetData& data, const FewnetConfig& config, std::size_t p) {
    config.validate();
    const auto exog = exogenous_matrix(data, config);
    ArnnxConfig c;
    c.p = p;
    c.q = hidden_size(p);
    c.n_exog = config.n_exog();
    c.training = config.training;
    c.seed = derive_seed(config.seed, "raw", 0);
    const auto design = make_design(data.target.view(), c.lags(), exog ? &*exog : nullptr);
    const auto model = train_arnnx(design, c);
    return empirical_risk(in_sample_predictions(model, design), design.targets);
}

namespace {

void write_row(std::ostream& out, std::string_view label, std::span<const double> values) {
    out << label << ' ' << values.size();
    for (double v : values) out << ' ' << csv::format_double(v);
    out << '\n';
}

std::vector<double> read_row(TextReader& in, std::string_view label) {
    in.expect(label);
    std::vector<double> v(in.integer());
    for (auto& x : v) x = in.number();
    return v;
}

}  // namespace

std::string serialize(const FewnetModel& model) {
    const auto& c = model.config;
    std::ostringstream out;
    out << "fewnet 1\n";
    out << "wavelet " << c.wavelet << " levels " << model.levels << " p " << model.p << " q " << model.q
        << " econ " << (c.use_econ_filters ? 1 : 0) << " seed " << c.seed << " start " << model.start.to_string()
        << '\n';
    out << "filters " << csv::format_double(c.filters.hp_lambda) << ' ' << csv::format_double(c.filters.cf_lower)
        << ' ' << csv::format_double(c.filters.cf_upper) << '\n';
    out << "training " << c.training.epochs << ' ' << csv::format_double(c.training.learning_rate) << ' '
        << c.training.restarts << '\n';
    out << "cv " << c.cv_folds << ' ' << c.cv_horizon << '\n';
    out << "grid " << c.p_grid.size();
    for (auto p : c.p_grid) out << ' ' << p;
    out << "\nzero " << c.zero_detail_levels.size();
    for (int l : c.zero_detail_levels) out << ' ' << l;
    out << '\n';
    write_row(out, "target", model.target);
    for (const auto& d : model.mra.details) write_row(out, "detail", d);
    write_row(out, "smooth", model.mra.smooth);
    if (model.exog) {
        out << "exog " << model.exog->rows << ' ' << model.exog->cols;
        for (double v : model.exog->data) out << ' ' << csv::format_double(v);
        out << '\n';
    } else {
        out << "exog 0 0\n";
    }
    for (const auto& component : model.components) {
        const auto text = serialize(component);
        out << "component " << text.size() << '\n' << text;
    }
    return out.str();
}

FewnetModel deserialize_fewnet(std::string_view text) {
    TextReader in(text);
    in.expect("fewnet");
    if (in.integer() != 1) throw Error(Errc::format, "unsupported model bundle version");
    FewnetModel m;
    auto& c = m.config;
    in.expect("wavelet");
    c.wavelet = std::string(in.next());
    in.expect("levels");
    m.levels = static_cast<int>(in.integer());
    c.levels = m.levels;
    in.expect("p");
    m.p = in.integer();
    in.expect("q");
    m.q = in.integer();
    in.expect("econ");
    c.use_econ_filters = in.integer() != 0;
    in.expect("seed");
    c.seed = in.integer();
    in.expect("start");
    m.start = YearMonth::parse(in.next());
    in.expect("filters");
    c.filters.hp_lambda = in.number();
    c.filters.cf_lower = in.number();
    c.filters.cf_upper = in.number();
    in.expect("training");
    c.training.epochs = in.integer();
    c.training.learning_rate = in.number();
    c.training.restarts = in.integer();
    in.expect("cv");
    c.cv_folds = in.integer();
    c.cv_horizon = in.integer();
    in.expect("grid");
    c.p_grid.resize(in.integer());
    for (auto& p : c.p_grid) p = in.integer();
    in.expect("zero");
    c.zero_detail_levels.resize(in.integer());
    for (auto& l : c.zero_detail_levels) l = static_cast<int>(in.integer());
    m.target = read_row(in, "target");
    for (int k = 0; k < m.levels; ++k) m.mra.details.push_back(read_row(in, "detail"));
    m.mra.smooth = read_row(in, "smooth");
    in.expect("exog");
    const std::size_t rows = in.integer();
    const std::size_t cols = in.integer();
    if (rows > 0) {
        FeatureMatrix x{rows, cols, std::vector<double>(rows * cols)};
        for (auto& v : x.data) v = in.number();
        m.exog = std::move(x);
    }
    for (int k = 0; k <= m.levels; ++k) {
        in.expect("component");
        m.components.push_back(deserialize_arnnx(in.block(in.integer())));
    }
    if (m.mra.smooth.size() != m.target.size() || (m.exog && m.exog->rows != m.target.size())) {
        throw Error(Errc::format, "model bundle series lengths disagree");
    }
    m.selection.p = m.p;
    return m;
}

}  // namespace fewnet

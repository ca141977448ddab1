#include "experiment.hpp"

#include "csv.hpp"
#include "error.hpp"
#include "seed.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#ifndef FEWNET_VERSION_STRING
#define FEWNET_VERSION_STRING "0.0.0"
#endif

namespace fewnet {

using json = nlohmann::ordered_json;

const char* stage_name(Stage stage) noexcept {
    switch (stage) {
        case Stage::config: return "config";
        case Stage::data: return "data";
        case Stage::training: return "training";
        case Stage::evaluation: return "evaluation";
        case Stage::output: return "output";
    }
    return "unknown";
}

int exit_code(Stage stage) noexcept {
    switch (stage) {
        case Stage::config: return 2;
        case Stage::data: return 3;
        case Stage::training: return 4;
        case Stage::evaluation: return 5;
        case Stage::output: return 1;
    }
    return 1;
}

const char* model_kind_name(ModelKind kind) noexcept {
    switch (kind) {
        case ModelKind::fewnet: return "fewnet";
        case ModelKind::rw: return "rw";
        case ModelKind::rwd: return "rwd";
        case ModelKind::ar: return "ar";
        case ModelKind::arnnx: return "arnnx";
    }
    return "unknown";
}

bool ModelConfig::needs_exogenous() const noexcept {
    return (kind == ModelKind::fewnet && fewnet.use_econ_filters) || (kind == ModelKind::arnnx && arnnx_econ_filters);
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error(Errc::io, "SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Configuration parsing

namespace {

class ConfigReader {
public:
    explicit ConfigReader(std::vector<std::string>& errors) : errors_(errors) {}

    void error(const std::string& path, const std::string& message) { errors_.push_back(path + ": " + message); }

    void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
        for (const auto& [key, value] : obj.items()) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
                error(join(path, key), "unknown key");
            }
        }
    }

    const json* object(const json& parent, const std::string& path, const char* key, bool required) {
        const auto it = parent.find(key);
        if (it == parent.end()) {
            if (required) error(join(path, key), "is required");
            return nullptr;
        }
        if (!it->is_object()) {
            error(join(path, key), "must be an object");
            return nullptr;
        }
        return &*it;
    }

    template <class T>
    void read(const json& parent, const std::string& path, const char* key, T& out, bool required = false) {
        const auto it = parent.find(key);
        if (it == parent.end()) {
            if (required) error(join(path, key), "is required");
            return;
        }
        convert(*it, join(path, key), out);
    }

    static std::string join(const std::string& path, std::string_view key) {
        return path.empty() ? std::string(key) : path + "." + std::string(key);
    }

    void convert(const json& v, const std::string& path, std::string& out) {
        if (!v.is_string()) return error(path, "must be a string");
        out = v.get<std::string>();
    }
    void convert(const json& v, const std::string& path, bool& out) {
        if (!v.is_boolean()) return error(path, "must be true or false");
        out = v.get<bool>();
    }
    void convert(const json& v, const std::string& path, double& out) {
        if (!v.is_number()) return error(path, "must be a number");
        out = v.get<double>();
        if (!std::isfinite(out)) error(path, "must be finite");
    }
    void convert(const json& v, const std::string& path, std::uint64_t& out) {
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            return error(path, "must be a non-negative integer");
        }
        out = v.get<std::uint64_t>();
    }
    void convert(const json& v, const std::string& path, int& out) {
        if (!v.is_number_integer()) return error(path, "must be an integer");
        out = v.get<int>();
    }
    void convert(const json& v, const std::string& path, unsigned& out) {
        std::uint64_t tmp = 0;
        const auto before = errors_.size();
        convert(v, path, tmp);
        if (errors_.size() == before) out = static_cast<unsigned>(tmp);
    }
    template <class T>
    void convert(const json& v, const std::string& path, std::vector<T>& out) {
        if (!v.is_array()) return error(path, "must be an array");
        out.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            T item{};
            convert(v[i], path + "[" + std::to_string(i) + "]", item);
            out.push_back(item);
        }
    }

private:
    std::vector<std::string>& errors_;
};

std::string csv_optional(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); }

bool alpha_in(double alpha, std::initializer_list<double> allowed) {
    return std::any_of(allowed.begin(), allowed.end(), [&](double a) { return std::abs(a - alpha) < 1e-9; });
}

std::optional<SeriesInput> read_series_input(ConfigReader& r, const json& parent, const std::string& path,
                                             const char* key, bool required, std::initializer_list<std::string_view> extra,
                                             const json** node_out = nullptr) {
    const json* node = r.object(parent, path, key, required);
    if (node_out != nullptr) *node_out = node;
    if (node == nullptr) return std::nullopt;
    const std::string p = ConfigReader::join(path, key);
    std::vector<std::string_view> allowed{"path", "date_column", "value_column"};
    allowed.insert(allowed.end(), extra.begin(), extra.end());
    for (const auto& [k, v] : node->items()) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) r.error(ConfigReader::join(p, k), "unknown key");
    }
    SeriesInput in;
    r.read(*node, p, "path", in.path, true);
    r.read(*node, p, "date_column", in.date_column);
    r.read(*node, p, "value_column", in.value_column);
    return in;
}

void read_training(ConfigReader& r, const json& params, const std::string& path, TrainingOptions& t) {
    r.read(params, path, "epochs", t.epochs);
    r.read(params, path, "learning_rate", t.learning_rate);
    r.read(params, path, "restarts", t.restarts);
    if (t.epochs < 1) r.error(ConfigReader::join(path, "epochs"), "must be at least 1");
    if (!(t.learning_rate > 0.0)) r.error(ConfigReader::join(path, "learning_rate"), "must be positive");
    if (t.restarts < 1) r.error(ConfigReader::join(path, "restarts"), "must be at least 1");
}

ModelConfig read_model(ConfigReader& r, const json& node, const std::string& path) {
    ModelConfig m;
    if (!node.is_object()) {
        r.error(path, "must be an object");
        return m;
    }
    r.check_keys(node, path, {"name", "type", "params"});
    std::string type;
    r.read(node, path, "type", type, true);
    if (type == "fewnet") m.kind = ModelKind::fewnet;
    else if (type == "rw") m.kind = ModelKind::rw;
    else if (type == "rwd") m.kind = ModelKind::rwd;
    else if (type == "ar") m.kind = ModelKind::ar;
    else if (type == "arnnx") m.kind = ModelKind::arnnx;
    else if (!type.empty()) r.error(ConfigReader::join(path, "type"), "unknown model type '" + type + "'");
    m.name = type;
    r.read(node, path, "name", m.name);
    if (m.name.empty()) r.error(ConfigReader::join(path, "name"), "must not be empty");

    static const json kEmpty = json::object();
    const json* params = r.object(node, path, "params", false);
    if (params == nullptr) params = &kEmpty;
    const std::string pp = ConfigReader::join(path, "params");
    switch (m.kind) {
        case ModelKind::fewnet: {
            r.check_keys(*params, pp, {"wavelet", "levels", "p_grid", "use_econ_filters", "hp_lambda", "cf_lower",
                                       "cf_upper", "epochs", "learning_rate", "restarts", "cv_folds", "cv_horizon",
                                       "zero_detail_levels"});
            auto& f = m.fewnet;
            r.read(*params, pp, "wavelet", f.wavelet);
            const auto& names = filter_names();
            if (std::find(names.begin(), names.end(), f.wavelet) == names.end()) {
                r.error(ConfigReader::join(pp, "wavelet"), "unknown wavelet filter '" + f.wavelet + "'");
            }
            if (params->contains("levels")) {
                int levels = 0;
                r.read(*params, pp, "levels", levels);
                if (levels < 1) r.error(ConfigReader::join(pp, "levels"), "must be at least 1");
                f.levels = levels;
            }
            r.read(*params, pp, "use_econ_filters", f.use_econ_filters);
            r.read(*params, pp, "p_grid", f.p_grid);
            if (params->contains("p_grid") && f.p_grid.empty()) {
                r.error(ConfigReader::join(pp, "p_grid"), "must not be empty");
            }
            for (std::size_t i = 0; i < f.p_grid.size(); ++i) {
                if (f.p_grid[i] <= f.n_exog()) {
                    r.error(ConfigReader::join(pp, "p_grid") + "[" + std::to_string(i) + "]",
                            "p = " + std::to_string(f.p_grid[i]) + " must exceed the " + std::to_string(f.n_exog()) +
                                " exogenous inputs (n_exog) used with econ filters");
                }
            }
            r.read(*params, pp, "hp_lambda", f.filters.hp_lambda);
            r.read(*params, pp, "cf_lower", f.filters.cf_lower);
            r.read(*params, pp, "cf_upper", f.filters.cf_upper);
            if (f.filters.hp_lambda < 0.0) r.error(ConfigReader::join(pp, "hp_lambda"), "must be >= 0");
            if (!(f.filters.cf_lower >= 2.0 && f.filters.cf_upper > f.filters.cf_lower)) {
                r.error(ConfigReader::join(pp, "cf_lower"), "CF band needs 2 <= cf_lower < cf_upper");
            }
            read_training(r, *params, pp, f.training);
            r.read(*params, pp, "cv_folds", f.cv_folds);
            r.read(*params, pp, "cv_horizon", f.cv_horizon);
            if (f.cv_folds < 1) r.error(ConfigReader::join(pp, "cv_folds"), "must be at least 1");
            if (f.cv_horizon < 1) r.error(ConfigReader::join(pp, "cv_horizon"), "must be at least 1");
            r.read(*params, pp, "zero_detail_levels", f.zero_detail_levels);
            for (std::size_t i = 0; i < f.zero_detail_levels.size(); ++i) {
                if (f.zero_detail_levels[i] < 1) {
                    r.error(ConfigReader::join(pp, "zero_detail_levels") + "[" + std::to_string(i) + "]",
                            "levels are 1-based");
                }
            }
            break;
        }
        case ModelKind::ar:
            r.check_keys(*params, pp, {"max_order"});
            r.read(*params, pp, "max_order", m.ar_max_order);
            if (m.ar_max_order < 1) r.error(ConfigReader::join(pp, "max_order"), "must be at least 1");
            break;
        case ModelKind::arnnx: {
            r.check_keys(*params, pp, {"p", "use_econ_filters", "epochs", "learning_rate", "restarts"});
            r.read(*params, pp, "p", m.arnnx_p);
            r.read(*params, pp, "use_econ_filters", m.arnnx_econ_filters);
            const std::size_t n_exog = m.arnnx_econ_filters ? ExogenousFeatures::kColumns : 0;
            if (m.arnnx_p <= n_exog) {
                r.error(ConfigReader::join(pp, "p"), "p = " + std::to_string(m.arnnx_p) + " must exceed the " +
                                                         std::to_string(n_exog) + " exogenous inputs (n_exog)");
            }
            read_training(r, *params, pp, m.arnnx_training);
            break;
        }
        case ModelKind::rw:
        case ModelKind::rwd:
            r.check_keys(*params, pp, {});
            break;
    }
    return m;
}

DatasetConfig read_dataset(ConfigReader& r, const json& node, const std::string& path, std::size_t index) {
    DatasetConfig d;
    d.name = "dataset" + std::to_string(index + 1);
    if (!node.is_object()) {
        r.error(path, "must be an object");
        return d;
    }
    r.check_keys(node, path, {"name", "cpi", "epu", "gprc", "split", "external_forecasts"});
    r.read(node, path, "name", d.name);
    const json* cpi_node = nullptr;
    if (auto cpi = read_series_input(r, node, path, "cpi", true, {"kind"}, &cpi_node)) d.cpi = *cpi;
    if (cpi_node != nullptr) {
        std::string kind = "index";
        r.read(*cpi_node, path + ".cpi", "kind", kind);
        if (kind == "index") d.cpi_kind = CpiKind::index;
        else if (kind == "inflation") d.cpi_kind = CpiKind::inflation;
        else r.error(path + ".cpi.kind", "must be 'index' or 'inflation'");
    }
    const json* epu_node = nullptr;
    d.epu = read_series_input(r, node, path, "epu", false, {"apply_log"}, &epu_node);
    if (epu_node != nullptr) r.read(*epu_node, path + ".epu", "apply_log", d.epu_apply_log);
    d.gprc = read_series_input(r, node, path, "gprc", false, {});

    if (const json* split = r.object(node, path, "split", true)) {
        r.check_keys(*split, path + ".split", {"train_end", "horizon"});
        std::string end;
        r.read(*split, path + ".split", "train_end", end, true);
        if (!end.empty()) {
            try {
                d.split.train_end = YearMonth::parse(end);
            } catch (const Error& e) {
                r.error(path + ".split.train_end", e.what());
            }
        }
        r.read(*split, path + ".split", "horizon", d.split.horizon, true);
        if (split->contains("horizon") && d.split.horizon < 1) r.error(path + ".split.horizon", "must be at least 1");
    }
    if (node.contains("external_forecasts")) {
        std::string p;
        r.read(node, path, "external_forecasts", p);
        d.external_forecasts = p;
    }
    return d;
}

void read_evaluation(ConfigReader& r, const json& node, ExperimentConfig& c) {
    const std::string path = "evaluation";
    r.check_keys(node, path, {"seasonal_lag", "mcb", "gr", "conformal"});
    auto& e = c.evaluation;
    r.read(node, path, "seasonal_lag", e.seasonal_lag);
    if (e.seasonal_lag < 1) r.error(path + ".seasonal_lag", "must be at least 1");

    std::set<std::string> model_names;
    for (const auto& m : c.models) model_names.insert(m.name);

    if (const json* mcb = r.object(node, path, "mcb", false)) {
        McbOptions o;
        r.check_keys(*mcb, path + ".mcb", {"alpha", "metric"});
        r.read(*mcb, path + ".mcb", "alpha", o.alpha);
        r.read(*mcb, path + ".mcb", "metric", o.metric);
        if (!alpha_in(o.alpha, {0.01, 0.05, 0.10})) r.error(path + ".mcb.alpha", "must be 0.01, 0.05 or 0.10");
        const auto& names = metric_names();
        if (std::find(names.begin(), names.end(), o.metric) == names.end()) {
            r.error(path + ".mcb.metric", "unknown metric '" + o.metric + "'");
        }
        if (c.datasets.size() < 2) r.error(path + ".mcb", "needs at least two datasets");
        e.mcb = o;
    }
    if (const json* gr = r.object(node, path, "gr", false)) {
        GrOptions o;
        const std::string gp = path + ".gr";
        r.check_keys(*gr, gp, {"pairs", "mu", "alpha"});
        r.read(*gr, gp, "mu", o.mu);
        r.read(*gr, gp, "alpha", o.alpha);
        if (!(o.mu > 0.0 && o.mu < 1.0)) r.error(gp + ".mu", "must lie in (0, 1)");
        if (!alpha_in(o.alpha, {0.05, 0.10})) r.error(gp + ".alpha", "must be 0.05 or 0.10");
        const auto it = gr->find("pairs");
        if (it == gr->end() || !it->is_array() || it->empty()) {
            r.error(gp + ".pairs", "must be a non-empty array of [model_a, model_b] pairs");
        } else {
            for (std::size_t i = 0; i < it->size(); ++i) {
                const auto& pair = (*it)[i];
                const std::string ip = gp + ".pairs[" + std::to_string(i) + "]";
                if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
                    r.error(ip, "must be a pair of model names");
                    continue;
                }
                o.pairs.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
                if (o.pairs.back().first == o.pairs.back().second) r.error(ip, "compares a model with itself");
            }
        }
        e.gr = o;
    }
    if (const json* conf = r.object(node, path, "conformal", false)) {
        ConformalOptions o;
        const std::string cp = path + ".conformal";
        r.check_keys(*conf, cp, {"model", "alpha", "kappa", "scale", "calibration_length"});
        r.read(*conf, cp, "model", o.model, true);
        r.read(*conf, cp, "alpha", o.config.alpha);
        r.read(*conf, cp, "kappa", o.config.kappa);
        std::string scale = scale_model_name(o.config.scale);
        r.read(*conf, cp, "scale", scale);
        try {
            o.config.scale = parse_scale_model(scale);
        } catch (const Error& err) {
            r.error(cp + ".scale", err.what());
        }
        r.read(*conf, cp, "calibration_length", o.calibration_length);
        if (!(o.config.alpha > 0.0 && o.config.alpha < 1.0)) r.error(cp + ".alpha", "must lie in (0, 1)");
        if (o.config.kappa < 1) r.error(cp + ".kappa", "must be at least 1");
        if (o.calibration_length < 1) r.error(cp + ".calibration_length", "must be at least 1");
        if (!o.model.empty() && !model_names.contains(o.model)) {
            r.error(cp + ".model", "unknown model '" + o.model + "'");
        }
        e.conformal = o;
    }
}

}  // namespace

ConfigValidation validate_config_text(const std::string& text, const std::filesystem::path& base_dir) {
    ConfigValidation result;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        result.errors.push_back(std::string("config: not valid JSON (") + e.what() + ")");
        return result;
    }
    if (!root.is_object()) {
        result.errors.emplace_back("config: top level must be an object");
        return result;
    }
    ConfigReader r(result.errors);
    ExperimentConfig c;
    c.base_dir = base_dir;
    r.check_keys(root, "", {"config_version", "seed", "datasets", "models", "evaluation", "output_dir", "threads"});
    r.read(root, "", "config_version", c.config_version, true);
    if (root.contains("config_version") && c.config_version != kConfigVersion) {
        r.error("config_version", "unsupported version " + std::to_string(c.config_version) + " (expected " +
                                      std::to_string(kConfigVersion) + ")");
    }
    r.read(root, "", "seed", c.seed, true);
    r.read(root, "", "output_dir", c.output_dir);
    r.read(root, "", "threads", c.threads);
    if (c.threads < 1) r.error("threads", "must be at least 1");

    const auto ds = root.find("datasets");
    if (ds == root.end() || !ds->is_array() || ds->empty()) {
        r.error("datasets", "must be a non-empty array");
    } else {
        for (std::size_t i = 0; i < ds->size(); ++i) {
            c.datasets.push_back(read_dataset(r, (*ds)[i], "datasets[" + std::to_string(i) + "]", i));
        }
    }
    const auto ms = root.find("models");
    if (ms == root.end() || !ms->is_array() || ms->empty()) {
        r.error("models", "must be a non-empty array");
    } else {
        for (std::size_t i = 0; i < ms->size(); ++i) {
            c.models.push_back(read_model(r, (*ms)[i], "models[" + std::to_string(i) + "]"));
        }
    }

    std::set<std::string> seen;
    for (std::size_t i = 0; i < c.models.size(); ++i) {
        if (!seen.insert(c.models[i].name).second) {
            r.error("models[" + std::to_string(i) + "].name", "duplicate model name '" + c.models[i].name + "'");
        }
    }
    seen.clear();
    for (std::size_t i = 0; i < c.datasets.size(); ++i) {
        if (!seen.insert(c.datasets[i].name).second) {
            r.error("datasets[" + std::to_string(i) + "].name", "duplicate dataset name '" + c.datasets[i].name + "'");
        }
    }
    const bool needs_exog = std::any_of(c.models.begin(), c.models.end(), [](const auto& m) { return m.needs_exogenous(); });
    if (needs_exog) {
        for (std::size_t i = 0; i < c.datasets.size(); ++i) {
            const std::string p = "datasets[" + std::to_string(i) + "]";
            if (!c.datasets[i].epu) r.error(p + ".epu", "is required when a model uses econ filters");
            if (!c.datasets[i].gprc) r.error(p + ".gprc", "is required when a model uses econ filters");
        }
    }
    if (const json* ev = r.object(root, "", "evaluation", false)) read_evaluation(r, *ev, c);
    if (c.evaluation.mcb && c.models.size() < 2) r.error("evaluation.mcb", "needs at least two models");
    if (c.evaluation.gr) {
        std::set<std::string> names;
        for (const auto& m : c.models) names.insert(m.name);
        // Names from external forecast files are only known at run time.
        const bool external = std::any_of(c.datasets.begin(), c.datasets.end(),
                                          [](const auto& d) { return d.external_forecasts.has_value(); });
        for (std::size_t i = 0; i < c.evaluation.gr->pairs.size(); ++i) {
            for (const auto& name : {c.evaluation.gr->pairs[i].first, c.evaluation.gr->pairs[i].second}) {
                if (!external && !names.contains(name)) {
                    r.error("evaluation.gr.pairs[" + std::to_string(i) + "]", "unknown model '" + name + "'");
                }
            }
        }
    }
    if (result.errors.empty()) result.config = std::move(c);
    return result;
}

ConfigValidation validate_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ConfigValidation v;
        v.errors.push_back("config: cannot open '" + path.string() + "'");
        return v;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return validate_config_text(buf.str(), path.parent_path());
}

namespace {

json series_input_json(const SeriesInput& s) {
    return json{{"path", s.path}, {"date_column", s.date_column}, {"value_column", s.value_column}};
}

json training_json(const TrainingOptions& t) {
    return json{{"epochs", t.epochs}, {"learning_rate", t.learning_rate}, {"restarts", t.restarts}};
}

json config_json(const ExperimentConfig& c) {
    json root;
    root["config_version"] = c.config_version;
    root["seed"] = c.seed;
    json datasets = json::array();
    for (const auto& d : c.datasets) {
        json j;
        j["name"] = d.name;
        j["cpi"] = series_input_json(d.cpi);
        j["cpi"]["kind"] = d.cpi_kind == CpiKind::index ? "index" : "inflation";
        if (d.epu) {
            j["epu"] = series_input_json(*d.epu);
            j["epu"]["apply_log"] = d.epu_apply_log;
        }
        if (d.gprc) j["gprc"] = series_input_json(*d.gprc);
        j["split"] = json{{"train_end", d.split.train_end.to_string()}, {"horizon", d.split.horizon}};
        if (d.external_forecasts) j["external_forecasts"] = *d.external_forecasts;
        datasets.push_back(std::move(j));
    }
    root["datasets"] = std::move(datasets);
    json models = json::array();
    for (const auto& m : c.models) {
        json j{{"name", m.name}, {"type", model_kind_name(m.kind)}};
        json params = json::object();
        switch (m.kind) {
            case ModelKind::fewnet: {
                const auto& f = m.fewnet;
                params["wavelet"] = f.wavelet;
                params["levels"] = f.levels ? json(*f.levels) : json(nullptr);
                params["p_grid"] = f.grid();
                params["use_econ_filters"] = f.use_econ_filters;
                params["hp_lambda"] = f.filters.hp_lambda;
                params["cf_lower"] = f.filters.cf_lower;
                params["cf_upper"] = f.filters.cf_upper;
                params.update(training_json(f.training));
                params["cv_folds"] = f.cv_folds;
                params["cv_horizon"] = f.cv_horizon;
                params["zero_detail_levels"] = f.zero_detail_levels;
                break;
            }
            case ModelKind::ar: params["max_order"] = m.ar_max_order; break;
            case ModelKind::arnnx:
                params["p"] = m.arnnx_p;
                params["use_econ_filters"] = m.arnnx_econ_filters;
                params.update(training_json(m.arnnx_training));
                break;
            case ModelKind::rw:
            case ModelKind::rwd: break;
        }
        j["params"] = std::move(params);
        models.push_back(std::move(j));
    }
    root["models"] = std::move(models);
    const auto& e = c.evaluation;
    json ev{{"seasonal_lag", e.seasonal_lag}};
    if (e.mcb) ev["mcb"] = json{{"alpha", e.mcb->alpha}, {"metric", e.mcb->metric}};
    if (e.gr) {
        json pairs = json::array();
        for (const auto& [a, b] : e.gr->pairs) pairs.push_back(json::array({a, b}));
        ev["gr"] = json{{"pairs", pairs}, {"mu", e.gr->mu}, {"alpha", e.gr->alpha}};
    }
    if (e.conformal) {
        ev["conformal"] = json{{"model", e.conformal->model},
                               {"alpha", e.conformal->config.alpha},
                               {"kappa", e.conformal->config.kappa},
                               {"scale", scale_model_name(e.conformal->config.scale)},
                               {"calibration_length", e.conformal->calibration_length}};
    }
    root["evaluation"] = std::move(ev);
    return root;
}

}  // namespace

std::string effective_config_json(const ExperimentConfig& config) { return config_json(config).dump(2); }

FewnetConfig parse_fewnet_config(const std::string& text) {
    json params;
    try {
        params = text.empty() ? json::object() : json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::config, std::string("model settings are not valid JSON (") + e.what() + ")");
    }
    if (!params.is_object()) throw Error(Errc::config, "model settings must be a JSON object");
    std::vector<std::string> errors;
    ConfigReader r(errors);
    std::uint64_t seed = 0;
    unsigned threads = 1;
    r.read(params, "", "seed", seed);
    r.read(params, "", "threads", threads);
    params.erase("seed");
    params.erase("threads");
    ModelConfig m = read_model(r, json{{"type", "fewnet"}, {"params", params}}, "model");
    if (!errors.empty()) {
        std::string msg;
        for (const auto& e : errors) msg += (msg.empty() ? "" : "; ") + e;
        throw Error(Errc::config, msg);
    }
    m.fewnet.seed = seed;
    m.fewnet.threads = std::max(1u, threads);
    return m.fewnet;
}

std::string decompose_csv(const std::filesystem::path& series_path, const std::string& date_column,
                          const std::string& value_column, const std::string& filter, int levels) {
    const auto series = load_csv(series_path, date_column, value_column);
    const int k = levels > 0 ? levels : default_level(series.size());
    const auto dec = modwt(series.view(), filter_coefficients(filter), k);
    std::ostringstream out;
    write_mra_csv(out, mra(dec));
    return out.str();
}

std::string metrics_csv(const std::filesystem::path& actual_path, const std::filesystem::path& forecast_path,
                        std::size_t seasonal_lag) {
    const auto actual = load_csv(actual_path, "date", "value");
    const auto predicted = load_csv(forecast_path, "date", "value");
    if (predicted.start() <= actual.start() || predicted.last() > actual.last()) {
        throw Error(Errc::bounds, "forecast months must lie inside the actuals and after their first month");
    }
    const std::size_t n_train = actual.index_of(predicted.start());
    const auto train = actual.slice(0, n_train);
    const auto test = actual.slice(n_train, predicted.size());
    const auto naive = rw_forecast(train.view(), predicted.size());
    const auto m = compute_metrics(test.view(), predicted.view(), train.view(), seasonal_lag, naive);
    std::ostringstream out;
    out << "horizon,rmse,mase,smape,theils_u1,mdrae,mdape\n";
    out << predicted.size() << ',' << csv::format_double(m.rmse) << ',' << csv_optional(m.mase) << ','
        << csv::format_double(m.smape_percent) << ',' << csv::format_double(m.theils_u1) << ','
        << csv_optional(m.mdrae) << ',' << csv_optional(m.mdape) << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

struct DatasetInputs {
    FewnetData full;   // aligned, transformed
    FewnetData train;
    TimeSeries test;
    std::map<std::string, std::vector<double>> external;
};

struct ModelRun {
    std::string name;
    std::string type;
    std::vector<double> forecast;
    MetricReport metrics;
    json extra = json::object();
};

struct DatasetRun {
    std::string name;
    DatasetInputs inputs;
    std::vector<ModelRun> models;
    std::vector<json> fluctuation;
    std::optional<IntervalSeries> intervals;
    std::string interval_model;
};

template <class Fn>
auto in_stage(Stage stage, const std::string& context, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, context + ": " + e.what());
    }
}

std::filesystem::path resolve(const ExperimentConfig& c, const std::string& path) {
    const std::filesystem::path p(path);
    return p.is_absolute() ? p : c.base_dir / p;
}

std::map<std::string, std::vector<double>> load_external(const std::filesystem::path& path, std::size_t horizon) {
    const auto table = csv::read(path);
    const auto col_model = table.column("model_name");
    const auto col_step = table.column("step");
    const auto col_value = table.column("value");
    if (!col_model || !col_step || !col_value) {
        throw Error(Errc::format, path.string() + ": external forecasts need columns model_name, step, value");
    }
    std::map<std::string, std::vector<std::optional<double>>> raw;
    for (const auto& row : table.rows) {
        const auto where = path.string() + " line " + std::to_string(row.line);
        const auto& name = row.fields.at(*col_model);
        const auto step = csv::parse_double(row.fields.at(*col_step));
        const auto value = csv::parse_double(row.fields.at(*col_value));
        if (!step || !value || *step < 1 || *step != std::floor(*step) || !std::isfinite(*value)) {
            throw Error(Errc::format, where + ": bad step or value");
        }
        const auto s = static_cast<std::size_t>(*step);
        if (s > horizon) throw Error(Errc::format, where + ": step " + std::to_string(s) + " beyond the horizon");
        auto& slots = raw[name];
        slots.resize(horizon);
        if (slots[s - 1]) throw Error(Errc::format, where + ": duplicate step for model '" + name + "'");
        slots[s - 1] = *value;
    }
    std::map<std::string, std::vector<double>> out;
    for (const auto& [name, slots] : raw) {
        std::vector<double> values;
        for (std::size_t h = 0; h < horizon; ++h) {
            if (!slots[h]) {
                throw Error(Errc::format, path.string() + ": model '" + name + "' lacks step " + std::to_string(h + 1));
            }
            values.push_back(*slots[h]);
        }
        out.emplace(name, std::move(values));
    }
    return out;
}

DatasetInputs load_dataset(const ExperimentConfig& c, const DatasetConfig& d) {
    const auto load = [&](const SeriesInput& in, const char* name) {
        return load_csv(resolve(c, in.path), in.date_column, in.value_column).renamed(name);
    };
    TimeSeries cpi = load(d.cpi, "cpi");
    if (d.cpi_kind == CpiKind::index) cpi = yoy_inflation(cpi).renamed("cpi_inflation");
    std::vector<TimeSeries> series{cpi};
    if (d.epu) {
        TimeSeries epu = load(*d.epu, "epu");
        if (d.epu_apply_log) epu = log_transform(epu).renamed("log_epu");
        series.push_back(std::move(epu));
    }
    if (d.gprc) series.push_back(load(*d.gprc, "gprc"));
    auto aligned = align(series);

    DatasetInputs out{FewnetData{aligned[0], std::nullopt, std::nullopt}, FewnetData{aligned[0], std::nullopt, std::nullopt},
                      aligned[0], {}};
    std::size_t next = 1;
    if (d.epu) out.full.log_epu = aligned[next++];
    if (d.gprc) out.full.gprc = aligned[next++];

    const auto parts = split(out.full.target, d.split);
    const std::size_t n_train = parts.train.size();
    out.train = out.full.slice(0, n_train);
    out.test = parts.test;
    if (d.external_forecasts) out.external = load_external(resolve(c, *d.external_forecasts), d.split.horizon);
    return out;
}

// Point forecast of one configured model fitted on `train`. `extra` collects model-specific report fields.
std::vector<double> run_model(const ModelConfig& m, const FewnetData& train, std::size_t horizon, std::uint64_t seed,
                              unsigned threads, json* extra) {
    const auto y = train.target.view();
    switch (m.kind) {
        case ModelKind::rw: return rw_forecast(y, horizon);
        case ModelKind::rwd: return rwd_forecast(y, horizon);
        case ModelKind::ar: {
            const auto model = ar_fit(y, m.ar_max_order);
            if (extra != nullptr) {
                (*extra)["order"] = model.order;
                (*extra)["intercept"] = model.intercept;
                (*extra)["coefficients"] = model.coefficients;
                (*extra)["aic"] = model.aic;
            }
            return ar_forecast(model, y, horizon);
        }
        case ModelKind::arnnx: {
            FewnetConfig filters_only;
            filters_only.use_econ_filters = m.arnnx_econ_filters;
            const auto exog = exogenous_matrix(train, filters_only);
            ArnnxConfig c;
            c.p = m.arnnx_p;
            c.q = hidden_size(m.arnnx_p);
            c.n_exog = exog ? exog->cols : 0;
            c.training = m.arnnx_training;
            c.seed = seed;
            const auto fit = arnnx_raw_fit(y, exog ? &*exog : nullptr, c);
            ExogPolicy policy;
            if (exog) {
                const auto last = exog->row(exog->rows - 1);
                policy = ExogPolicy::frozen(std::vector<double>(last.begin(), last.end()));
            }
            if (extra != nullptr) {
                (*extra)["p"] = c.p;
                (*extra)["q"] = c.q;
                (*extra)["empirical_risk"] =
                    empirical_risk(in_sample_predictions(fit.model, fit.design), fit.design.targets);
            }
            return forecast_recursive(fit.model, y, policy, horizon);
        }
        case ModelKind::fewnet: {
            FewnetConfig config = m.fewnet;
            config.seed = seed;
            config.threads = threads;
            const auto model = fit(train, config);
            if (extra != nullptr) {
                (*extra)["p"] = model.p;
                (*extra)["q"] = model.q;
                (*extra)["levels"] = model.levels;
                (*extra)["wavelet"] = config.wavelet;
                json cv = json::array();
                for (const auto& cand : model.selection.candidates) {
                    json j{{"p", cand.p}, {"fold_smape", cand.fold_smape}};
                    j["mean_smape"] = cand.mean_smape ? json(*cand.mean_smape) : json(nullptr);
                    if (!cand.failure.empty()) j["failure"] = cand.failure;
                    cv.push_back(std::move(j));
                }
                (*extra)["cross_validation"] = std::move(cv);
                (*extra)["empirical_risk_w"] = empirical_risk_w(model);
                json components = json::array();
                for (const auto& part : forecast_components(model, horizon)) components.push_back(part);
                (*extra)["component_forecasts"] = std::move(components);
            }
            return forecast(model, horizon);
        }
    }
    throw Error(Errc::lookup, "unknown model kind");
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json metrics_json(const MetricReport& m) {
    json j{{"rmse", m.rmse},
           {"mase", optional_number(m.mase)},
           {"smape", m.smape_percent},
           {"theils_u1", m.theils_u1},
           {"mdrae", optional_number(m.mdrae)},
           {"mdape", optional_number(m.mdape)}};
    if (!m.undefined.empty()) j["undefined"] = m.undefined;
    return j;
}

class OutputWriter {
public:
    explicit OutputWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content) {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        written_.push_back(path);
        if (!out) throw Error(Errc::io, "cannot write " + path.string());
        out << content;
        out.close();
        if (!out) throw Error(Errc::io, "failed writing " + path.string());
    }

    void remove_all() noexcept {
        std::error_code ec;
        for (const auto& p : written_) std::filesystem::remove(p, ec);
    }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> written_;
};

}  // namespace

std::string run_experiment(ExperimentConfig config, const RunOptions& options) {
    if (options.output_dir) config.output_dir = *options.output_dir;
    if (options.seed) config.seed = *options.seed;
    if (options.threads) config.threads = std::max(1u, *options.threads);
    const unsigned threads = config.threads;

    const std::string effective = effective_config_json(config);
    const std::string config_hash = sha256_hex(effective);
    const auto& ev = config.evaluation;

    std::vector<DatasetRun> runs;
    for (std::size_t di = 0; di < config.datasets.size(); ++di) {
        const auto& dc = config.datasets[di];
        DatasetRun run{dc.name, in_stage(Stage::data, "dataset '" + dc.name + "'", [&] { return load_dataset(config, dc); }), {}, {}, {}, {}};
        const auto& in = run.inputs;
        const std::size_t horizon = dc.split.horizon;

        for (const auto& m : config.models) {
            ModelRun mr;
            mr.name = m.name;
            mr.type = model_kind_name(m.kind);
            const auto seed = derive_seed(config.seed, "model:" + m.name, di);
            mr.forecast = in_stage(Stage::training, m.name + " on '" + dc.name + "'",
                                   [&] { return run_model(m, in.train, horizon, seed, threads, &mr.extra); });
            run.models.push_back(std::move(mr));
        }
        for (const auto& [name, values] : in.external) {
            const bool clash = std::any_of(run.models.begin(), run.models.end(), [&](const auto& r) { return r.name == name; });
            if (clash) {
                throw StageError(Stage::data, "dataset '" + dc.name + "': external model '" + name +
                                                  "' clashes with a configured model");
            }
            ModelRun mr;
            mr.name = name;
            mr.type = "external";
            mr.forecast = values;
            run.models.push_back(std::move(mr));
        }

        in_stage(Stage::evaluation, "dataset '" + dc.name + "'", [&] {
            const auto actual = in.test.view();
            const auto naive = rw_forecast(in.train.target.view(), horizon);
            for (auto& mr : run.models) mr.metrics = compute_metrics(actual, mr.forecast, in.train.target.view(), ev.seasonal_lag, naive);

            if (ev.gr) {
                const auto find = [&](const std::string& name) -> const ModelRun& {
                    for (const auto& mr : run.models) {
                        if (mr.name == name) return mr;
                    }
                    throw Error(Errc::lookup, "fluctuation test: unknown model '" + name + "'");
                };
                for (const auto& [a, b] : ev.gr->pairs) {
                    const auto& ma = find(a);
                    const auto& mb = find(b);
                    std::vector<double> la(horizon), lb(horizon);
                    for (std::size_t h = 0; h < horizon; ++h) {
                        la[h] = std::pow(actual[h] - ma.forecast[h], 2);
                        lb[h] = std::pow(actual[h] - mb.forecast[h], 2);
                    }
                    const auto fr = gr_fluctuation_test(la, lb, ev.gr->mu, ev.gr->alpha);
                    json points = json::array();
                    for (std::size_t i = 0; i < fr.window_end.size(); ++i) {
                        points.push_back(json{{"step", fr.window_end[i] + 1},
                                              {"date", in.test.date_at(fr.window_end[i]).to_string()},
                                              {"statistic", optional_number(fr.statistic[i])}});
                    }
                    json j{{"dataset", dc.name}, {"model_a", a},     {"model_b", b},
                           {"loss", "squared_error"}, {"mu", fr.mu}, {"table_mu", fr.table_mu},
                           {"alpha", fr.alpha},   {"window", fr.window}, {"critical_value", fr.critical_value},
                           {"rejects_everywhere", fr.rejects_everywhere()}, {"points", std::move(points)}};
                    if (fr.warning) j["warning"] = *fr.warning;
                    run.fluctuation.push_back(std::move(j));
                }
            }
        });

        if (ev.conformal) {
            const auto& co = *ev.conformal;
            const auto mit = std::find_if(config.models.begin(), config.models.end(),
                                          [&](const auto& m) { return m.name == co.model; });
            const std::size_t n = in.train.target.size();
            if (co.calibration_length >= n) {
                throw StageError(Stage::evaluation, "dataset '" + dc.name + "': calibration length " +
                                                        std::to_string(co.calibration_length) +
                                                        " leaves no training data");
            }
            const std::size_t fit_len = n - co.calibration_length;
            const auto calib_pred = in_stage(Stage::training, co.model + " calibration on '" + dc.name + "'", [&] {
                const auto seed = derive_seed(derive_seed(config.seed, "model:" + mit->name, di), "calibration");
                return run_model(*mit, in.train.slice(0, fit_len), co.calibration_length, seed, threads, nullptr);
            });
            run.interval_model = co.model;
            run.intervals = in_stage(Stage::evaluation, "conformal intervals on '" + dc.name + "'", [&] {
                const auto calib_actual = in.train.target.view().subspan(fit_len);
                const auto& point = std::find_if(run.models.begin(), run.models.end(),
                                                 [&](const auto& r) { return r.name == co.model; })
                                        ->forecast;
                return calibrated_intervals(calib_actual, calib_pred, point, co.config);
            });
        }
        runs.push_back(std::move(run));
    }

    json mcb_json;
    if (ev.mcb) {
        in_stage(Stage::evaluation, "MCB test", [&] {
            ErrorMatrix em;
            for (const auto& r : runs) em.datasets.push_back(r.name);
            for (const auto& mr : runs.front().models) {
                std::vector<double> row;
                bool everywhere = true;
                for (const auto& r : runs) {
                    const auto it = std::find_if(r.models.begin(), r.models.end(), [&](const auto& x) { return x.name == mr.name; });
                    if (it == r.models.end()) {
                        everywhere = false;
                        break;
                    }
                    row.push_back(it->metrics.get(ev.mcb->metric));
                }
                if (!everywhere) continue;
                em.models.push_back(mr.name);
                em.losses.push_back(std::move(row));
            }
            const auto res = mcb_test(em, ev.mcb->alpha);
            json models = json::array();
            for (std::size_t i = 0; i < res.models.size(); ++i) {
                models.push_back(json{{"model", res.models[i]},
                                      {"mean_rank", res.mean_rank[i]},
                                      {"lower", res.intervals[i].lower},
                                      {"upper", res.intervals[i].upper},
                                      {"worse_than_best", static_cast<bool>(res.worse_than_best[i])}});
            }
            mcb_json = json{{"metric", ev.mcb->metric},
                            {"alpha", res.alpha},
                            {"datasets", em.datasets},
                            {"critical_distance", res.critical_distance},
                            {"best", res.models[res.best]},
                            {"reference_upper", res.reference_upper},
                            {"models", std::move(models)}};
        });
    }

    // Assemble outputs.
    json report;
    report["provenance"] = json{{"tool", "fewnet"},
                                {"version", FEWNET_VERSION_STRING},
                                {"config_version", config.config_version},
                                {"config_sha256", config_hash},
                                {"seed", config.seed}};
    report["config"] = config_json(config);
    json datasets = json::array();
    std::ostringstream forecasts_csv, metrics_csv, intervals_csv;
    forecasts_csv << "dataset,model,step,date,actual,forecast\n";
    metrics_csv << "dataset,model,horizon,rmse,mase,smape,theils_u1,mdrae,mdape\n";
    intervals_csv << "dataset,model,step,date,lower,center,upper\n";
    json fluctuation = json::array();
    json intervals_json = json::array();
    for (const auto& r : runs) {
        const auto& in = r.inputs;
        json dj;
        dj["name"] = r.name;
        dj["train"] = json{{"start", in.train.target.start().to_string()},
                           {"end", in.train.target.last().to_string()},
                           {"length", in.train.target.size()}};
        dj["test"] = json{{"start", in.test.start().to_string()}, {"end", in.test.last().to_string()}, {"length", in.test.size()}};
        dj["actual"] = in.test.values();
        json models = json::array();
        for (const auto& mr : r.models) {
            json mj{{"name", mr.name}, {"type", mr.type}, {"forecast", mr.forecast}, {"metrics", metrics_json(mr.metrics)}};
            for (const auto& [k, v] : mr.extra.items()) mj[k] = v;
            models.push_back(std::move(mj));
            for (std::size_t h = 0; h < mr.forecast.size(); ++h) {
                forecasts_csv << csv::escape(r.name) << ',' << csv::escape(mr.name) << ',' << (h + 1) << ','
                              << in.test.date_at(h).to_string() << ',' << csv::format_double(in.test[h]) << ','
                              << csv::format_double(mr.forecast[h]) << '\n';
            }
            const auto& m = mr.metrics;
            metrics_csv << csv::escape(r.name) << ',' << csv::escape(mr.name) << ',' << mr.forecast.size() << ','
                        << csv::format_double(m.rmse) << ',' << csv_optional(m.mase) << ','
                        << csv::format_double(m.smape_percent) << ',' << csv::format_double(m.theils_u1) << ','
                        << csv_optional(m.mdrae) << ',' << csv_optional(m.mdape) << '\n';
        }
        dj["models"] = std::move(models);
        datasets.push_back(std::move(dj));
        for (const auto& f : r.fluctuation) fluctuation.push_back(f);
        if (r.intervals) {
            json steps = json::array();
            for (std::size_t h = 0; h < r.intervals->size(); ++h) {
                const auto& iv = (*r.intervals)[h];
                steps.push_back(json{{"step", h + 1},
                                     {"date", in.test.date_at(h).to_string()},
                                     {"lower", number_or_null(iv.lower)},
                                     {"center", iv.center},
                                     {"upper", number_or_null(iv.upper)}});
                intervals_csv << csv::escape(r.name) << ',' << csv::escape(r.interval_model) << ',' << (h + 1) << ','
                              << in.test.date_at(h).to_string() << ',' << csv::format_double(iv.lower) << ','
                              << csv::format_double(iv.center) << ',' << csv::format_double(iv.upper) << '\n';
            }
            intervals_json.push_back(json{{"dataset", r.name},
                                          {"model", r.interval_model},
                                          {"alpha", ev.conformal->config.alpha},
                                          {"kappa", ev.conformal->config.kappa},
                                          {"scale", scale_model_name(ev.conformal->config.scale)},
                                          {"steps", std::move(steps)}});
        }
    }
    report["datasets"] = std::move(datasets);
    report["mcb"] = ev.mcb ? mcb_json : json(nullptr);
    report["fluctuation"] = ev.gr ? fluctuation : json(nullptr);
    report["intervals"] = ev.conformal ? intervals_json : json(nullptr);
    const std::string report_text = report.dump(2) + "\n";

    OutputWriter writer(config.output_dir);
    try {
        std::filesystem::create_directories(config.output_dir);
        writer.write("forecasts.csv", forecasts_csv.str());
        writer.write("metrics.csv", metrics_csv.str());
        if (ev.conformal) writer.write("intervals.csv", intervals_csv.str());
        if (ev.mcb) writer.write("mcb.json", mcb_json.dump(2) + "\n");
        if (ev.gr) writer.write("fluctuation.json", fluctuation.dump(2) + "\n");
        writer.write("report.json", report_text);
    } catch (const std::exception& e) {
        writer.remove_all();
        throw StageError(Stage::output, e.what());
    }
    return report_text;
}

}  // namespace fewnet

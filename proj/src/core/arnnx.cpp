#include "arnnx.hpp"

#include "csv.hpp"
#include "error.hpp"
#include "seed.hpp"
#include "text_io.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace fewnet {

namespace {

constexpr double kScaleFloor = 1e-8;

}  // namespace

void ArnnxConfig::validate() const {
    if (!(p > n_exog)) throw Error(Errc::domain, "input width p must exceed the exogenous column count");
    if (q < 1) throw Error(Errc::domain, "hidden width q must be at least 1");
    if (training.epochs < 1) throw Error(Errc::domain, "epochs must be at least 1");
    if (!(training.learning_rate > 0.0) || !std::isfinite(training.learning_rate)) {
        throw Error(Errc::domain, "learning rate must be positive");
    }
    if (training.restarts < 1) throw Error(Errc::domain, "restarts must be at least 1");
}

DesignSet make_design(std::span<const double> target, std::size_t p_lags, const FeatureMatrix* exog) {
    const std::size_t n = target.size();
    if (p_lags == 0) throw Error(Errc::bounds, "lag order must be at least 1");
    if (p_lags >= n) {
        throw Error(Errc::bounds, "lag order " + std::to_string(p_lags) + " needs more than " +
                                      std::to_string(n) + " observations");
    }
    const std::size_t n_exog = exog != nullptr ? exog->cols : 0;
    if (exog != nullptr && exog->rows != n) {
        throw Error(Errc::shape, "exogenous matrix has " + std::to_string(exog->rows) + " rows for a target of " +
                                     std::to_string(n));
    }
    const std::size_t rows = n - p_lags;
    if (rows < p_lags + n_exog) {
        throw Error(Errc::bounds, "design has " + std::to_string(rows) + " rows for " +
                                      std::to_string(p_lags + n_exog) + " inputs");
    }

    DesignSet d;
    d.lag_count = p_lags;
    d.exog_count = n_exog;
    d.first_target = p_lags;
    d.inputs.reserve(rows * d.width());
    d.targets.reserve(rows);
    for (std::size_t t = p_lags; t < n; ++t) {
        for (std::size_t k = 1; k <= p_lags; ++k) d.inputs.push_back(target[t - k]);
        if (exog != nullptr) {
            const auto x = exog->row(t - 1);
            d.inputs.insert(d.inputs.end(), x.begin(), x.end());
        }
        d.targets.push_back(target[t]);
    }
    return d;
}

double sigmoid(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Network::Network(std::size_t n_inputs, std::size_t n_hidden)
    : inputs(n_inputs),
      hidden(n_hidden),
      input_weights(n_inputs * n_hidden, 0.0),
      hidden_bias(n_hidden, 0.0),
      output_weights(n_hidden, 0.0) {}

double Network::operator()(std::span<const double> x) const {
    double out = output_bias;
    for (std::size_t i = 0; i < hidden; ++i) {
        const double* w = input_weights.data() + i * inputs;
        double z = hidden_bias[i];
        for (std::size_t j = 0; j < inputs; ++j) z += w[j] * x[j];
        out += output_weights[i] * sigmoid(z);
    }
    return out;
}

std::vector<double> Network::parameters() const {
    std::vector<double> p;
    p.reserve(parameter_count());
    p.insert(p.end(), input_weights.begin(), input_weights.end());
    p.insert(p.end(), hidden_bias.begin(), hidden_bias.end());
    p.insert(p.end(), output_weights.begin(), output_weights.end());
    p.push_back(output_bias);
    return p;
}

void Network::set_parameters(std::span<const double> values) {
    if (values.size() != parameter_count()) throw Error(Errc::shape, "parameter vector has the wrong length");
    auto it = values.begin();
    std::copy(it, it + static_cast<std::ptrdiff_t>(input_weights.size()), input_weights.begin());
    it += static_cast<std::ptrdiff_t>(input_weights.size());
    std::copy(it, it + static_cast<std::ptrdiff_t>(hidden), hidden_bias.begin());
    it += static_cast<std::ptrdiff_t>(hidden);
    std::copy(it, it + static_cast<std::ptrdiff_t>(hidden), output_weights.begin());
    it += static_cast<std::ptrdiff_t>(hidden);
    output_bias = *it;
}

double mse_loss_gradient(const Network& net, std::span<const double> inputs, std::span<const double> targets,
                         Network* gradient) {
    const std::size_t rows = targets.size();
    const std::size_t p = net.inputs;
    const std::size_t q = net.hidden;
    if (inputs.size() != rows * p) throw Error(Errc::shape, "input matrix does not match the network width");
    if (gradient != nullptr) *gradient = Network(p, q);

    std::vector<double> h(q);
    double loss = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = inputs.data() + r * p;
        double out = net.output_bias;
        for (std::size_t i = 0; i < q; ++i) {
            const double* w = net.input_weights.data() + i * p;
            double z = net.hidden_bias[i];
            for (std::size_t j = 0; j < p; ++j) z += w[j] * x[j];
            h[i] = sigmoid(z);
            out += net.output_weights[i] * h[i];
        }
        const double err = out - targets[r];
        loss += err * err;
        if (gradient == nullptr) continue;
        gradient->output_bias += err;
        for (std::size_t i = 0; i < q; ++i) {
            gradient->output_weights[i] += err * h[i];
            const double delta = err * net.output_weights[i] * h[i] * (1.0 - h[i]);
            gradient->hidden_bias[i] += delta;
            double* g = gradient->input_weights.data() + i * p;
            for (std::size_t j = 0; j < p; ++j) g[j] += delta * x[j];
        }
    }
    const double inv = 1.0 / static_cast<double>(rows);
    if (gradient != nullptr) {
        const double k = 2.0 * inv;
        for (auto& v : gradient->input_weights) v *= k;
        for (auto& v : gradient->hidden_bias) v *= k;
        for (auto& v : gradient->output_weights) v *= k;
        gradient->output_bias *= k;
    }
    return loss * inv;
}

InputScaling InputScaling::identity(std::size_t width) {
    return InputScaling{std::vector<double>(width, 0.0), std::vector<double>(width, 1.0), 0.0, 1.0};
}

namespace {

std::pair<double, double> mean_sd(const double* data, std::size_t count, std::size_t stride) {
    double mean = 0.0;
    for (std::size_t i = 0; i < count; ++i) mean += data[i * stride];
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double d = data[i * stride] - mean;
        var += d * d;
    }
    var /= static_cast<double>(count);
    return {mean, std::max(std::sqrt(var), kScaleFloor)};
}

Network random_network(std::size_t p, std::size_t q, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Network net(p, q);
    std::vector<double> params(net.parameter_count());
    for (auto& v : params) v = uniform01(rng) - 0.5;
    net.set_parameters(params);
    return net;
}

std::vector<double> standardized_inputs(const ArnnxModel& model, std::span<const double> lags,
                                        std::span<const double> exog) {
    const std::size_t width = model.config.p;
    if (lags.size() != model.config.lags() || exog.size() != model.config.n_exog) {
        throw Error(Errc::shape, "expected " + std::to_string(model.config.lags()) + " lags and " +
                                     std::to_string(model.config.n_exog) + " exogenous values, got " +
                                     std::to_string(lags.size()) + " and " + std::to_string(exog.size()));
    }
    std::vector<double> x(width);
    for (std::size_t j = 0; j < width; ++j) {
        const double raw = j < lags.size() ? lags[j] : exog[j - lags.size()];
        x[j] = (raw - model.scaling.center[j]) / model.scaling.scale[j];
    }
    return x;
}

}  // namespace

ArnnxModel train_arnnx(const DesignSet& design, const ArnnxConfig& config, TrainTrace* trace) {
    config.validate();
    if (design.rows() == 0) throw Error(Errc::bounds, "design set is empty");
    if (design.lag_count != config.lags() || design.exog_count != config.n_exog) {
        throw Error(Errc::shape, "design width does not match the network configuration");
    }
    const std::size_t rows = design.rows();
    const std::size_t width = config.p;

    ArnnxModel model;
    model.config = config;
    model.scaling.center.resize(width);
    model.scaling.scale.resize(width);
    for (std::size_t j = 0; j < width; ++j) {
        const auto [c, s] = mean_sd(design.inputs.data() + j, rows, width);
        model.scaling.center[j] = c;
        model.scaling.scale[j] = s;
    }
    const auto [tc, ts] = mean_sd(design.targets.data(), rows, 1);
    model.scaling.target_center = tc;
    model.scaling.target_scale = ts;

    std::vector<double> x(design.inputs.size());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < width; ++j) {
            x[r * width + j] = (design.inputs[r * width + j] - model.scaling.center[j]) / model.scaling.scale[j];
        }
    }
    std::vector<double> y(rows);
    for (std::size_t r = 0; r < rows; ++r) y[r] = (design.targets[r] - tc) / ts;

    if (trace != nullptr) trace->loss.assign(config.training.restarts, {});
    const double lr = config.training.learning_rate;
    Network grad;
    for (std::size_t restart = 0; restart < config.training.restarts; ++restart) {
        Network net = random_network(width, config.q, derive_seed(config.seed, "restart", restart));
        for (std::size_t epoch = 0; epoch < config.training.epochs; ++epoch) {
            const double loss = mse_loss_gradient(net, x, y, &grad);
            if (!std::isfinite(loss)) {
                throw Error(Errc::divergence, "training diverged in restart " + std::to_string(restart) +
                                                  " at epoch " + std::to_string(epoch));
            }
            if (trace != nullptr) trace->loss[restart].push_back(loss);
            for (std::size_t k = 0; k < net.input_weights.size(); ++k) net.input_weights[k] -= lr * grad.input_weights[k];
            for (std::size_t i = 0; i < net.hidden; ++i) {
                net.hidden_bias[i] -= lr * grad.hidden_bias[i];
                net.output_weights[i] -= lr * grad.output_weights[i];
            }
            net.output_bias -= lr * grad.output_bias;
        }
        const double final_loss = mse_loss_gradient(net, x, y, nullptr);
        if (!std::isfinite(final_loss)) {
            throw Error(Errc::divergence, "training diverged in restart " + std::to_string(restart) + " at epoch " +
                                              std::to_string(config.training.epochs));
        }
        model.networks.push_back(std::move(net));
    }
    return model;
}

double predict_restart(const ArnnxModel& model, std::size_t restart, std::span<const double> lags,
                       std::span<const double> exog) {
    const auto x = standardized_inputs(model, lags, exog);
    return model.networks.at(restart)(x) * model.scaling.target_scale + model.scaling.target_center;
}

double predict_one(const ArnnxModel& model, std::span<const double> lags, std::span<const double> exog) {
    if (model.networks.empty()) throw Error(Errc::shape, "model has no trained networks");
    const auto x = standardized_inputs(model, lags, exog);
    double acc = 0.0;
    for (const auto& net : model.networks) acc += net(x);
    acc /= static_cast<double>(model.networks.size());
    return acc * model.scaling.target_scale + model.scaling.target_center;
}

std::vector<double> in_sample_predictions(const ArnnxModel& model, const DesignSet& design) {
    std::vector<double> out(design.rows());
    for (std::size_t r = 0; r < design.rows(); ++r) out[r] = predict_one(model, design.lags(r), design.exog(r));
    return out;
}

std::span<const double> ExogPolicy::row(std::size_t step) const {
    const std::size_t cols = last_observed.size();
    if (step <= 1 || future.empty()) return last_observed;
    const std::size_t r = step - 2;
    if (cols == 0 || (r + 1) * cols > future.size()) {
        throw Error(Errc::shape, "future exogenous path too short for step " + std::to_string(step));
    }
    return std::span<const double>(future).subspan(r * cols, cols);
}

std::vector<double> forecast_recursive(const ArnnxModel& model, std::span<const double> history,
                                       const ExogPolicy& exog, std::size_t horizon) {
    const std::size_t lags = model.config.lags();
    if (history.size() < lags) {
        throw Error(Errc::bounds, "history of " + std::to_string(history.size()) + " values is shorter than " +
                                      std::to_string(lags) + " lags");
    }
    if (horizon == 0) throw Error(Errc::bounds, "forecast horizon must be at least 1");
    // Window of the most recent values, most recent first.
    std::vector<double> window(lags);
    for (std::size_t k = 0; k < lags; ++k) window[k] = history[history.size() - 1 - k];

    std::vector<double> out;
    out.reserve(horizon);
    for (std::size_t h = 1; h <= horizon; ++h) {
        const double next = predict_one(model, window, model.config.n_exog == 0 ? std::span<const double>{} : exog.row(h));
        out.push_back(next);
        if (lags > 0) {
            for (std::size_t k = lags - 1; k > 0; --k) window[k] = window[k - 1];
            window[0] = next;
        }
    }
    return out;
}

std::string serialize(const ArnnxModel& model) {
    const auto& c = model.config;
    std::ostringstream out;
    out << "arnnx 1\n";
    out << "p " << c.p << " q " << c.q << " n_exog " << c.n_exog << " epochs " << c.training.epochs
        << " learning_rate " << csv::format_double(c.training.learning_rate) << " restarts " << c.training.restarts
        << " seed " << c.seed << '\n';
    out << "scaling " << model.scaling.center.size();
    for (std::size_t j = 0; j < model.scaling.center.size(); ++j) {
        out << ' ' << csv::format_double(model.scaling.center[j]) << ' ' << csv::format_double(model.scaling.scale[j]);
    }
    out << '\n';
    out << "target " << csv::format_double(model.scaling.target_center) << ' '
        << csv::format_double(model.scaling.target_scale) << '\n';
    out << "networks " << model.networks.size() << '\n';
    for (const auto& net : model.networks) {
        const auto params = net.parameters();
        for (std::size_t k = 0; k < params.size(); ++k) out << (k ? " " : "") << csv::format_double(params[k]);
        out << '\n';
    }
    return out.str();
}

ArnnxModel deserialize_arnnx(std::string_view text) {
    TextReader in(text);
    in.expect("arnnx");
    if (in.integer() != 1) throw Error(Errc::format, "unsupported model format version");
    ArnnxModel m;
    in.expect("p");
    m.config.p = in.integer();
    in.expect("q");
    m.config.q = in.integer();
    in.expect("n_exog");
    m.config.n_exog = in.integer();
    in.expect("epochs");
    m.config.training.epochs = in.integer();
    in.expect("learning_rate");
    m.config.training.learning_rate = in.number();
    in.expect("restarts");
    m.config.training.restarts = in.integer();
    in.expect("seed");
    m.config.seed = in.integer();
    m.config.validate();
    in.expect("scaling");
    const std::size_t width = in.integer();
    if (width != m.config.p) throw Error(Errc::format, "scaling width does not match p");
    for (std::size_t j = 0; j < width; ++j) {
        m.scaling.center.push_back(in.number());
        m.scaling.scale.push_back(in.number());
    }
    in.expect("target");
    m.scaling.target_center = in.number();
    m.scaling.target_scale = in.number();
    in.expect("networks");
    const std::size_t count = in.integer();
    for (std::size_t r = 0; r < count; ++r) {
        Network net(m.config.p, m.config.q);
        std::vector<double> params(net.parameter_count());
        for (auto& v : params) v = in.number();
        net.set_parameters(params);
        m.networks.push_back(std::move(net));
    }
    return m;
}

}  // namespace fewnet

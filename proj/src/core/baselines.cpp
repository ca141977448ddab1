#include "baselines.hpp"

#include "error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace fewnet {

std::vector<double> rw_forecast(std::span<const double> train, std::size_t horizon) {
    if (train.empty()) throw Error(Errc::domain, "random walk needs a non-empty training series");
    return std::vector<double>(horizon, train.back());
}

std::vector<double> rwd_forecast(std::span<const double> train, std::size_t horizon) {
    if (train.size() < 2) throw Error(Errc::domain, "random walk with drift needs at least 2 observations");
    const double drift = (train.back() - train.front()) / static_cast<double>(train.size() - 1);
    std::vector<double> out(horizon);
    for (std::size_t h = 1; h <= horizon; ++h) out[h - 1] = train.back() + static_cast<double>(h) * drift;
    return out;
}

ArModel ar_fit_order(std::span<const double> train, std::size_t order, std::size_t sample_start) {
    if (order < 1 || sample_start < order || sample_start >= train.size()) {
        throw Error(Errc::bounds, "AR fit: invalid order or sample start");
    }
    const auto rows = static_cast<Eigen::Index>(train.size() - sample_start);
    const auto cols = static_cast<Eigen::Index>(order + 1);
    if (rows <= cols) throw Error(Errc::bounds, "AR fit: too few observations for order " + std::to_string(order));
    Eigen::MatrixXd x(rows, cols);
    Eigen::VectorXd y(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t t = sample_start + static_cast<std::size_t>(r);
        x(r, 0) = 1.0;
        for (std::size_t k = 1; k <= order; ++k) x(r, static_cast<Eigen::Index>(k)) = train[t - k];
        y(r) = train[t];
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < cols) throw Error(Errc::domain, "AR fit: singular lag design for order " + std::to_string(order));
    const Eigen::VectorXd beta = qr.solve(y);
    const double rss = (y - x * beta).squaredNorm();

    ArModel m;
    m.order = order;
    m.intercept = beta(0);
    for (std::size_t k = 1; k <= order; ++k) m.coefficients.push_back(beta(static_cast<Eigen::Index>(k)));
    const double n = static_cast<double>(rows);
    m.sigma2 = rss / n;
    const double loglik = -0.5 * n * (std::log(2.0 * std::numbers::pi * std::max(m.sigma2, 1e-300)) + 1.0);
    m.aic = -2.0 * loglik + 2.0 * static_cast<double>(order + 2);
    return m;
}

ArModel ar_fit(std::span<const double> train, std::size_t max_order) {
    if (max_order < 1) throw Error(Errc::bounds, "AR maximum order must be at least 1");
    if (train.size() <= max_order + 1) {
        throw Error(Errc::bounds, "AR fit needs more than " + std::to_string(max_order + 1) + " observations");
    }
    ArModel best;
    bool found = false;
    for (std::size_t p = 1; p <= max_order; ++p) {
        ArModel m = ar_fit_order(train, p, max_order);
        if (!found || m.aic < best.aic) {
            best = std::move(m);
            found = true;
        }
    }
    return best;
}

std::vector<double> ar_forecast(const ArModel& model, std::span<const double> train, std::size_t horizon) {
    if (train.size() < model.order) throw Error(Errc::bounds, "AR forecast: history shorter than the order");
    std::vector<double> path(train.end() - static_cast<std::ptrdiff_t>(model.order), train.end());
    std::vector<double> out;
    out.reserve(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        double v = model.intercept;
        for (std::size_t k = 1; k <= model.order; ++k) v += model.coefficients[k - 1] * path[path.size() - k];
        out.push_back(v);
        path.push_back(v);
    }
    return out;
}

double ar_mean(const ArModel& model) {
    double s = 0.0;
    for (double c : model.coefficients) s += c;
    return model.intercept / (1.0 - s);
}

double ar_spectral_radius(const ArModel& model) {
    const auto p = static_cast<Eigen::Index>(model.order);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index k = 0; k < p; ++k) c(0, k) = model.coefficients[static_cast<std::size_t>(k)];
    for (Eigen::Index k = 1; k < p; ++k) c(k, k - 1) = 1.0;
    return Eigen::EigenSolver<Eigen::MatrixXd>(c, false).eigenvalues().cwiseAbs().maxCoeff();
}

RawArnnxFit arnnx_raw_fit(std::span<const double> train, const FeatureMatrix* exog, const ArnnxConfig& config) {
    config.validate();
    if ((exog == nullptr ? 0 : exog->cols) != config.n_exog) {
        throw Error(Errc::shape, "raw ARNNx: exogenous column count does not match n_exog");
    }
    RawArnnxFit fit;
    fit.design = make_design(train, config.lags(), exog);
    fit.model = train_arnnx(fit.design, config);
    return fit;
}

std::vector<double> arnnx_raw_forecast(std::span<const double> train, const FeatureMatrix* exog,
                                       const ArnnxConfig& config, std::size_t horizon) {
    const auto fit = arnnx_raw_fit(train, exog, config);
    ExogPolicy policy;
    if (exog != nullptr) {
        const auto last = exog->row(exog->rows - 1);
        policy = ExogPolicy::frozen(std::vector<double>(last.begin(), last.end()));
    }
    return forecast_recursive(fit.model, train, policy, horizon);
}

}  // namespace fewnet

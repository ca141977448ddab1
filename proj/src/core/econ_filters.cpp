#include "econ_filters.hpp"

#include "error.hpp"

#include <cmath>
#include <numbers>

namespace fewnet {

namespace {

// Solves M x = rhs for a symmetric pentadiagonal M with constant bands
// (diag, off1, off2) by a banded LDL' factorization.
std::vector<double> solve_pentadiagonal(double diag, double off1, double off2, std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    std::vector<double> dd(n), l1(n, 0.0), l2(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double d = diag;
        if (i >= 1) d -= l1[i - 1] * l1[i - 1] * dd[i - 1];
        if (i >= 2) d -= l2[i - 2] * l2[i - 2] * dd[i - 2];
        dd[i] = d;
        if (i + 1 < n) {
            double off = off1;
            if (i >= 1) off -= l2[i - 1] * l1[i - 1] * dd[i - 1];
            l1[i] = off / d;
        }
        if (i + 2 < n) l2[i] = off2 / d;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= 1) rhs[i] -= l1[i - 1] * rhs[i - 1];
        if (i >= 2) rhs[i] -= l2[i - 2] * rhs[i - 2];
    }
    for (std::size_t i = 0; i < n; ++i) rhs[i] /= dd[i];
    for (std::size_t k = n; k-- > 0;) {
        if (k + 1 < n) rhs[k] -= l1[k] * rhs[k + 1];
        if (k + 2 < n) rhs[k] -= l2[k] * rhs[k + 2];
    }
    return rhs;
}

}  // namespace

// (I + lambda D'D)^-1 = I - D' (D D' + I / lambda)^-1 D, so the cycle is
// D' (D D' + I / lambda)^-1 D y. D D' has bands (6, -4, 1) and stays well
// conditioned as lambda grows, where I + lambda D'D does not.
HpResult hp_filter(std::span<const double> y, double lambda) {
    const std::size_t n = y.size();
    if (n < 4) throw Error(Errc::domain, "HP filter needs at least 4 observations");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(Errc::domain, "HP smoothing parameter must be >= 0");

    HpResult out;
    out.lambda = lambda;
    out.trend.assign(y.begin(), y.end());
    out.cycle.assign(n, 0.0);
    if (lambda == 0.0) return out;

    // cycle = D' (D D' + I / lambda)^-1 D v
    const auto smooth_part = [&](std::span<const double> v) {
        std::vector<double> dv(n - 2);
        for (std::size_t i = 0; i + 2 < n; ++i) dv[i] = v[i] - 2.0 * v[i + 1] + v[i + 2];
        const auto z = solve_pentadiagonal(6.0 + 1.0 / lambda, -4.0, 1.0, std::move(dv));
        std::vector<double> c(n, 0.0);
        for (std::size_t r = 0; r < z.size(); ++r) {
            c[r] += z[r];
            c[r + 1] -= 2.0 * z[r];
            c[r + 2] += z[r];
        }
        return c;
    };
    out.cycle = smooth_part(y);

    // One refinement step on (I + lambda D'D) trend = y keeps the residual of
    // the original system at rounding level.
    std::vector<double> trend(n), dtrend(n - 2), resid(n);
    for (std::size_t i = 0; i < n; ++i) trend[i] = y[i] - out.cycle[i];
    for (std::size_t i = 0; i + 2 < n; ++i) dtrend[i] = trend[i] - 2.0 * trend[i + 1] + trend[i + 2];
    for (std::size_t i = 0; i < n; ++i) {
        double ddt = 0.0;
        if (i < n - 2) ddt += dtrend[i];
        if (i >= 1 && i - 1 < n - 2) ddt -= 2.0 * dtrend[i - 1];
        if (i >= 2) ddt += dtrend[i - 2];
        resid[i] = y[i] - trend[i] - lambda * ddt;
    }
    const auto resid_cycle = smooth_part(resid);
    for (std::size_t i = 0; i < n; ++i) out.cycle[i] -= resid[i] - resid_cycle[i];
    for (std::size_t i = 0; i < n; ++i) out.trend[i] = y[i] - out.cycle[i];
    return out;
}

namespace {

void check_band(double lower, double upper) {
    if (!(lower >= 2.0) || !(upper > lower) || !std::isfinite(upper)) {
        throw Error(Errc::domain, "CF band needs 2 <= lower period < upper period");
    }
}

// Ideal band-pass weights phi_j and the endpoint weights phi~_k = -phi_0/2 - sum_{j<k} phi_j.
struct CfKernel {
    std::vector<double> phi;
    std::vector<double> tail;

    CfKernel(std::size_t n, double lower, double upper) : phi(n), tail(n) {
        const double pi = std::numbers::pi;
        const double a = 2.0 * pi / upper;
        const double b = 2.0 * pi / lower;
        phi[0] = (b - a) / pi;
        for (std::size_t j = 1; j < n; ++j) {
            const double jd = static_cast<double>(j);
            phi[j] = (std::sin(jd * b) - std::sin(jd * a)) / (pi * jd);
        }
        double partial = 0.0;  // sum_{j=1}^{k-1} phi_j
        for (std::size_t k = 0; k < n; ++k) {
            if (k >= 2) partial += phi[k - 1];
            tail[k] = -0.5 * phi[0] - partial;
        }
    }

    void row(std::size_t t, std::vector<double>& w) const {
        const std::size_t n = phi.size();
        std::fill(w.begin(), w.end(), 0.0);
        w[t] += phi[0];
        for (std::size_t s = t + 1; s + 1 < n; ++s) w[s] += phi[s - t];
        w[n - 1] += tail[n - 1 - t];
        for (std::size_t s = 1; s < t; ++s) w[s] += phi[t - s];
        w[0] += tail[t];
    }
};

}  // namespace

std::vector<double> cf_weights(std::size_t length, std::size_t t, double lower, double upper) {
    check_band(lower, upper);
    if (t >= length) throw Error(Errc::bounds, "CF weight row outside the sample");
    CfKernel kernel(length, lower, upper);
    std::vector<double> w(length);
    kernel.row(t, w);
    return w;
}

CfResult cf_filter(std::span<const double> y, double lower, double upper) {
    const std::size_t n = y.size();
    if (n < 8) throw Error(Errc::domain, "CF filter needs at least 8 observations");
    check_band(lower, upper);
    CfKernel kernel(n, lower, upper);
    CfResult out;
    out.lower_period = lower;
    out.upper_period = upper;
    out.cycle.resize(n);
    std::vector<double> w(n);
    for (std::size_t t = 0; t < n; ++t) {
        kernel.row(t, w);
        double acc = 0.0;
        for (std::size_t s = 0; s < n; ++s) acc += w[s] * y[s];
        out.cycle[t] = acc;
    }
    return out;
}

std::vector<double> ExogenousFeatures::row_major() const {
    std::vector<double> out(size() * kColumns);
    for (std::size_t t = 0; t < size(); ++t) {
        for (std::size_t c = 0; c < kColumns; ++c) out[t * kColumns + c] = columns[c][t];
    }
    return out;
}

std::array<double, ExogenousFeatures::kColumns> ExogenousFeatures::row(std::size_t t) const {
    std::array<double, kColumns> r{};
    for (std::size_t c = 0; c < kColumns; ++c) r[c] = columns[c][t];
    return r;
}

ExogenousFeatures build_exogenous(const TimeSeries& cpi_inflation, const TimeSeries& log_epu,
                                  const TimeSeries& gprc, const EconFilterOptions& options) {
    if (cpi_inflation.start() != log_epu.start() || cpi_inflation.start() != gprc.start() ||
        cpi_inflation.size() != log_epu.size() || cpi_inflation.size() != gprc.size()) {
        throw Error(Errc::shape, "exogenous inputs must share start month and length");
    }
    ExogenousFeatures out;
    out.start = cpi_inflation.start();
    const TimeSeries* inputs[] = {&cpi_inflation, &log_epu, &gprc};
    for (std::size_t i = 0; i < 3; ++i) {
        out.columns[i] = hp_filter(inputs[i]->view(), options.hp_lambda).trend;
        out.columns[i + 3] = cf_filter(inputs[i]->view(), options.cf_lower, options.cf_upper).cycle;
    }
    return out;
}

}  // namespace fewnet

#include "comparison.hpp"

#include "error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace fewnet {

namespace {

// Studentized range quantiles, infinite df, k = 2..20.
constexpr std::array<double, 19> kRange01{
    3.642773, 4.120303, 4.402801, 4.602821, 4.757047, 4.882166, 4.987183, 5.077506, 5.156635, 5.226963,
    5.290196, 5.347592, 5.400105, 5.448476, 5.493291, 5.535020, 5.574047, 5.610690, 5.645215,
};
constexpr std::array<double, 19> kRange05{
    2.771808, 3.314493, 3.633160, 3.857656, 4.030092, 4.169554, 4.286309, 4.386509, 4.474124, 4.551864,
    4.621655, 4.684920, 4.742732, 4.795924, 4.845154, 4.890951, 4.933745, 4.973892, 5.011689,
};
constexpr std::array<double, 19> kRange10{
    2.326174, 2.902380, 3.240446, 3.478281, 3.660721, 3.808098, 3.931349, 4.037023, 4.129346, 4.211200,
    4.284635, 4.351158, 4.411913, 4.467782, 4.519464, 4.567519, 4.612403, 4.654494, 4.694104,
};

// Two-sided fluctuation test critical values for mu = 0.1..0.9.
constexpr std::array<double, 9> kFluct05{3.393, 3.179, 3.012, 2.890, 2.779, 2.634, 2.560, 2.433, 2.248};
constexpr std::array<double, 9> kFluct10{3.170, 2.948, 2.766, 2.626, 2.500, 2.356, 2.252, 2.130, 1.950};

bool near(double a, double b) { return std::abs(a - b) < 1e-9; }

}  // namespace

void ErrorMatrix::validate() const {
    if (losses.size() != models.size()) throw Error(Errc::shape, "error matrix: one row per model required");
    for (std::size_t m = 0; m < losses.size(); ++m) {
        if (losses[m].size() != datasets.size()) {
            throw Error(Errc::shape, "error matrix: model '" + models[m] + "' has " + std::to_string(losses[m].size()) +
                                         " cells for " + std::to_string(datasets.size()) + " datasets");
        }
        for (double v : losses[m]) {
            if (!std::isfinite(v)) throw Error(Errc::shape, "error matrix: non-finite loss for model '" + models[m] + "'");
        }
    }
}

double studentized_range_quantile(std::size_t groups, double alpha) {
    if (groups < 2 || groups > 20) {
        throw Error(Errc::lookup, "studentized range table covers 2..20 groups, got " + std::to_string(groups));
    }
    const std::size_t i = groups - 2;
    if (near(alpha, 0.01)) return kRange01[i];
    if (near(alpha, 0.05)) return kRange05[i];
    if (near(alpha, 0.10)) return kRange10[i];
    throw Error(Errc::lookup, "studentized range table covers alpha 0.01, 0.05, 0.10");
}

double mcb_critical_distance(std::size_t models, std::size_t datasets, double alpha) {
    if (datasets == 0) throw Error(Errc::domain, "critical distance needs at least one dataset");
    const double m = static_cast<double>(models);
    return studentized_range_quantile(models, alpha) * std::sqrt(m * (m + 1.0) / (6.0 * static_cast<double>(datasets)));
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

McbResult mcb_test(const ErrorMatrix& errors, double alpha) {
    errors.validate();
    const std::size_t m = errors.models.size();
    const std::size_t d = errors.datasets.size();
    if (m < 2) throw Error(Errc::domain, "MCB test needs at least two models");
    if (d < 2) throw Error(Errc::domain, "MCB test needs at least two datasets");

    McbResult r;
    r.models = errors.models;
    r.alpha = alpha;
    r.mean_rank.assign(m, 0.0);
    std::vector<double> column(m);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < m; ++i) column[i] = errors.losses[i][j];
        const auto ranks = average_ranks(column);
        for (std::size_t i = 0; i < m; ++i) r.mean_rank[i] += ranks[i];
    }
    for (auto& v : r.mean_rank) v /= static_cast<double>(d);

    r.critical_distance = mcb_critical_distance(m, d, alpha);
    const double half = r.critical_distance / 2.0;
    r.best = static_cast<std::size_t>(std::min_element(r.mean_rank.begin(), r.mean_rank.end()) - r.mean_rank.begin());
    r.reference_upper = r.mean_rank[r.best] + half;
    for (std::size_t i = 0; i < m; ++i) {
        r.intervals.push_back({r.mean_rank[i] - half, r.mean_rank[i] + half});
        r.worse_than_best.push_back(r.intervals.back().lower > r.reference_upper);
    }
    return r;
}

double fluctuation_critical_value(double mu, double alpha, double* grid_mu) {
    if (!(mu > 0.0 && mu < 1.0)) throw Error(Errc::window, "fluctuation window fraction must lie in (0, 1)");
    const std::array<double, 9>* table = nullptr;
    if (near(alpha, 0.05)) table = &kFluct05;
    else if (near(alpha, 0.10)) table = &kFluct10;
    else throw Error(Errc::lookup, "fluctuation critical values cover alpha 0.05 and 0.10");
    const long idx = std::clamp(std::lround(mu * 10.0), 1L, 9L);
    if (grid_mu != nullptr) *grid_mu = static_cast<double>(idx) / 10.0;
    return (*table)[static_cast<std::size_t>(idx - 1)];
}

double bartlett_variance(std::span<const double> d, std::size_t lag) {
    const std::size_t n = d.size();
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
    const auto autocov = [&](std::size_t l) {
        double s = 0.0;
        for (std::size_t t = l; t < n; ++t) s += (d[t] - mean) * (d[t - l] - mean);
        return s / static_cast<double>(n);
    };
    double v = autocov(0);
    for (std::size_t l = 1; l <= lag && l < n; ++l) {
        v += 2.0 * (1.0 - static_cast<double>(l) / static_cast<double>(lag + 1)) * autocov(l);
    }
    return v;
}

bool FluctuationResult::rejects_everywhere() const {
    bool any = false;
    for (const auto& s : statistic) {
        if (!s) continue;
        any = true;
        if (!(std::abs(*s) > critical_value)) return false;
    }
    return any;
}

FluctuationResult gr_fluctuation_test(std::span<const double> loss_a, std::span<const double> loss_b, double mu,
                                      double alpha) {
    if (loss_a.size() != loss_b.size()) throw Error(Errc::shape, "fluctuation test: loss series lengths differ");
    const std::size_t n = loss_a.size();
    FluctuationResult r;
    r.mu = mu;
    r.alpha = alpha;
    r.critical_value = fluctuation_critical_value(mu, alpha, &r.table_mu);
    if (!near(r.table_mu, mu)) {
        r.warning = "window fraction " + std::to_string(mu) + " is off the critical-value grid; using " +
                    std::to_string(r.table_mu);
    }
    const auto w = static_cast<std::size_t>(std::lround(mu * static_cast<double>(n)));
    if (w < 2) throw Error(Errc::window, "fluctuation window of " + std::to_string(w) + " observations is shorter than 2");
    r.window = w;
    const auto lag = static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(w)) + 1e-12));

    std::vector<double> d(n);
    for (std::size_t t = 0; t < n; ++t) d[t] = loss_a[t] - loss_b[t];
    for (std::size_t end = w - 1; end < n; ++end) {
        const std::span<const double> win(d.data() + end + 1 - w, w);
        r.window_end.push_back(end);
        if (std::all_of(win.begin(), win.end(), [](double v) { return v == 0.0; })) {
            r.statistic.emplace_back(0.0);
            continue;
        }
        const double var = bartlett_variance(win, lag);
        if (!(var > 0.0)) {
            r.statistic.emplace_back(std::nullopt);
            continue;
        }
        const double mean = std::accumulate(win.begin(), win.end(), 0.0) / static_cast<double>(w);
        r.statistic.emplace_back(std::sqrt(static_cast<double>(w)) * mean / std::sqrt(var));
    }
    return r;
}

}  // namespace fewnet

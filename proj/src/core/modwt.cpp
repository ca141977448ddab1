#include "modwt.hpp"

#include "csv.hpp"
#include "error.hpp"

#include <cmath>
#include <ostream>

namespace fewnet {

namespace {

constexpr double kFilterTolerance = 1e-12;

// Scaling (low-pass) coefficients in the Percival-Walden orientation. D8 and
// LA8 are the extremal-phase and least-asymmetric factorizations of the
// Daubechies length-8 product filter, BL14 the best-localized length-14
// factorization, C6 the closed-form length-6 coiflet.
constexpr double kD8[] = {
    0.23037781330889650086, 0.71484657055291564709,   0.63088076792985890788,
    -0.027983769416859854211, -0.18703481171909308408, 0.030841381835560763627,
    0.032883011666885199735,  -0.010597401785069032105,
};

constexpr double kLa8[] = {
    -0.075765714789502213228, -0.029635527646002491764, 0.49761866763277498998,
    0.80373875180513208088,   0.2978577956053060514,    -0.099219543576633532585,
    -0.012603967262031303754, 0.032223100604051467872,
};

constexpr double kC6[] = {
    -0.015655728135791992526, -0.072732619512526448024, 0.38486484686485774725,
    0.85257202021160042045,   0.33789766245748176967,   -0.072732619512526448024,
};

constexpr double kBl14[] = {
    0.012015419283549189053,   0.017213376300804502861,  -0.06490800354718848576,
    -0.064131289807385821039,  0.36021846090626020101,   0.78192159329172812499,
    0.48361091568226769662,    -0.056804476889666969319, -0.10101092086842029949,
    0.044742349468352376652,   0.020464207577546033667,  -0.018126605131338460955,
    -0.0032832978474668107035, 0.0022918339540537712112,
};

WaveletFilter from_scaling(std::string name, std::span<const double> g) {
    const std::size_t L = g.size();
    std::vector<double> h(L);
    for (std::size_t l = 0; l < L; ++l) {
        h[l] = ((l % 2 == 0) ? 1.0 : -1.0) * g[L - 1 - l];
    }
    return WaveletFilter{std::move(name), std::move(h), std::vector<double>(g.begin(), g.end())};
}

std::size_t wrap(long index, std::size_t n) {
    const long m = static_cast<long>(n);
    long r = index % m;
    return static_cast<std::size_t>(r < 0 ? r + m : r);
}

}  // namespace

const std::vector<std::string>& filter_names() {
    static const std::vector<std::string> names{"haar", "d8", "la8", "c6", "bl14"};
    return names;
}

double filter_identity_error(const WaveletFilter& f) {
    const std::size_t L = f.length();
    if (L == 0 || f.scaling.size() != L) return INFINITY;
    double err = 0.0;
    double sum_h = 0.0, energy_h = 0.0, sum_g = 0.0, energy_g = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
        sum_h += f.wavelet[l];
        energy_h += f.wavelet[l] * f.wavelet[l];
        sum_g += f.scaling[l];
        energy_g += f.scaling[l] * f.scaling[l];
        const double mirror = ((l % 2 == 0) ? -1.0 : 1.0) * f.wavelet[L - 1 - l];
        err = std::max(err, std::abs(f.scaling[l] - mirror));
    }
    err = std::max({err, std::abs(sum_h), std::abs(energy_h - 1.0), std::abs(sum_g - std::sqrt(2.0)),
                    std::abs(energy_g - 1.0)});
    for (std::size_t shift = 2; shift < L; shift += 2) {
        double dot_h = 0.0, dot_g = 0.0;
        for (std::size_t l = 0; l + shift < L; ++l) {
            dot_h += f.wavelet[l] * f.wavelet[l + shift];
            dot_g += f.scaling[l] * f.scaling[l + shift];
        }
        err = std::max({err, std::abs(dot_h), std::abs(dot_g)});
    }
    return err;
}

WaveletFilter filter_coefficients(std::string_view name) {
    WaveletFilter filter;
    if (name == "haar") {
        const double s = 1.0 / std::sqrt(2.0);
        const double g[] = {s, s};
        filter = from_scaling("haar", g);
    } else if (name == "d8") {
        filter = from_scaling("d8", kD8);
    } else if (name == "la8") {
        filter = from_scaling("la8", kLa8);
    } else if (name == "c6") {
        filter = from_scaling("c6", kC6);
    } else if (name == "bl14") {
        filter = from_scaling("bl14", kBl14);
    } else {
        throw Error(Errc::lookup, "unknown wavelet filter '" + std::string(name) +
                                      "' (expected haar, d8, la8, c6 or bl14)");
    }
    const double err = filter_identity_error(filter);
    if (!(err <= kFilterTolerance)) {
        throw Error(Errc::lookup, "wavelet filter table '" + filter.name + "' violates filter identities by " +
                                      csv::format_double(err));
    }
    return filter;
}

int default_level(std::size_t n) {
    if (n < 2) throw Error(Errc::domain, "decomposition level needs a training length of at least 2");
    return std::max(1, static_cast<int>(std::floor(std::log(static_cast<double>(n)))));
}

std::size_t equivalent_width(std::size_t filter_length, int level) {
    return ((std::size_t{1} << level) - 1) * (filter_length - 1) + 1;
}

ModwtDecomposition modwt(std::span<const double> series, const WaveletFilter& filter, int levels) {
    const std::size_t n = series.size();
    const std::size_t L = filter.length();
    if (levels < 1) throw Error(Errc::level, "decomposition level must be at least 1");
    if (n < L) {
        throw Error(Errc::level, "series of length " + std::to_string(n) + " is shorter than the " +
                                     filter.name + " filter");
    }
    if (levels >= 31 || equivalent_width(L, levels) > n) {
        throw Error(Errc::level, "level " + std::to_string(levels) + " " + filter.name +
                                     " filter is wider than the series of length " + std::to_string(n));
    }

    const double norm = 1.0 / std::sqrt(2.0);
    std::vector<double> ht(L), gt(L);
    for (std::size_t l = 0; l < L; ++l) {
        ht[l] = filter.wavelet[l] * norm;
        gt[l] = filter.scaling[l] * norm;
    }

    ModwtDecomposition dec;
    dec.filter = filter;
    dec.levels = levels;
    std::vector<double> v(series.begin(), series.end());
    std::vector<double> w_next(n), v_next(n);
    for (int j = 1; j <= levels; ++j) {
        const long stride = 1L << (j - 1);
        for (std::size_t t = 0; t < n; ++t) {
            double w_acc = 0.0, v_acc = 0.0;
            for (std::size_t l = 0; l < L; ++l) {
                const double x = v[wrap(static_cast<long>(t) - stride * static_cast<long>(l), n)];
                w_acc += ht[l] * x;
                v_acc += gt[l] * x;
            }
            w_next[t] = w_acc;
            v_next[t] = v_acc;
        }
        dec.wavelet_coeffs.push_back(w_next);
        v.swap(v_next);
    }
    dec.scaling_coeffs = std::move(v);
    return dec;
}

namespace {

// One inverse pyramid step from level j to j - 1.
std::vector<double> inverse_step(const std::vector<double>* w, const std::vector<double>& v, int j,
                                 const std::vector<double>& ht, const std::vector<double>& gt) {
    const std::size_t n = v.size();
    const std::size_t L = gt.size();
    const long stride = 1L << (j - 1);
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        double acc = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            const std::size_t idx = wrap(static_cast<long>(t) + stride * static_cast<long>(l), n);
            acc += gt[l] * v[idx];
            if (w != nullptr) acc += ht[l] * (*w)[idx];
        }
        out[t] = acc;
    }
    return out;
}

}  // namespace

MraDecomposition mra(const ModwtDecomposition& dec) {
    const std::size_t L = dec.filter.length();
    const std::size_t n = dec.scaling_coeffs.size();
    const double norm = 1.0 / std::sqrt(2.0);
    std::vector<double> ht(L), gt(L);
    for (std::size_t l = 0; l < L; ++l) {
        ht[l] = dec.filter.wavelet[l] * norm;
        gt[l] = dec.filter.scaling[l] * norm;
    }
    const std::vector<double> zeros(n, 0.0);

    MraDecomposition out;
    for (int j = 1; j <= dec.levels; ++j) {
        std::vector<double> v = inverse_step(&dec.wavelet_coeffs[static_cast<std::size_t>(j - 1)], zeros, j, ht, gt);
        for (int i = j - 1; i >= 1; --i) v = inverse_step(nullptr, v, i, ht, gt);
        out.details.push_back(std::move(v));
    }
    std::vector<double> s = dec.scaling_coeffs;
    for (int i = dec.levels; i >= 1; --i) s = inverse_step(nullptr, s, i, ht, gt);
    out.smooth = std::move(s);
    return out;
}

std::vector<double> reconstruct(const MraDecomposition& m) {
    std::vector<double> out = m.smooth;
    for (const auto& d : m.details) {
        if (d.size() != out.size()) {
            throw Error(Errc::shape, "detail of length " + std::to_string(d.size()) +
                                         " does not match smooth of length " + std::to_string(out.size()));
        }
        for (std::size_t t = 0; t < out.size(); ++t) out[t] += d[t];
    }
    return out;
}

void write_mra_csv(std::ostream& out, const MraDecomposition& m) {
    out << "t";
    for (int k = 1; k <= m.levels(); ++k) out << ",d" << k;
    out << ",smooth\n";
    for (std::size_t t = 0; t < m.size(); ++t) {
        out << (t + 1);
        for (const auto& d : m.details) out << ',' << csv::format_double(d[t]);
        out << ',' << csv::format_double(m.smooth[t]) << '\n';
    }
}

}  // namespace fewnet

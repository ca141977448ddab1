#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fewnet {

/// Orthogonal wavelet filter pair. `scaling` is the low-pass g, `wavelet` the
/// high-pass h, related by the quadrature mirror g_l = (-1)^(l+1) h_(L-1-l).
struct WaveletFilter {
    std::string name;
    std::vector<double> wavelet;
    std::vector<double> scaling;

    [[nodiscard]] std::size_t length() const noexcept { return wavelet.size(); }
};

/// Names accepted by filter_coefficients: haar, d8, la8, c6, bl14.
[[nodiscard]] const std::vector<std::string>& filter_names();

/// Tabulated filter, checked against the unit-energy, zero-sum, even-shift
/// orthogonality and quadrature-mirror identities before it is returned.
/// Throws Errc::lookup for unknown names.
[[nodiscard]] WaveletFilter filter_coefficients(std::string_view name);

/// Largest deviation from the filter identities (0 for an exact filter).
[[nodiscard]] double filter_identity_error(const WaveletFilter& filter);

/// floor(ln n); throws Errc::domain for n < 2.
[[nodiscard]] int default_level(std::size_t n);

/// Width of the level-k equivalent filter, (2^k - 1)(L - 1) + 1.
[[nodiscard]] std::size_t equivalent_width(std::size_t filter_length, int level);

struct ModwtDecomposition {
    std::vector<std::vector<double>> wavelet_coeffs;  // levels 1..K
    std::vector<double> scaling_coeffs;               // level K
    WaveletFilter filter;
    int levels = 0;
};

struct MraDecomposition {
    std::vector<std::vector<double>> details;  // levels 1..K
    std::vector<double> smooth;

    [[nodiscard]] int levels() const noexcept { return static_cast<int>(details.size()); }
    [[nodiscard]] std::size_t size() const noexcept { return smooth.size(); }
};

/// Maximal-overlap DWT by the pyramid algorithm with circular boundaries and
/// filters rescaled by 1/sqrt(2). Throws Errc::level when the level-K filter
/// is wider than the series.
[[nodiscard]] ModwtDecomposition modwt(std::span<const double> series, const WaveletFilter& filter,
                                       int levels);

/// Additive multi-resolution analysis: series = smooth + sum of details.
[[nodiscard]] MraDecomposition mra(const ModwtDecomposition& dec);

/// Element-wise smooth + sum of details. Throws Errc::shape on ragged input.
[[nodiscard]] std::vector<double> reconstruct(const MraDecomposition& mra);

/// CSV with columns t, d1..dK, smooth.
void write_mra_csv(std::ostream& out, const MraDecomposition& mra);

}  // namespace fewnet

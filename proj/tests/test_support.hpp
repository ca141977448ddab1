#pragma once

#include "error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace fewnet::test {

inline std::string data_path(const std::string& name) { return std::string(FEWNET_TEST_DATA) + "/" + name; }

inline std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sd = 1.0, double mean = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(mean, sd);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

inline std::vector<double> uniform(std::size_t n, std::uint64_t seed, double lo, double hi) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

/// AR(1) path x_t = phi x_{t-1} + e_t with standard normal shocks.
inline std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed, double sd = 1.0) {
    const auto e = gaussian(n, seed, sd);
    std::vector<double> x(n);
    x[0] = e[0];
    for (std::size_t t = 1; t < n; ++t) x[t] = phi * x[t - 1] + e[t];
    return x;
}

template <class Fn>
Errc error_code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a fewnet::Error");
    return Errc::io;
}

}  // namespace fewnet::test

#define CHECK_ERRC(expr, errc) CHECK(::fewnet::test::error_code_of([&] { (void)(expr); }) == (errc))

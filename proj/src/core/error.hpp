#pragma once

#include <stdexcept>
#include <string>

namespace fewnet {

enum class Errc {
    format,
    continuity,
    domain,
    bounds,
    lookup,
    level,
    shape,
    divergence,
    selection,
    metric_undefined,
    index,
    window,
    config,
    io,
};

const char* errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the Errc categories.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace fewnet

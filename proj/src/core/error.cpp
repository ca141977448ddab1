#include "error.hpp"

namespace fewnet {

const char* errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::format: return "format error";
        case Errc::continuity: return "continuity error";
        case Errc::domain: return "domain error";
        case Errc::bounds: return "bounds error";
        case Errc::lookup: return "lookup error";
        case Errc::level: return "level error";
        case Errc::shape: return "shape error";
        case Errc::divergence: return "training divergence";
        case Errc::selection: return "selection error";
        case Errc::metric_undefined: return "metric undefined";
        case Errc::index: return "index error";
        case Errc::window: return "window error";
        case Errc::config: return "config error";
        case Errc::io: return "i/o error";
    }
    return "error";
}

}  // namespace fewnet

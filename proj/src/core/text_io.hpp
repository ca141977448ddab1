#pragma once

#include "csv.hpp"
#include "error.hpp"

#include <cctype>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

namespace fewnet {

/// Whitespace-separated reader for the model text formats.
class TextReader {
public:
    explicit TextReader(std::string_view text) : text_(text) {}

    std::string_view next() {
        skip_space();
        const std::size_t begin = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (begin == pos_) throw Error(Errc::format, "model text ended early");
        return text_.substr(begin, pos_ - begin);
    }

    void expect(std::string_view word) {
        const auto got = next();
        if (got != word) {
            throw Error(Errc::format, "model text: expected '" + std::string(word) + "', found '" + std::string(got) + "'");
        }
    }

    double number() {
        const auto tok = next();
        const auto v = csv::parse_double(tok);
        if (!v) throw Error(Errc::format, "model text: bad number '" + std::string(tok) + "'");
        return *v;
    }

    std::uint64_t integer() {
        const auto tok = next();
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
            throw Error(Errc::format, "model text: bad integer '" + std::string(tok) + "'");
        }
        return v;
    }

    /// Next `count` bytes after the current line break.
    std::string_view block(std::size_t count) {
        if (pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
        if (pos_ + count > text_.size()) throw Error(Errc::format, "model text: truncated block");
        const auto out = text_.substr(pos_, count);
        pos_ += count;
        return out;
    }

    [[nodiscard]] bool at_end() {
        skip_space();
        return pos_ >= text_.size();
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace fewnet

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fewnet::csv {

struct Row {
    std::size_t line = 0;  // 1-based line number in the file
    std::vector<std::string> fields;
};

struct Table {
    std::vector<std::string> header;
    std::vector<Row> rows;

    /// Column position by header name, if present.
    [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const;
};

/// RFC-4180-style reader: comma separated, optional double quotes, header required.
[[nodiscard]] Table read(const std::filesystem::path& path);
[[nodiscard]] Table parse(std::string_view text, std::string_view origin = "<memory>");

[[nodiscard]] std::optional<double> parse_double(std::string_view text);

/// Shortest text that reads back to exactly the same double.
[[nodiscard]] std::string format_double(double value);

[[nodiscard]] std::string escape(std::string_view field);

}  // namespace fewnet::csv

#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fewnet {

/// Calendar month. No days, no time zones.
struct YearMonth {
    int year = 2000;
    int month = 1;  // 1..12

    [[nodiscard]] long ordinal() const noexcept { return static_cast<long>(year) * 12 + (month - 1); }
    [[nodiscard]] static YearMonth from_ordinal(long ordinal) noexcept;
    [[nodiscard]] YearMonth plus(long months) const noexcept { return from_ordinal(ordinal() + months); }
    [[nodiscard]] long months_until(YearMonth other) const noexcept { return other.ordinal() - ordinal(); }

    /// Accepts YYYY-MM or YYYY-MM-DD (the day is ignored). Throws Errc::format.
    [[nodiscard]] static YearMonth parse(std::string_view text);
    [[nodiscard]] std::string to_string() const;

    friend auto operator<=>(const YearMonth& a, const YearMonth& b) noexcept {
        return a.ordinal() <=> b.ordinal();
    }
    friend bool operator==(const YearMonth&, const YearMonth&) noexcept = default;
};

/// Dense monthly series: entry i is observed at start + i months.
class TimeSeries {
public:
    TimeSeries(YearMonth start, std::vector<double> values, std::string name = {});

    [[nodiscard]] YearMonth start() const noexcept { return start_; }
    [[nodiscard]] YearMonth last() const noexcept { return start_.plus(static_cast<long>(values_.size()) - 1); }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::span<const double> view() const noexcept { return values_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }

    [[nodiscard]] YearMonth date_at(std::size_t i) const noexcept { return start_.plus(static_cast<long>(i)); }
    /// Position of `month` in the series; throws Errc::bounds when outside.
    [[nodiscard]] std::size_t index_of(YearMonth month) const;

    /// Sub-series [offset, offset + count). Throws Errc::bounds.
    [[nodiscard]] TimeSeries slice(std::size_t offset, std::size_t count) const;
    /// Sub-series covering the inclusive month range [from, to].
    [[nodiscard]] TimeSeries between(YearMonth from, YearMonth to) const;

    [[nodiscard]] TimeSeries renamed(std::string name) const;

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    YearMonth start_;
    std::vector<double> values_;
    std::string name_;
};

struct SplitSpec {
    YearMonth train_end;
    std::size_t horizon = 0;

    friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

struct TrainTestSplit {
    TimeSeries train;
    TimeSeries test;
};

/// Half-open index range [begin, end) into a series.
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    [[nodiscard]] std::size_t size() const noexcept { return end - begin; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct Fold {
    IndexRange train;
    IndexRange validation;
};

struct FoldSet {
    std::vector<Fold> folds;
};

/// Reads a dense monthly series from a CSV file with a header row.
/// Rows may appear in any order; duplicated or missing months are errors.
[[nodiscard]] TimeSeries load_csv(const std::filesystem::path& path,
                                  std::string_view date_column,
                                  std::string_view value_column);

/// Year-on-year percentage change, 100 * (x_t - x_{t-12}) / x_{t-12}.
[[nodiscard]] TimeSeries yoy_inflation(const TimeSeries& index);

/// Element-wise base-10 logarithm.
[[nodiscard]] TimeSeries log_transform(const TimeSeries& series);

[[nodiscard]] TrainTestSplit split(const TimeSeries& series, const SplitSpec& spec);

/// Expanding-window folds. The minimum train slice is size - n_folds * horizon and
/// the last validation window ends at the final observation.
[[nodiscard]] FoldSet rolling_origin_folds(std::size_t series_length, std::size_t n_folds,
                                           std::size_t horizon);

/// Restricts every series to the months they all cover. Throws Errc::shape when disjoint.
[[nodiscard]] std::vector<TimeSeries> align(const std::vector<TimeSeries>& series);

}  // namespace fewnet

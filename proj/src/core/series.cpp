#include "series.hpp"

#include "csv.hpp"
#include "error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>

namespace fewnet {

namespace {

bool parse_int(std::string_view text, int& out) {
    if (text.empty()) return false;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

void require_positive(const TimeSeries& series, const char* what) {
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!(series[i] > 0.0)) {
            throw Error(Errc::domain, std::string(what) + ": non-positive value " +
                                          csv::format_double(series[i]) + " at " +
                                          series.date_at(i).to_string());
        }
    }
}

}  // namespace

YearMonth YearMonth::from_ordinal(long ordinal) noexcept {
    long year = ordinal / 12;
    long month = ordinal % 12;
    if (month < 0) {
        month += 12;
        --year;
    }
    return YearMonth{static_cast<int>(year), static_cast<int>(month + 1)};
}

YearMonth YearMonth::parse(std::string_view text) {
    const auto fail = [&] { return Error(Errc::format, "unparseable date '" + std::string(text) + "'"); };
    if (text.size() != 7 && text.size() != 10) throw fail();
    if (text[4] != '-') throw fail();
    int year = 0;
    int month = 0;
    if (!parse_int(text.substr(0, 4), year) || !parse_int(text.substr(5, 2), month)) throw fail();
    if (month < 1 || month > 12) throw fail();
    if (text.size() == 10) {
        int day = 0;
        if (text[7] != '-' || !parse_int(text.substr(8, 2), day) || day < 1 || day > 31) throw fail();
    }
    return YearMonth{year, month};
}

std::string YearMonth::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
}

TimeSeries::TimeSeries(YearMonth start, std::vector<double> values, std::string name)
    : start_(start), values_(std::move(values)), name_(std::move(name)) {
    if (values_.empty()) throw Error(Errc::shape, "time series '" + name_ + "' is empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw Error(Errc::domain, "time series '" + name_ + "' has a non-finite value at " +
                                          date_at(i).to_string());
        }
    }
}

std::size_t TimeSeries::index_of(YearMonth month) const {
    const long offset = start_.months_until(month);
    if (offset < 0 || offset >= static_cast<long>(values_.size())) {
        throw Error(Errc::bounds, month.to_string() + " lies outside " + start_.to_string() + ".." +
                                      last().to_string());
    }
    return static_cast<std::size_t>(offset);
}

TimeSeries TimeSeries::slice(std::size_t offset, std::size_t count) const {
    if (count == 0 || offset > values_.size() || count > values_.size() - offset) {
        throw Error(Errc::bounds, "slice [" + std::to_string(offset) + ", " + std::to_string(offset + count) +
                                      ") outside series of length " + std::to_string(values_.size()));
    }
    std::vector<double> part(values_.begin() + static_cast<std::ptrdiff_t>(offset),
                             values_.begin() + static_cast<std::ptrdiff_t>(offset + count));
    return TimeSeries(date_at(offset), std::move(part), name_);
}

TimeSeries TimeSeries::between(YearMonth from, YearMonth to) const {
    const std::size_t a = index_of(from);
    const std::size_t b = index_of(to);
    if (b < a) throw Error(Errc::bounds, "empty month range " + from.to_string() + ".." + to.to_string());
    return slice(a, b - a + 1);
}

TimeSeries TimeSeries::renamed(std::string name) const {
    TimeSeries copy = *this;
    copy.name_ = std::move(name);
    return copy;
}

TimeSeries load_csv(const std::filesystem::path& path, std::string_view date_column,
                    std::string_view value_column) {
    const csv::Table table = csv::read(path);
    const std::string origin = path.string();
    const auto date_idx = table.column(date_column);
    const auto value_idx = table.column(value_column);
    if (!date_idx) throw Error(Errc::format, origin + ": no column named '" + std::string(date_column) + "'");
    if (!value_idx) throw Error(Errc::format, origin + ": no column named '" + std::string(value_column) + "'");
    if (table.rows.empty()) throw Error(Errc::format, origin + ": no data rows");

    std::map<long, double> by_month;
    for (const auto& row : table.rows) {
        const auto where = origin + ": row " + std::to_string(row.line);
        if (row.fields.size() <= std::max(*date_idx, *value_idx)) {
            throw Error(Errc::format, where + ": expected " + std::to_string(table.header.size()) + " fields");
        }
        YearMonth month;
        try {
            month = YearMonth::parse(row.fields[*date_idx]);
        } catch (const Error& e) {
            throw Error(Errc::format, where + ": " + e.what());
        }
        const auto value = csv::parse_double(row.fields[*value_idx]);
        if (!value || !std::isfinite(*value)) {
            throw Error(Errc::format, where + ": unparseable value '" + row.fields[*value_idx] + "'");
        }
        if (!by_month.emplace(month.ordinal(), *value).second) {
            throw Error(Errc::format, where + ": duplicate month " + month.to_string());
        }
    }

    std::vector<double> values;
    values.reserve(by_month.size());
    long expected = by_month.begin()->first;
    for (const auto& [ordinal, value] : by_month) {
        if (ordinal != expected) {
            std::string missing = YearMonth::from_ordinal(expected).to_string();
            if (ordinal - expected > 1) missing += ".." + YearMonth::from_ordinal(ordinal - 1).to_string();
            throw Error(Errc::continuity, origin + ": missing month " + missing);
        }
        values.push_back(value);
        ++expected;
    }
    return TimeSeries(YearMonth::from_ordinal(by_month.begin()->first), std::move(values),
                      std::string(value_column));
}

TimeSeries yoy_inflation(const TimeSeries& index) {
    if (index.size() < 13) {
        throw Error(Errc::domain, "year-on-year change needs at least 13 months, got " +
                                      std::to_string(index.size()));
    }
    require_positive(index, "year-on-year change");
    std::vector<double> out(index.size() - 12);
    for (std::size_t t = 12; t < index.size(); ++t) {
        out[t - 12] = 100.0 * (index[t] - index[t - 12]) / index[t - 12];
    }
    return TimeSeries(index.start().plus(12), std::move(out), index.name());
}

TimeSeries log_transform(const TimeSeries& series) {
    require_positive(series, "log transform");
    std::vector<double> out(series.size());
    std::transform(series.values().begin(), series.values().end(), out.begin(),
                   [](double x) { return std::log10(x); });
    return TimeSeries(series.start(), std::move(out), series.name());
}

TrainTestSplit split(const TimeSeries& series, const SplitSpec& spec) {
    if (spec.horizon == 0) throw Error(Errc::bounds, "split horizon must be positive");
    if (spec.train_end < series.start() || spec.train_end > series.last()) {
        throw Error(Errc::bounds, "train end " + spec.train_end.to_string() + " outside " +
                                      series.start().to_string() + ".." + series.last().to_string());
    }
    const std::size_t train_len = series.index_of(spec.train_end) + 1;
    if (train_len + spec.horizon > series.size()) {
        throw Error(Errc::bounds, "horizon " + std::to_string(spec.horizon) + " after " +
                                      spec.train_end.to_string() + " exceeds series end " +
                                      series.last().to_string());
    }
    return TrainTestSplit{series.slice(0, train_len), series.slice(train_len, spec.horizon)};
}

FoldSet rolling_origin_folds(std::size_t series_length, std::size_t n_folds, std::size_t horizon) {
    if (n_folds == 0 || horizon == 0) throw Error(Errc::bounds, "fold count and horizon must be positive");
    if (series_length <= n_folds * horizon) {
        throw Error(Errc::bounds, "series of length " + std::to_string(series_length) + " cannot hold " +
                                      std::to_string(n_folds) + " validation windows of " +
                                      std::to_string(horizon) + " months after a training slice");
    }
    const std::size_t min_train = series_length - n_folds * horizon;
    FoldSet set;
    for (std::size_t k = 0; k < n_folds; ++k) {
        const std::size_t cut = min_train + k * horizon;
        set.folds.push_back(Fold{IndexRange{0, cut}, IndexRange{cut, cut + horizon}});
    }
    return set;
}

std::vector<TimeSeries> align(const std::vector<TimeSeries>& series) {
    if (series.empty()) return {};
    YearMonth from = series.front().start();
    YearMonth to = series.front().last();
    for (const auto& s : series) {
        from = std::max(from, s.start());
        to = std::min(to, s.last());
    }
    if (to < from) throw Error(Errc::shape, "series share no common months");
    std::vector<TimeSeries> out;
    out.reserve(series.size());
    for (const auto& s : series) out.push_back(s.between(from, to));
    return out;
}

}  // namespace fewnet

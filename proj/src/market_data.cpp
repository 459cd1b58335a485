#include "stackcast/market_data.hpp"

#include "stackcast/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

namespace stackcast {

Date parse_date(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw ValidationError("bad date '" + text + "': expected YYYY-MM-DD");
    auto digits = [&](std::size_t pos, std::size_t len) {
        int value = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (text[i] < '0' || text[i] > '9')
                throw ValidationError("bad date '" + text + "': expected YYYY-MM-DD");
            value = value * 10 + (text[i] - '0');
        }
        return value;
    };
    const Date date = std::chrono::year{digits(0, 4)} / digits(5, 2) / digits(8, 2);
    if (!date.ok()) throw ValidationError("bad date '" + text + "': no such calendar day");
    return date;
}

std::string format_date(const Date& date) {
    char buffer[16];
    std::snprintf(buffer, sizeof buffer, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buffer;
}

Field field_from_string(const std::string& name) {
    if (name == "open") return Field::open;
    if (name == "high") return Field::high;
    if (name == "low") return Field::low;
    if (name == "close") return Field::close;
    if (name == "volume") return Field::volume;
    throw UnknownField("unknown field '" + name + "'");
}

std::string field_to_string(Field field) {
    switch (field) {
    case Field::open: return "open";
    case Field::high: return "high";
    case Field::low: return "low";
    case Field::close: return "close";
    case Field::volume: return "volume";
    }
    throw UnknownField("unknown field enum value");
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::optional<double> parse_cell(const std::string& cell, std::size_t line_no, const char* what) {
    if (cell.empty()) return std::nullopt; // empty field means missing
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value))
        throw MalformedRow(line_no, std::string("non-numeric ") + what + " '" + cell + "'");
    return value;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

} // namespace

std::vector<OhlcvRecord> parse_csv(std::istream& input) {
    std::string line;
    if (!std::getline(input, line)) throw MalformedHeader("empty input: missing header");
    if (strip_cr(line) != kCsvHeader)
        throw MalformedHeader("expected header '" + std::string(kCsvHeader) + "'");

    std::vector<OhlcvRecord> records;
    std::size_t line_no = 1;
    while (std::getline(input, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 7)
            throw MalformedRow(line_no, "expected 7 fields, got " + std::to_string(fields.size()));

        OhlcvRecord rec;
        rec.symbol = fields[0];
        if (rec.symbol.empty()) throw MalformedRow(line_no, "empty symbol");
        try {
            rec.date = parse_date(fields[1]);
        } catch (const ValidationError& e) {
            throw MalformedRow(line_no, e.what());
        }
        rec.open = parse_cell(fields[2], line_no, "open");
        rec.high = parse_cell(fields[3], line_no, "high");
        rec.low = parse_cell(fields[4], line_no, "low");
        rec.close = parse_cell(fields[5], line_no, "close");
        rec.volume = parse_cell(fields[6], line_no, "volume");
        if (rec.volume && *rec.volume < 0.0) throw MalformedRow(line_no, "negative volume");
        records.push_back(std::move(rec));
    }
    return records;
}

namespace {

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Fill one column's gaps with the median of its present values.
std::size_t impute_column(std::vector<std::optional<double>>& cells, std::vector<double>& out,
                          const char* name) {
    std::vector<double> present;
    for (const auto& cell : cells)
        if (cell) present.push_back(*cell);
    if (present.empty()) throw AllMissingField(std::string("field '") + name + "' has no values");
    const double median = median_of(std::move(present));
    std::size_t imputed = 0;
    out.reserve(cells.size());
    for (const auto& cell : cells) {
        if (cell) {
            out.push_back(*cell);
        } else {
            out.push_back(median);
            ++imputed;
        }
    }
    return imputed;
}

} // namespace

CleanResult clean(const std::vector<OhlcvRecord>& records) {
    if (records.empty()) throw EmptyInput("clean: no records");
    for (const auto& rec : records)
        if (rec.symbol != records.front().symbol)
            throw ValidationError("clean: mixed symbols '" + records.front().symbol + "' and '" +
                                  rec.symbol + "'; filter to one symbol first");

    // Stable sort keeps the first occurrence of equal-date duplicates in front.
    std::vector<OhlcvRecord> sorted = records;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const OhlcvRecord& a, const OhlcvRecord& b) {
                         return std::chrono::sys_days(a.date) < std::chrono::sys_days(b.date);
                     });

    CleaningReport report;
    report.rows_in = records.size();

    std::vector<OhlcvRecord> unique;
    for (const auto& rec : sorted) {
        if (!unique.empty() && unique.back().date == rec.date) {
            if (unique.back() == rec) {
                ++report.duplicates_removed;
                continue;
            }
            throw ConflictingDuplicateDate("two rows for " + format_date(rec.date) +
                                           " with different values");
        }
        unique.push_back(rec);
    }

    // Range check happens on the raw rows: imputation must not hide or
    // manufacture violations.
    for (const auto& rec : unique) {
        if (rec.open && rec.high && rec.low && rec.close) {
            const double lo = std::min(*rec.open, *rec.close);
            const double hi = std::max(*rec.open, *rec.close);
            if (*rec.low > lo || *rec.high < hi) ++report.range_violations;
        }
    }

    const std::size_t n = unique.size();
    std::array<std::vector<std::optional<double>>, 5> columns;
    for (auto& col : columns) col.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        columns[0][i] = unique[i].open;
        columns[1][i] = unique[i].high;
        columns[2][i] = unique[i].low;
        columns[3][i] = unique[i].close;
        columns[4][i] = unique[i].volume;
    }

    PriceSeries series;
    series.symbol = records.front().symbol;
    series.dates.reserve(n);
    for (const auto& rec : unique) series.dates.push_back(rec.date);

    report.imputed_open = impute_column(columns[0], series.open, "open");
    report.imputed_high = impute_column(columns[1], series.high, "high");
    report.imputed_low = impute_column(columns[2], series.low, "low");
    report.imputed_close = impute_column(columns[3], series.close, "close");
    report.imputed_volume = impute_column(columns[4], series.volume, "volume");
    report.rows_out = n;

    return {std::move(series), report};
}

const std::vector<double>& extract_target(const PriceSeries& series, Field field) {
    switch (field) {
    case Field::open: return series.open;
    case Field::high: return series.high;
    case Field::low: return series.low;
    case Field::close: return series.close;
    case Field::volume: return series.volume;
    }
    throw UnknownField("unknown field enum value");
}

std::vector<OhlcvRecord> to_records(const PriceSeries& series) {
    std::vector<OhlcvRecord> records(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        records[i].symbol = series.symbol;
        records[i].date = series.dates[i];
        records[i].open = series.open[i];
        records[i].high = series.high[i];
        records[i].low = series.low[i];
        records[i].close = series.close[i];
        records[i].volume = series.volume[i];
    }
    return records;
}

void write_csv(const PriceSeries& series, std::ostream& output) {
    output << kCsvHeader << '\n';
    char buffer[32];
    auto cell = [&](double v) {
        std::snprintf(buffer, sizeof buffer, "%.17g", v);
        return std::string(buffer);
    };
    for (std::size_t i = 0; i < series.size(); ++i) {
        output << series.symbol << ',' << format_date(series.dates[i]) << ','
               << cell(series.open[i]) << ',' << cell(series.high[i]) << ','
               << cell(series.low[i]) << ',' << cell(series.close[i]) << ','
               << cell(series.volume[i]) << '\n';
    }
}

} // namespace stackcast

#pragma once

#include <chrono>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stackcast {

using Date = std::chrono::year_month_day;

// Strict YYYY-MM-DD; rejects impossible calendar dates.
Date parse_date(const std::string& text);
std::string format_date(const Date& date);

enum class Field { open, high, low, close, volume };

Field field_from_string(const std::string& name); // throws UnknownField
std::string field_to_string(Field field);

// One raw CSV row. Numeric fields may be missing (empty cells).
struct OhlcvRecord {
    std::string symbol;
    Date date{};
    std::optional<double> open;
    std::optional<double> high;
    std::optional<double> low;
    std::optional<double> close;
    std::optional<double> volume;

    bool operator==(const OhlcvRecord&) const = default;
};

// Cleaned single-symbol series: dates strictly increasing, no missing values,
// all columns the same length.
struct PriceSeries {
    std::string symbol;
    std::vector<Date> dates;
    std::vector<double> open;
    std::vector<double> high;
    std::vector<double> low;
    std::vector<double> close;
    std::vector<double> volume;

    std::size_t size() const { return dates.size(); }
};

struct CleaningReport {
    std::size_t duplicates_removed = 0;
    std::size_t imputed_open = 0;
    std::size_t imputed_high = 0;
    std::size_t imputed_low = 0;
    std::size_t imputed_close = 0;
    std::size_t imputed_volume = 0;
    std::size_t range_violations = 0; // rows where low/high do not bracket open/close
    std::size_t rows_in = 0;
    std::size_t rows_out = 0;

    std::size_t imputed_total() const {
        return imputed_open + imputed_high + imputed_low + imputed_close + imputed_volume;
    }
};

struct CleanResult {
    PriceSeries series;
    CleaningReport report;
};

// Expected header, byte for byte (LF or CRLF line endings accepted).
inline constexpr const char* kCsvHeader = "symbol,date,open,high,low,close,volume";

// Parses the whole stream. Empty numeric cells become missing values.
// Throws MalformedHeader / MalformedRow (with 1-based line number).
std::vector<OhlcvRecord> parse_csv(std::istream& input);

// Sort by date, collapse exact duplicates, impute missing cells with the
// per-field median over the whole series, tally everything in the report.
// Rows sharing a date but disagreeing on any field are an error.
CleanResult clean(const std::vector<OhlcvRecord>& records);

const std::vector<double>& extract_target(const PriceSeries& series, Field field = Field::close);

// Inverse of clean's record view; used for idempotence checks and CSV output.
std::vector<OhlcvRecord> to_records(const PriceSeries& series);

void write_csv(const PriceSeries& series, std::ostream& output);

} // namespace stackcast

#pragma once

#include "stackcast/ensemble.hpp"
#include "stackcast/market_data.hpp"
#include "stackcast/metrics.hpp"
#include "stackcast/models.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stackcast {

// Desk-scale stand-ins for real market data.
struct SyntheticSpec {
    enum class Kind { sine_noise, ar1_trend, random_walk };

    Kind kind = Kind::sine_noise;
    std::size_t length = 1000;
    double sigma = 0.05;
    std::uint64_t seed = 0;
    // sine_noise: close[t] = amplitude * sin(2*pi*t / period) + offset + noise
    double period = 60.0;
    double amplitude = 10.0;
    double offset = 100.0;
    // ar1_trend: close[t] = drift*t + phi*close[t-1] + noise, close[-1] = 0
    double phi = 0.5;
    double drift = 0.02;
    // random_walk: close[0] = start, close[t] = close[t-1] + noise
    double start = 100.0;
};

SyntheticSpec::Kind synthetic_kind_from_string(const std::string& name);

// Deterministic per seed. Open/high/low are small deterministic offsets
// around the close; volume is constant; dates are consecutive days from
// 2000-01-03.
PriceSeries generate_synthetic(const SyntheticSpec& spec);

struct ExperimentConfig {
    std::string input;      // OHLCV CSV path
    std::string output_dir; // all artifacts land here
    Field target_field = Field::close;
    std::size_t window = kDefaultWindow;
    std::size_t folds = 5;
    ScalerKind scaler = ScalerKind::minmax;
    std::vector<std::string> models = {"naive", "rnn", "ann", "lstm", "stack"};
    std::uint64_t seed = 42;
    TrainConfig train_defaults;
    std::map<std::string, TrainConfig> train_overrides;      // keyed by model name
    std::map<std::string, std::uint64_t> seed_overrides;     // explicit per-model seeds

    // Strict parse: unknown keys anywhere are errors.
    static ExperimentConfig from_json_file(const std::string& path);
    static ExperimentConfig from_json_text(const std::string& text);

    // Per-model training config: train seeds derive from the experiment seed
    // XOR a constant per model name, unless an override pins one.
    TrainConfig train_config_for(const std::string& model) const;
};

struct TableRow {
    std::string model;
    MetricsReport metrics; // price units, final held-out fold
};

struct ComparisonTable {
    std::vector<TableRow> rows; // sorted by R^2 descending
};

// Which source-series rows each pipeline stage consumed; evaluation targets
// live in [eval_target_begin, series_length) and no fitting stage may reach
// them.
struct RunTrace {
    std::size_t series_length = 0;
    std::size_t n_windows = 0;
    std::size_t window = 0;
    std::size_t base_train_windows_end = 0;
    std::size_t meta_windows_begin = 0;
    std::size_t meta_windows_end = 0;
    std::size_t eval_windows_begin = 0;
    std::size_t eval_windows_end = 0;
    std::size_t scaler_fit_series_end = 0; // scaler stats read series [0, end)
    std::size_t base_train_series_end = 0; // base training read series [0, end)
    std::size_t meta_series_end = 0;       // meta fitting read series [0, end)
    std::size_t eval_target_begin = 0;     // first series row reserved for evaluation
};

struct RunResult {
    ComparisonTable table;
    RunTrace trace;
    std::optional<StackingCoefficients> stack_coefficients;
    std::optional<MetaFitReport> stack_report;
    CleaningReport cleaning;
    std::map<std::string, std::string> prediction_files; // model -> relative path
    std::map<std::string, std::string> model_files;
};

// Full pipeline: parse, clean, scale (training range only), window, split,
// train, stack, evaluate on the untouched final fold, write every artifact
// under cfg.output_dir. Deterministic for fixed (input bytes, config).
RunResult run_experiment(const ExperimentConfig& cfg);

// `model,r2,mae,mse,rmse,n` at 17 significant digits.
void write_table_csv(const ComparisonTable& table, std::ostream& out);
ComparisonTable parse_table_csv(std::istream& in);

} // namespace stackcast

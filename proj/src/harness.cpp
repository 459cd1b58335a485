#include "stackcast/harness.hpp"

#include "stackcast/errors.hpp"
#include "stackcast/log.hpp"
#include "stackcast/preprocess.hpp"
#include "stackcast/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace stackcast {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// --- synthetic data ---

SyntheticSpec::Kind synthetic_kind_from_string(const std::string& name) {
    if (name == "sine_noise") return SyntheticSpec::Kind::sine_noise;
    if (name == "ar1_trend") return SyntheticSpec::Kind::ar1_trend;
    if (name == "random_walk") return SyntheticSpec::Kind::random_walk;
    throw InvalidSpec("unknown synthetic kind '" + name + "'");
}

PriceSeries generate_synthetic(const SyntheticSpec& spec) {
    // Long enough for the default pipeline (window 30, 5 folds).
    if (spec.length <= 42) throw InvalidSpec("synthetic series length must exceed 42");
    if (spec.sigma < 0.0) throw InvalidSpec("sigma must be >= 0");
    if (spec.period <= 0.0) throw InvalidSpec("period must be > 0");
    for (double v : {spec.sigma, spec.period, spec.amplitude, spec.offset, spec.phi, spec.drift,
                     spec.start})
        if (!std::isfinite(v)) throw InvalidSpec("synthetic parameters must be finite");

    RngStream rng(spec.seed);
    std::vector<double> closes(spec.length);
    switch (spec.kind) {
    case SyntheticSpec::Kind::sine_noise:
        for (std::size_t t = 0; t < spec.length; ++t)
            closes[t] = spec.amplitude *
                            std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / spec.period) +
                        spec.offset + spec.sigma * rng.normal();
        break;
    case SyntheticSpec::Kind::ar1_trend: {
        double prev = 0.0;
        for (std::size_t t = 0; t < spec.length; ++t) {
            prev = spec.drift * static_cast<double>(t) + spec.phi * prev +
                   spec.sigma * rng.normal();
            closes[t] = prev;
        }
        break;
    }
    case SyntheticSpec::Kind::random_walk:
        closes[0] = spec.start;
        for (std::size_t t = 1; t < spec.length; ++t)
            closes[t] = closes[t - 1] + spec.sigma * rng.normal();
        break;
    }

    PriceSeries series;
    series.symbol = "SYN";
    series.dates.reserve(spec.length);
    const std::chrono::sys_days base{std::chrono::year{2000} / 1 / 3};
    for (std::size_t t = 0; t < spec.length; ++t)
        series.dates.push_back(Date{base + std::chrono::days{static_cast<int>(t)}});
    series.open.resize(spec.length);
    series.high.resize(spec.length);
    series.low.resize(spec.length);
    series.close = closes;
    series.volume.assign(spec.length, 1000.0);
    for (std::size_t t = 0; t < spec.length; ++t) {
        const double half = 0.002 * (std::abs(closes[t]) + 1.0);
        series.open[t] = closes[t] - half;
        series.high[t] = closes[t] + half;
        series.low[t] = closes[t] - 2.0 * half;
    }
    return series;
}

// --- experiment config ---

namespace {

const std::set<std::string> kKnownModels = {"naive", "rnn", "ann", "lstm", "stack"};

// Stable per-model constant (the model name's bytes packed into a word),
// XORed with the experiment seed so concurrent learners draw
// independent streams.
std::uint64_t model_seed_constant(const std::string& name) {
    std::uint64_t packed = 0;
    for (char c : name) packed = (packed << 8) | static_cast<unsigned char>(c);
    return packed;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw InvalidSpec("config: unknown key '" + key + "' in " + where);
}

void apply_train_keys(TrainConfig& cfg, const json& obj, const std::string& where,
                      bool allow_seed, std::optional<std::uint64_t>* seed_out) {
    check_keys(obj,
               {"epochs", "batch_size", "learning_rate", "dropout_rate", "shuffle", "seed",
                "hidden_size", "num_layers"},
               where);
    if (obj.contains("epochs")) cfg.epochs = obj.at("epochs").get<std::size_t>();
    if (obj.contains("batch_size")) cfg.batch_size = obj.at("batch_size").get<std::size_t>();
    if (obj.contains("learning_rate")) cfg.learning_rate = obj.at("learning_rate").get<double>();
    if (obj.contains("dropout_rate")) cfg.dropout_rate = obj.at("dropout_rate").get<double>();
    if (obj.contains("shuffle")) cfg.shuffle = obj.at("shuffle").get<bool>();
    if (obj.contains("hidden_size")) cfg.hidden_size = obj.at("hidden_size").get<std::size_t>();
    if (obj.contains("num_layers")) cfg.num_layers = obj.at("num_layers").get<std::size_t>();
    if (obj.contains("seed")) {
        if (!allow_seed)
            throw InvalidSpec("config: 'seed' belongs on a specific model, not " + where);
        *seed_out = obj.at("seed").get<std::uint64_t>();
    }
}

} // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpec(std::string("config: ") + e.what());
    }
    check_keys(j,
               {"input", "output_dir", "target_field", "window", "folds", "scaler", "models",
                "seed", "train"},
               "the top level");

    ExperimentConfig cfg;
    try {
        cfg.input = j.at("input").get<std::string>();
        cfg.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("target_field"))
            cfg.target_field = field_from_string(j.at("target_field").get<std::string>());
        if (j.contains("window")) cfg.window = j.at("window").get<std::size_t>();
        if (j.contains("folds")) cfg.folds = j.at("folds").get<std::size_t>();
        if (j.contains("scaler")) {
            const auto name = j.at("scaler").get<std::string>();
            if (name == "minmax") cfg.scaler = ScalerKind::minmax;
            else if (name == "standard") cfg.scaler = ScalerKind::standard;
            else throw InvalidSpec("config: unknown scaler '" + name + "'");
        }
        if (j.contains("models")) cfg.models = j.at("models").get<std::vector<std::string>>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("train")) {
            const auto& train = j.at("train");
            check_keys(train, {"default", "naive", "rnn", "ann", "lstm", "stack"}, "'train'");
            if (train.contains("default"))
                apply_train_keys(cfg.train_defaults, train.at("default"), "'train.default'",
                                 /*allow_seed=*/false, nullptr);
            for (const auto& name : kKnownModels) {
                if (!train.contains(name)) continue;
                TrainConfig model_cfg = cfg.train_defaults;
                std::optional<std::uint64_t> seed;
                apply_train_keys(model_cfg, train.at(name), "'train." + name + "'",
                                 /*allow_seed=*/true, &seed);
                cfg.train_overrides[name] = model_cfg;
                if (seed) cfg.seed_overrides[name] = *seed;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpec(std::string("config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return from_json_text(text.str());
}

TrainConfig ExperimentConfig::train_config_for(const std::string& model) const {
    TrainConfig cfg =
        train_overrides.count(model) ? train_overrides.at(model) : train_defaults;
    cfg.seed = seed_overrides.count(model) ? seed_overrides.at(model)
                                           : (seed ^ model_seed_constant(model));
    return cfg;
}

// --- pipeline ---

namespace {

void validate_experiment(const ExperimentConfig& cfg) {
    if (cfg.input.empty()) throw InvalidSpec("config: 'input' is required");
    if (cfg.output_dir.empty()) throw InvalidSpec("config: 'output_dir' is required");
    if (cfg.window < 1) throw InvalidSpec("config: window must be >= 1");
    if (cfg.folds < 2) throw TooFewFolds("config: folds must be >= 2");
    if (cfg.models.empty()) throw InvalidSpec("config: at least one model required");
    std::set<std::string> seen;
    for (const auto& name : cfg.models) {
        if (!kKnownModels.count(name)) throw InvalidSpec("config: unknown model '" + name + "'");
        if (!seen.insert(name).second)
            throw InvalidSpec("config: model '" + name + "' listed twice");
    }
    for (const auto& name : kKnownModels) {
        const TrainConfig tc = cfg.train_config_for(name);
        if (tc.epochs < 1) throw InvalidSpec("config: train." + name + ".epochs must be >= 1");
        if (tc.batch_size < 1)
            throw InvalidSpec("config: train." + name + ".batch_size must be >= 1");
        if (tc.dropout_rate < 0.0 || tc.dropout_rate >= 1.0)
            throw InvalidRate("config: train." + name + ".dropout_rate must be in [0, 1)");
        if (tc.hidden_size < 1 || tc.num_layers < 1)
            throw InvalidSpec("config: train." + name + " architecture sizes must be >= 1");
    }
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const IoError& e) {
        throw IoError(std::string(name) + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(name) + ": " + e.what());
    } catch (const RuntimeFailure& e) {
        throw RuntimeFailure(std::string(name) + ": " + e.what());
    }
}

std::string format_value(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

json train_config_to_json(const TrainConfig& cfg) {
    json out;
    out["epochs"] = cfg.epochs;
    out["batch_size"] = cfg.batch_size;
    out["learning_rate"] = cfg.learning_rate;
    out["dropout_rate"] = cfg.dropout_rate;
    out["seed"] = cfg.seed;
    out["shuffle"] = cfg.shuffle;
    out["hidden_size"] = cfg.hidden_size;
    out["num_layers"] = cfg.num_layers;
    return out;
}

void write_predictions_csv(const std::string& path, const std::vector<Date>& dates,
                           std::span<const double> actual, std::span<const double> predicted) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "date,actual,predicted\n";
    for (std::size_t i = 0; i < actual.size(); ++i)
        out << format_date(dates[i]) << ',' << format_value(actual[i]) << ','
            << format_value(predicted[i]) << '\n';
}

} // namespace

void write_table_csv(const ComparisonTable& table, std::ostream& out) {
    out << "model,r2,mae,mse,rmse,n\n";
    for (const auto& row : table.rows)
        out << row.model << ',' << format_value(row.metrics.r2) << ','
            << format_value(row.metrics.mae) << ',' << format_value(row.metrics.mse) << ','
            << format_value(row.metrics.rmse) << ',' << row.metrics.n << '\n';
}

ComparisonTable parse_table_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "model,r2,mae,mse,rmse,n")
        throw ValidationError("not a comparison-table CSV");
    ComparisonTable table;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        TableRow parsed;
        std::getline(row, parsed.model, ',');
        std::getline(row, cell, ',');
        parsed.metrics.r2 = std::stod(cell);
        std::getline(row, cell, ',');
        parsed.metrics.mae = std::stod(cell);
        std::getline(row, cell, ',');
        parsed.metrics.mse = std::stod(cell);
        std::getline(row, cell, ',');
        parsed.metrics.rmse = std::stod(cell);
        std::getline(row, cell, ',');
        parsed.metrics.n = static_cast<std::size_t>(std::stoull(cell));
        table.rows.push_back(std::move(parsed));
    }
    return table;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
    validate_experiment(cfg); // messages carry their own "config:" stage tag

    const std::vector<OhlcvRecord> records = stage("load", [&] {
        std::ifstream in(cfg.input);
        if (!in) throw IoError("cannot read input '" + cfg.input + "'");
        return parse_csv(in);
    });

    RunResult result;
    const CleanResult cleaned = stage("clean", [&] { return clean(records); });
    result.cleaning = cleaned.report;
    log_info("cleaned " + std::to_string(cleaned.report.rows_in) + " rows -> " +
             std::to_string(cleaned.report.rows_out) + " (dups " +
             std::to_string(cleaned.report.duplicates_removed) + ", imputed " +
             std::to_string(cleaned.report.imputed_total()) + ")");

    const std::vector<double>& target = extract_target(cleaned.series, cfg.target_field);
    const std::size_t series_length = target.size();
    const std::size_t window = cfg.window;

    // Split geometry over window indices. Fold k-1 supplies the base-train /
    // meta-fit boundary; fold k's test block is the untouched evaluation set.
    const auto folds = stage("split", [&] {
        if (series_length <= window)
            throw SeriesTooShort("series has " + std::to_string(series_length) +
                                 " rows; window " + std::to_string(window) + " needs more");
        return time_series_split(series_length - window, cfg.folds);
    });
    const std::size_t n_windows = series_length - window;
    const FoldIndices& meta_fold = folds[folds.size() - 2];
    const FoldIndices& eval_fold = folds.back();
    const std::size_t base_train_end = meta_fold.train_end;

    RunTrace& trace = result.trace;
    trace.series_length = series_length;
    trace.n_windows = n_windows;
    trace.window = window;
    trace.base_train_windows_end = base_train_end;
    trace.meta_windows_begin = meta_fold.test_begin;
    trace.meta_windows_end = meta_fold.test_end;
    trace.eval_windows_begin = eval_fold.test_begin;
    trace.eval_windows_end = eval_fold.test_end;
    trace.eval_target_begin = eval_fold.test_begin + window;

    // Scaler statistics come from the series rows the base learners train
    // on: inputs and targets of windows [0, base_train_end).
    const std::size_t scaler_fit_end = base_train_end + window;
    const ScalerParams scaler = stage("scale", [&] {
        return fit_scaler(cfg.scaler,
                          std::span<const double>(target).first(scaler_fit_end));
    });
    const std::vector<double> scaled = apply_scaler(scaler, target);
    trace.scaler_fit_series_end = scaler_fit_end;

    const WindowedDataset all_windows = stage("window", [&] { return make_windows(scaled, window); });
    const WindowedDataset train_data = slice(all_windows, 0, base_train_end);
    const WindowedDataset meta_data = slice(all_windows, meta_fold.test_begin, meta_fold.test_end);
    const WindowedDataset eval_data = slice(all_windows, eval_fold.test_begin, eval_fold.test_end);
    trace.base_train_series_end = base_train_end + window;
    trace.meta_series_end = meta_fold.test_end + window;

    const auto requested = [&](const std::string& name) {
        return std::find(cfg.models.begin(), cfg.models.end(), name) != cfg.models.end();
    };
    const bool want_stack = requested("stack");

    std::map<std::string, ForecastModel> base_models;
    std::optional<StackedModel> stacked;

    stage("train", [&] {
        if (requested("naive"))
            base_models["naive"] = fit_naive(target, window, scaler);
        if (requested("rnn")) {
            log_info("training rnn");
            base_models["rnn"] = train_rnn(train_data, cfg.train_config_for("rnn"), scaler).first;
        }
        if (requested("ann") || want_stack) {
            log_info("training ann");
            base_models["ann"] = train_ann(train_data, cfg.train_config_for("ann"), scaler).first;
        }
        if (requested("lstm") || want_stack) {
            log_info("training lstm");
            base_models["lstm"] =
                train_lstm(train_data, cfg.train_config_for("lstm"), scaler).first;
        }
        if (want_stack) {
            log_info("fitting stack meta-model on " + std::to_string(meta_data.size()) +
                     " held-out samples");
            stacked = fit_stacking(base_models.at("lstm"), base_models.at("ann"), meta_data,
                                   base_train_end);
            result.stack_coefficients = stacked->coefficients;
            result.stack_report = stacked->report;
        }
        return 0;
    });

    // Final fold evaluation, in price units against the raw series.
    const std::size_t eval_n = eval_fold.test_end - eval_fold.test_begin;
    std::vector<double> actual(target.begin() + static_cast<std::ptrdiff_t>(trace.eval_target_begin),
                               target.begin() +
                                   static_cast<std::ptrdiff_t>(trace.eval_target_begin + eval_n));
    std::vector<Date> eval_dates(cleaned.series.dates.begin() +
                                     static_cast<std::ptrdiff_t>(trace.eval_target_begin),
                                 cleaned.series.dates.begin() +
                                     static_cast<std::ptrdiff_t>(trace.eval_target_begin + eval_n));

    std::map<std::string, std::vector<double>> predictions;
    stage("evaluate", [&] {
        for (const auto& name : cfg.models) {
            std::vector<double> prices = name == "stack"
                                             ? predict_stacked_prices(*stacked, eval_data.inputs)
                                             : predict_prices(base_models.at(name), eval_data.inputs);
            result.table.rows.push_back(TableRow{name, evaluate_all(actual, prices)});
            predictions[name] = std::move(prices);
        }
        return 0;
    });
    std::sort(result.table.rows.begin(), result.table.rows.end(),
              [](const TableRow& a, const TableRow& b) {
                  if (a.metrics.r2 != b.metrics.r2) return a.metrics.r2 > b.metrics.r2;
                  return a.model < b.model;
              });

    stage("report", [&] {
        std::error_code ec;
        fs::create_directories(fs::path(cfg.output_dir) / "models", ec);
        fs::create_directories(fs::path(cfg.output_dir) / "predictions", ec);
        if (ec) throw IoError("cannot create output directory '" + cfg.output_dir + "'");

        for (const auto& name : cfg.models) {
            const std::string model_rel = "models/" + name + ".json";
            const std::string pred_rel = "predictions/" + name + ".csv";
            const fs::path model_path = fs::path(cfg.output_dir) / model_rel;
            if (name == "stack") save_stacked(*stacked, model_path.string());
            else save_model(base_models.at(name), model_path.string());
            write_predictions_csv((fs::path(cfg.output_dir) / pred_rel).string(), eval_dates,
                                  actual, predictions.at(name));
            result.model_files[name] = model_rel;
            result.prediction_files[name] = pred_rel;
        }

        std::ofstream csv(fs::path(cfg.output_dir) / "report.csv");
        if (!csv) throw IoError("cannot write report.csv");
        write_table_csv(result.table, csv);

        json report;
        json config_echo;
        config_echo["input"] = cfg.input;
        config_echo["output_dir"] = cfg.output_dir;
        config_echo["target_field"] = field_to_string(cfg.target_field);
        config_echo["window"] = cfg.window;
        config_echo["folds"] = cfg.folds;
        config_echo["scaler"] = cfg.scaler == ScalerKind::minmax ? "minmax" : "standard";
        config_echo["models"] = cfg.models;
        config_echo["seed"] = cfg.seed;
        json train_echo;
        for (const auto& name : cfg.models)
            if (name != "naive") train_echo[name] = train_config_to_json(cfg.train_config_for(name));
        config_echo["train"] = std::move(train_echo);
        report["config"] = std::move(config_echo);

        report["cleaning"] = {{"rows_in", result.cleaning.rows_in},
                              {"rows_out", result.cleaning.rows_out},
                              {"duplicates_removed", result.cleaning.duplicates_removed},
                              {"imputed_cells",
                               {{"open", result.cleaning.imputed_open},
                                {"high", result.cleaning.imputed_high},
                                {"low", result.cleaning.imputed_low},
                                {"close", result.cleaning.imputed_close},
                                {"volume", result.cleaning.imputed_volume}}},
                              {"range_violations", result.cleaning.range_violations}};

        report["split"] = {{"series_length", trace.series_length},
                           {"window", trace.window},
                           {"n_windows", trace.n_windows},
                           {"base_train_windows", {0, trace.base_train_windows_end}},
                           {"meta_windows", {trace.meta_windows_begin, trace.meta_windows_end}},
                           {"eval_windows", {trace.eval_windows_begin, trace.eval_windows_end}},
                           {"scaler_fit_series", {0, trace.scaler_fit_series_end}}};

        json rows = json::array();
        for (const auto& row : result.table.rows) {
            json r;
            r["model"] = row.model;
            r["r2"] = row.metrics.r2;
            r["mae"] = row.metrics.mae;
            r["mse"] = row.metrics.mse;
            r["rmse"] = row.metrics.rmse;
            r["n"] = row.metrics.n;
            r["model_file"] = result.model_files.at(row.model);
            r["predictions"] = result.prediction_files.at(row.model);
            rows.push_back(std::move(r));
        }
        report["rows"] = std::move(rows);

        if (stacked) {
            report["stack"] = {{"coefficients",
                                {{"intercept", stacked->coefficients.intercept},
                                 {"lstm", stacked->coefficients.lstm_weight},
                                 {"ann", stacked->coefficients.ann_weight}}},
                               {"meta_mse", stacked->report.meta_mse},
                               {"base_mse",
                                {{"lstm", stacked->report.lstm_mse},
                                 {"ann", stacked->report.ann_mse}}},
                               {"meta_samples", stacked->report.n},
                               {"ridge_fallback", stacked->report.ridge_fallback}};
        }

        std::ofstream js(fs::path(cfg.output_dir) / "report.json");
        if (!js) throw IoError("cannot write report.json");
        js << report.dump(2) << '\n';
        return 0;
    });

    log_info("wrote " + cfg.output_dir + "/report.{csv,json}; best model: " +
             result.table.rows.front().model);
    return result;
}

} // namespace stackcast

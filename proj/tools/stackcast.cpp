// stackcast command-line interface: clean, synth, run, predict.

#include "stackcast/ensemble.hpp"
#include "stackcast/errors.hpp"
#include "stackcast/harness.hpp"
#include "stackcast/log.hpp"
#include "stackcast/market_data.hpp"
#include "stackcast/models.hpp"
#include "stackcast/preprocess.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

namespace {

using namespace stackcast;

// Data goes to a file, or to standard output when the path is "-".
class OutputTarget {
public:
    explicit OutputTarget(const std::string& path) {
        if (path == "-") return;
        file_.open(path);
        if (!file_) throw IoError("cannot write output '" + path + "'");
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

PriceSeries load_clean_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read input '" + path + "'");
    return clean(parse_csv(in)).series;
}

int run_clean(const std::string& input, const std::string& output) {
    std::ifstream in(input);
    if (!in) throw IoError("cannot read input '" + input + "'");
    const CleanResult result = clean(parse_csv(in));
    log_info("rows in " + std::to_string(result.report.rows_in) + ", out " +
             std::to_string(result.report.rows_out) + ", duplicates removed " +
             std::to_string(result.report.duplicates_removed) + ", cells imputed " +
             std::to_string(result.report.imputed_total()) + ", range violations " +
             std::to_string(result.report.range_violations));
    OutputTarget target(output);
    write_csv(result.series, target.stream());
    return 0;
}

int run_synth(const SyntheticSpec& spec, const std::string& output) {
    const PriceSeries series = generate_synthetic(spec);
    OutputTarget target(output);
    write_csv(series, target.stream());
    return 0;
}

int run_predict(const std::string& model_path, const std::string& input,
                const std::string& output) {
    const PriceSeries series = load_clean_series(input);
    const std::vector<double>& closes = extract_target(series);

    // Either a plain model file or a stacked container.
    std::optional<ForecastModel> base;
    std::optional<StackedModel> stacked;
    try {
        base = load_model_file(model_path);
    } catch (const ValidationError&) {
        stacked = load_stacked_file(model_path);
    }
    const ScalerParams& scaler = base ? base->scaler : stacked->base_lstm.scaler;
    const std::size_t window = base ? base->window : stacked->base_lstm.window;

    const std::vector<double> scaled = apply_scaler(scaler, closes);
    const WindowedDataset windows = make_windows(scaled, window);
    const std::vector<double> predicted = base ? predict_prices(*base, windows.inputs)
                                               : predict_stacked_prices(*stacked, windows.inputs);

    OutputTarget target(output);
    auto& out = target.stream();
    char buffer[40];
    out << "date,actual,predicted\n";
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const std::size_t t = windows.origin_index + i;
        out << format_date(series.dates[t]) << ',';
        std::snprintf(buffer, sizeof buffer, "%.17g", closes[t]);
        out << buffer << ',';
        std::snprintf(buffer, sizeof buffer, "%.17g", predicted[i]);
        out << buffer << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stackcast: stock-series forecasting with stacked ANN/LSTM ensembles"};
    app.require_subcommand(1);

    // clean
    std::string clean_input, clean_output;
    auto* cmd_clean = app.add_subcommand("clean", "Parse, deduplicate and impute an OHLCV CSV");
    cmd_clean->add_option("--input", clean_input, "input CSV")->required();
    cmd_clean->add_option("--output", clean_output, "output CSV ('-' for stdout)")->required();

    // synth
    SyntheticSpec spec;
    std::string synth_kind = "sine_noise", synth_output;
    auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic OHLCV CSV");
    cmd_synth->add_option("--kind", synth_kind, "sine_noise | ar1_trend | random_walk");
    cmd_synth->add_option("--n", spec.length, "series length");
    cmd_synth->add_option("--seed", spec.seed, "random seed");
    cmd_synth->add_option("--sigma", spec.sigma, "noise standard deviation");
    cmd_synth->add_option("--period", spec.period, "sine period");
    cmd_synth->add_option("--amplitude", spec.amplitude, "sine amplitude");
    cmd_synth->add_option("--offset", spec.offset, "sine offset");
    cmd_synth->add_option("--phi", spec.phi, "AR(1) coefficient");
    cmd_synth->add_option("--drift", spec.drift, "per-step drift");
    cmd_synth->add_option("--start", spec.start, "random-walk start value");
    cmd_synth->add_option("--output", synth_output, "output CSV ('-' for stdout)")->required();

    // run
    std::string run_config;
    std::optional<std::uint64_t> run_seed;
    auto* cmd_run = app.add_subcommand("run", "Run a full experiment from a JSON config");
    cmd_run->add_option("--config", run_config, "experiment config JSON")->required();
    cmd_run->add_option("--seed", run_seed, "override the config seed");

    // predict
    std::string predict_model, predict_input, predict_output;
    auto* cmd_predict = app.add_subcommand("predict", "Predict prices with a saved model");
    cmd_predict->add_option("--model", predict_model, "model file")->required();
    cmd_predict->add_option("--input", predict_input, "input CSV")->required();
    cmd_predict->add_option("--output", predict_output, "output CSV ('-' for stdout)")->required();

    try {
        app.parse(argc, argv);
        if (*cmd_clean) return run_clean(clean_input, clean_output);
        if (*cmd_synth) {
            spec.kind = synthetic_kind_from_string(synth_kind);
            return run_synth(spec, synth_output);
        }
        if (*cmd_run) {
            ExperimentConfig cfg = ExperimentConfig::from_json_file(run_config);
            if (run_seed) cfg.seed = *run_seed;
            run_experiment(cfg);
            return 0;
        }
        if (*cmd_predict) return run_predict(predict_model, predict_input, predict_output);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints help or the usage error
        return code == 0 ? 0 : 1;
    } catch (const ValidationError& e) {
        log_error(e.what());
        return 1;
    } catch (const Error& e) {
        log_error(e.what());
        return 2;
    } catch (const std::exception& e) {
        log_error(e.what());
        return 2;
    }
    return 0;
}

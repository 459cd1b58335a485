#include "stackcast/errors.hpp"
#include "stackcast/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace stackcast;
namespace fs = std::filesystem;

namespace {

// Scratch directory under the system temp root, wiped on entry and exit.
struct TempDir {
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path path;
};

void write_series_csv(const PriceSeries& series, const fs::path& path) {
    std::ofstream out(path);
    REQUIRE(out.good());
    write_csv(series, out);
}

std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream bytes;
        bytes << in.rdbuf();
        files[fs::relative(entry.path(), root).string()] = bytes.str();
    }
    return files;
}

} // namespace

TEST_CASE("synthetic series are deterministic per seed") {
    SyntheticSpec spec;
    spec.kind = SyntheticSpec::Kind::random_walk;
    spec.length = 100;
    spec.sigma = 1.0;
    spec.seed = 77;
    const PriceSeries a = generate_synthetic(spec);
    const PriceSeries b = generate_synthetic(spec);
    CHECK(a.close == b.close);
    spec.seed = 78;
    CHECK(generate_synthetic(spec).close != a.close);
}

TEST_CASE("noiseless sine is periodic") {
    SyntheticSpec spec;
    spec.kind = SyntheticSpec::Kind::sine_noise;
    spec.length = 200;
    spec.sigma = 0.0;
    spec.period = 50.0;
    const PriceSeries series = generate_synthetic(spec);
    for (std::size_t t = 0; t + 50 < series.size(); ++t)
        CHECK(series.close[t + 50] == doctest::Approx(series.close[t]).epsilon(1e-9));
}

TEST_CASE("ar1_trend with phi=0, drift=1, sigma=0 counts upward") {
    SyntheticSpec spec;
    spec.kind = SyntheticSpec::Kind::ar1_trend;
    spec.length = 50;
    spec.sigma = 0.0;
    spec.phi = 0.0;
    spec.drift = 1.0;
    const PriceSeries series = generate_synthetic(spec);
    // x_t = drift * t: 0, 1, 2, 3, 4
    for (int t = 0; t < 5; ++t) CHECK(series.close[t] == static_cast<double>(t));
}

TEST_CASE("noiseless random walk stays at its start") {
    SyntheticSpec spec;
    spec.kind = SyntheticSpec::Kind::random_walk;
    spec.length = 60;
    spec.sigma = 0.0;
    spec.start = 42.0;
    const PriceSeries series = generate_synthetic(spec);
    for (double v : series.close) CHECK(v == 42.0);
}

TEST_CASE("synthetic output is a valid cleanable series") {
    SyntheticSpec spec;
    spec.length = 120;
    spec.seed = 3;
    const PriceSeries series = generate_synthetic(spec);
    const auto [cleaned, report] = clean(to_records(series));
    CHECK(report.range_violations == 0);
    CHECK(report.duplicates_removed == 0);
    CHECK(cleaned.size() == 120);
}

TEST_CASE("synthetic spec validation") {
    SyntheticSpec spec;
    spec.length = 42;
    CHECK_THROWS_AS(generate_synthetic(spec), InvalidSpec);
    spec.length = 100;
    spec.sigma = -1.0;
    CHECK_THROWS_AS(generate_synthetic(spec), InvalidSpec);
    CHECK_THROWS_AS(synthetic_kind_from_string("brownian"), InvalidSpec);
}

TEST_CASE("config parsing: defaults, overrides, strictness") {
    const std::string text = R"({
        "input": "in.csv",
        "output_dir": "out",
        "window": 10,
        "models": ["naive", "lstm"],
        "seed": 7,
        "train": {
            "default": {"epochs": 3, "hidden_size": 8},
            "lstm": {"epochs": 5, "seed": 99}
        }
    })";
    const ExperimentConfig cfg = ExperimentConfig::from_json_text(text);
    CHECK(cfg.window == 10);
    CHECK(cfg.folds == 5);
    CHECK(cfg.train_config_for("naive").epochs == 3);
    CHECK(cfg.train_config_for("lstm").epochs == 5);
    CHECK(cfg.train_config_for("lstm").hidden_size == 8);
    CHECK(cfg.train_config_for("lstm").seed == 99);          // explicit
    CHECK(cfg.train_config_for("ann").seed == (7 ^ 0x616e6eULL)); // derived
    CHECK(cfg.train_config_for("ann").seed != cfg.train_config_for("rnn").seed);
}

TEST_CASE("config parsing rejects unknown keys and bad values") {
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(
                        R"({"input":"a","output_dir":"b","windw":3})"),
                    InvalidSpec);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(
                        R"({"input":"a","output_dir":"b","train":{"default":{"epocs":1}}})"),
                    InvalidSpec);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(
                        R"({"input":"a","output_dir":"b","train":{"default":{"seed":1}}})"),
                    InvalidSpec);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"output_dir":"b"})"), InvalidSpec);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"input":"a","output_dir":"b","scaler":"robust"})"),
                    InvalidSpec);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text("not json"), InvalidSpec);
}

TEST_CASE("run_experiment with only the naive model yields a one-row table") {
    TempDir dir("stackcast_test_naive");
    SyntheticSpec spec;
    spec.length = 80;
    spec.seed = 5;
    write_series_csv(generate_synthetic(spec), dir.path / "in.csv");

    ExperimentConfig cfg;
    cfg.input = (dir.path / "in.csv").string();
    cfg.output_dir = (dir.path / "out").string();
    cfg.window = 5;
    cfg.folds = 2;
    cfg.models = {"naive"};

    const RunResult result = run_experiment(cfg);
    REQUIRE(result.table.rows.size() == 1);
    CHECK(result.table.rows[0].model == "naive");
    // 75 windows, 2 folds -> test size 25
    CHECK(result.table.rows[0].metrics.n == 25);
    CHECK(fs::exists(dir.path / "out" / "report.csv"));
    CHECK(fs::exists(dir.path / "out" / "report.json"));
    CHECK(fs::exists(dir.path / "out" / "models" / "naive.json"));
    CHECK(fs::exists(dir.path / "out" / "predictions" / "naive.csv"));

    // one row -> header plus one line
    std::ifstream csv(dir.path / "out" / "report.csv");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 2);
}

TEST_CASE("run_experiment validates config before writing anything") {
    TempDir dir("stackcast_test_validate");
    ExperimentConfig cfg;
    cfg.input = (dir.path / "missing.csv").string();
    cfg.output_dir = (dir.path / "out").string();
    cfg.models = {"naive", "naive"};
    CHECK_THROWS_AS(run_experiment(cfg), InvalidSpec);
    CHECK(!fs::exists(dir.path / "out"));

    cfg.models = {"naive"};
    CHECK_THROWS_AS(run_experiment(cfg), IoError); // input missing
    CHECK(!fs::exists(dir.path / "out"));
}

TEST_CASE("pipeline stage is attached to propagated errors") {
    TempDir dir("stackcast_test_stage");
    ExperimentConfig cfg;
    cfg.input = (dir.path / "missing.csv").string();
    cfg.output_dir = (dir.path / "out").string();
    cfg.models = {"naive"};
    try {
        run_experiment(cfg);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("load:") == 0);
    }
}

TEST_CASE("full run with a stack: trace, dominance, determinism") {
    TempDir dir("stackcast_test_stack");
    SyntheticSpec spec;
    spec.kind = SyntheticSpec::Kind::sine_noise;
    spec.length = 160;
    spec.sigma = 0.02;
    spec.seed = 12;
    spec.period = 20.0;
    write_series_csv(generate_synthetic(spec), dir.path / "in.csv");

    ExperimentConfig cfg;
    cfg.input = (dir.path / "in.csv").string();
    cfg.output_dir = (dir.path / "out").string();
    cfg.window = 8;
    cfg.folds = 3;
    cfg.models = {"naive", "ann", "lstm", "stack"};
    cfg.seed = 99;
    cfg.train_defaults.epochs = 3;
    cfg.train_defaults.hidden_size = 8;
    cfg.train_defaults.num_layers = 1;

    const RunResult result = run_experiment(cfg);
    REQUIRE(result.table.rows.size() == 4);

    // Every fitting stage stops before the evaluation targets begin.
    const RunTrace& trace = result.trace;
    CHECK(trace.scaler_fit_series_end <= trace.eval_target_begin);
    CHECK(trace.base_train_series_end <= trace.eval_target_begin);
    CHECK(trace.meta_series_end <= trace.eval_target_begin);
    CHECK(trace.base_train_windows_end == trace.meta_windows_begin);
    CHECK(trace.meta_windows_end == trace.eval_windows_begin);
    CHECK(trace.eval_windows_end == trace.n_windows);

    // Structural stacking guarantees.
    REQUIRE(result.stack_report.has_value());
    CHECK(result.stack_report->meta_mse <=
          std::min(result.stack_report->lstm_mse, result.stack_report->ann_mse) + 1e-9);

    // Table rows share the evaluation sample count and sort by R^2.
    for (const auto& row : result.table.rows) CHECK(row.metrics.n == result.table.rows[0].metrics.n);
    for (std::size_t i = 1; i < result.table.rows.size(); ++i)
        CHECK(result.table.rows[i - 1].metrics.r2 >= result.table.rows[i].metrics.r2);

    // Byte-identical outputs when the same config runs again.
    const auto first = snapshot_tree(dir.path / "out");
    run_experiment(cfg);
    const auto second = snapshot_tree(dir.path / "out");
    REQUIRE(first.size() == second.size());
    for (const auto& [name, bytes] : first) {
        REQUIRE(second.count(name) == 1);
        CHECK(second.at(name) == bytes);
    }
}

TEST_CASE("comparison table CSV round-trips") {
    ComparisonTable table;
    table.rows.push_back(TableRow{"stack", {0.91234567890123456, 1.5, 2.25, 1.5, 40}});
    table.rows.push_back(TableRow{"naive", {-0.125, 3.0, 12.5, 3.5355339059327378, 40}});
    std::ostringstream out;
    write_table_csv(table, out);

    const std::string text = out.str();
    CHECK(text.substr(0, text.find('\n')) == "model,r2,mae,mse,rmse,n");

    std::istringstream in(text);
    const ComparisonTable parsed = parse_table_csv(in);
    REQUIRE(parsed.rows.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(parsed.rows[i].model == table.rows[i].model);
        CHECK(parsed.rows[i].metrics.r2 == table.rows[i].metrics.r2);
        CHECK(parsed.rows[i].metrics.mae == table.rows[i].metrics.mae);
        CHECK(parsed.rows[i].metrics.mse == table.rows[i].metrics.mse);
        CHECK(parsed.rows[i].metrics.rmse == table.rows[i].metrics.rmse);
        CHECK(parsed.rows[i].metrics.n == table.rows[i].metrics.n);
    }
}

TEST_CASE("report.json echoes the seed and split plan") {
    TempDir dir("stackcast_test_json");
    SyntheticSpec spec;
    spec.length = 70;
    spec.seed = 5;
    write_series_csv(generate_synthetic(spec), dir.path / "in.csv");

    ExperimentConfig cfg;
    cfg.input = (dir.path / "in.csv").string();
    cfg.output_dir = (dir.path / "out").string();
    cfg.window = 4;
    cfg.folds = 2;
    cfg.models = {"naive"};
    cfg.seed = 31415;
    run_experiment(cfg);

    std::ifstream in(dir.path / "out" / "report.json");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    CHECK(text.find("31415") != std::string::npos);
    CHECK(text.find("eval_windows") != std::string::npos);
    CHECK(text.find("\"model\": \"naive\"") != std::string::npos);
}

#include "stackcast/ensemble.hpp"

#include "model_json.hpp"
#include "stackcast/errors.hpp"
#include "stackcast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace stackcast {

namespace {

// Gaussian elimination with partial pivoting on the augmented system.
// Returns false when a pivot falls below `pivot_floor`.
bool solve_inplace(Matrix a, std::vector<double> rhs, double pivot_floor,
                   std::vector<double>& solution) {
    const std::size_t p = rhs.size();
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot_row = col;
        for (std::size_t r = col + 1; r < p; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot_row, col))) pivot_row = r;
        if (std::abs(a(pivot_row, col)) <= pivot_floor) return false;
        if (pivot_row != col) {
            for (std::size_t c = 0; c < p; ++c) std::swap(a(col, c), a(pivot_row, c));
            std::swap(rhs[col], rhs[pivot_row]);
        }
        for (std::size_t r = col + 1; r < p; ++r) {
            const double factor = a(r, col) / a(col, col);
            if (factor == 0.0) continue;
            for (std::size_t c = col; c < p; ++c) a(r, c) -= factor * a(col, c);
            rhs[r] -= factor * rhs[col];
        }
    }
    solution.assign(p, 0.0);
    for (std::size_t r = p; r-- > 0;) {
        double value = rhs[r];
        for (std::size_t c = r + 1; c < p; ++c) value -= a(r, c) * solution[c];
        solution[r] = value / a(r, r);
    }
    return true;
}

} // namespace

OlsFit fit_ols(const Matrix& design, std::span<const double> targets) {
    const std::size_t n = design.rows();
    const std::size_t p = design.cols();
    if (n != targets.size())
        throw LengthMismatch("fit_ols: " + std::to_string(n) + " rows vs " +
                             std::to_string(targets.size()) + " targets");
    if (n < p)
        throw TooFewSamples("fit_ols: " + std::to_string(n) + " samples for " + std::to_string(p) +
                            " coefficients");

    // Normal equations: gram = X'X, moment = X'y.
    Matrix gram = matmul(design, design, /*trans_a=*/true);
    std::vector<double> moment(p, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < p; ++c) moment[c] += design(r, c) * targets[r];

    double scale = 0.0;
    for (double v : gram.entries()) scale = std::max(scale, std::abs(v));

    OlsFit fit;
    if (solve_inplace(gram, moment, 1e-10 * scale, fit.beta)) return fit;

    fit.ridge_fallback = true;
    Matrix jittered = gram;
    for (std::size_t i = 0; i < p; ++i) jittered(i, i) += 1e-8;
    if (!solve_inplace(std::move(jittered), std::move(moment), 0.0, fit.beta))
        throw ValidationError("fit_ols: singular system even with ridge jitter");
    return fit;
}

StackedModel fit_stacking(ForecastModel base_lstm, ForecastModel base_ann,
                          const WindowedDataset& meta_data,
                          std::optional<std::size_t> base_train_end_window) {
    if (base_lstm.window != base_ann.window)
        throw ShapeMismatch("fit_stacking: base models disagree on window length");
    if (!(base_lstm.scaler == base_ann.scaler))
        throw ValidationError("fit_stacking: base models disagree on scaler");
    if (meta_data.window != base_lstm.window)
        throw ShapeMismatch("fit_stacking: meta data window length mismatch");

    if (base_train_end_window) {
        const std::size_t meta_first_window = meta_data.origin_index - meta_data.window;
        if (meta_first_window < *base_train_end_window)
            throw LeakageDetected("fit_stacking: meta samples start at window " +
                                  std::to_string(meta_first_window) +
                                  " inside the base training range [0, " +
                                  std::to_string(*base_train_end_window) + ")");
    }

    const std::size_t n = meta_data.size();
    if (n < 3) throw TooFewSamples("fit_stacking: need at least 3 meta samples");

    const std::vector<double> pred_lstm = predict(base_lstm, meta_data.inputs);
    const std::vector<double> pred_ann = predict(base_ann, meta_data.inputs);

    Matrix design(n, 3);
    for (std::size_t r = 0; r < n; ++r) {
        design(r, 0) = 1.0;
        design(r, 1) = pred_lstm[r];
        design(r, 2) = pred_ann[r];
    }
    const OlsFit fit = fit_ols(design, meta_data.targets);

    StackedModel model;
    model.base_lstm = std::move(base_lstm);
    model.base_ann = std::move(base_ann);
    model.coefficients = {fit.beta[0], fit.beta[1], fit.beta[2]};

    MetaFitReport& report = model.report;
    report.n = n;
    report.ridge_fallback = fit.ridge_fallback;
    report.residuals.resize(n);
    double sq = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double fitted =
            fit.beta[0] + fit.beta[1] * pred_lstm[r] + fit.beta[2] * pred_ann[r];
        report.residuals[r] = meta_data.targets[r] - fitted;
        sq += report.residuals[r] * report.residuals[r];
    }
    report.meta_mse = sq / static_cast<double>(n);
    report.lstm_mse = mse(meta_data.targets, pred_lstm);
    report.ann_mse = mse(meta_data.targets, pred_ann);
    return model;
}

std::vector<double> predict_stacked(const StackedModel& model, const Matrix& windows) {
    const std::vector<double> pred_lstm = predict(model.base_lstm, windows);
    const std::vector<double> pred_ann = predict(model.base_ann, windows);
    std::vector<double> out(pred_lstm.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = model.coefficients.intercept + model.coefficients.lstm_weight * pred_lstm[i] +
                 model.coefficients.ann_weight * pred_ann[i];
    return out;
}

std::vector<double> predict_stacked_prices(const StackedModel& model, const Matrix& windows) {
    return invert_scaler(model.base_lstm.scaler, predict_stacked(model, windows));
}

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kStackedFormat = "stackcast-stacked-model";
constexpr int kStackedVersion = 1;

} // namespace

void save_stacked(const StackedModel& model, std::ostream& out) {
    json j;
    j["format"] = kStackedFormat;
    j["version"] = kStackedVersion;
    j["coefficients"] = {{"intercept", model.coefficients.intercept},
                         {"lstm", model.coefficients.lstm_weight},
                         {"ann", model.coefficients.ann_weight}};
    j["report"] = {{"meta_mse", model.report.meta_mse},
                   {"lstm_mse", model.report.lstm_mse},
                   {"ann_mse", model.report.ann_mse},
                   {"n", model.report.n},
                   {"ridge_fallback", model.report.ridge_fallback},
                   {"residuals", model.report.residuals}};
    j["base_lstm"] = model_to_json(model.base_lstm);
    j["base_ann"] = model_to_json(model.base_ann);
    out << j.dump(2) << '\n';
}

void save_stacked(const StackedModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write stacked model file '" + path + "'");
    save_stacked(model, out);
}

StackedModel load_stacked(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("stacked model file: ") + e.what());
    }
    if (j.value("format", "") != kStackedFormat)
        throw ValidationError("not a stackcast stacked-model file");
    if (j.at("version").get<int>() != kStackedVersion)
        throw ValidationError("unsupported stacked model file version");

    StackedModel model;
    const auto& coeff = j.at("coefficients");
    model.coefficients.intercept = coeff.at("intercept").get<double>();
    model.coefficients.lstm_weight = coeff.at("lstm").get<double>();
    model.coefficients.ann_weight = coeff.at("ann").get<double>();
    const auto& report = j.at("report");
    model.report.meta_mse = report.at("meta_mse").get<double>();
    model.report.lstm_mse = report.at("lstm_mse").get<double>();
    model.report.ann_mse = report.at("ann_mse").get<double>();
    model.report.n = report.at("n").get<std::size_t>();
    model.report.ridge_fallback = report.at("ridge_fallback").get<bool>();
    model.report.residuals = report.at("residuals").get<std::vector<double>>();
    model.base_lstm = model_from_json(j.at("base_lstm"));
    model.base_ann = model_from_json(j.at("base_ann"));
    return model;
}

StackedModel load_stacked_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read stacked model file '" + path + "'");
    return load_stacked(in);
}

} // namespace stackcast

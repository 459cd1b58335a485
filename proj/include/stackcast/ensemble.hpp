#pragma once

#include "stackcast/models.hpp"
#include "stackcast/preprocess.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace stackcast {

// Meta-model of the stack: prediction = intercept
//   + lstm_weight * base-LSTM prediction + ann_weight * base-ANN prediction.
struct StackingCoefficients {
    double intercept = 0.0;
    double lstm_weight = 0.0;
    double ann_weight = 0.0;

    bool operator==(const StackingCoefficients&) const = default;
};

struct OlsFit {
    std::vector<double> beta;
    bool ridge_fallback = false; // normal equations were near-singular
};

// Least squares via the normal equations X'X b = X'y. A pivot below 1e-10
// relative to the matrix scale triggers a refit with 1e-8 ridge jitter on
// the diagonal, reported through ridge_fallback.
OlsFit fit_ols(const Matrix& design, std::span<const double> targets);

struct MetaFitReport {
    std::vector<double> residuals; // y - X beta on the meta-fit samples
    double meta_mse = 0.0;
    double lstm_mse = 0.0; // base MSEs on the same samples
    double ann_mse = 0.0;
    std::size_t n = 0;
    bool ridge_fallback = false;
};

struct StackedModel {
    ForecastModel base_lstm;
    ForecastModel base_ann;
    StackingCoefficients coefficients;
    MetaFitReport report;
};

// Fit the meta-model on held-out samples the bases never trained on. When
// the caller knows where base training ended (in window indices), pass it so
// overlap is rejected rather than trusted.
StackedModel fit_stacking(ForecastModel base_lstm, ForecastModel base_ann,
                          const WindowedDataset& meta_data,
                          std::optional<std::size_t> base_train_end_window = std::nullopt);

// Scaled-space ensemble prediction per window.
std::vector<double> predict_stacked(const StackedModel& model, const Matrix& windows);

// The price-unit variant inverts the shared base scaler once, at the end.
std::vector<double> predict_stacked_prices(const StackedModel& model, const Matrix& windows);

// Single container embedding both base models; round-trips exactly.
void save_stacked(const StackedModel& model, std::ostream& out);
void save_stacked(const StackedModel& model, const std::string& path);
StackedModel load_stacked(std::istream& in);
StackedModel load_stacked_file(const std::string& path);

} // namespace stackcast

#pragma once

#include "stackcast/nn.hpp"
#include "stackcast/preprocess.hpp"
#include "stackcast/recurrent.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace stackcast {

// Training knobs. None of these come from published values; they are
// surfaced here and echoed in FitReport so runs are self-describing.
// hidden_size / num_layers shrink the recurrent models for fast tests
// (num_layers applies to the LSTM; the RNN baseline is always one layer).
struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double dropout_rate = 0.2; // recurrent models only
    std::uint64_t seed = 0;
    bool shuffle = true;
    std::size_t hidden_size = 100;
    std::size_t num_layers = 2;

    bool operator==(const TrainConfig&) const = default;
};

enum class ModelKind { naive, rnn, ann, lstm };

std::string model_kind_to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// A trained base learner plus everything needed to reproduce its
// predictions: window length and the scaler its inputs were prepared with.
struct ForecastModel {
    ModelKind kind = ModelKind::naive;
    std::size_t window = kDefaultWindow;
    ScalerParams scaler;

    std::vector<DenseParams> dense_layers;    // ann: the 3 dense layers; lstm/rnn: the head
    std::vector<LstmCellParams> lstm_layers;
    std::vector<RnnCellParams> rnn_layers;

    bool operator==(const ForecastModel&) const = default;
};

struct FitReport {
    std::vector<double> epoch_loss; // training MSE per epoch, scaled space
    double final_loss = 0.0;
    double wall_seconds = 0.0;
    TrainConfig config;
};

// The ANN architecture's forward/backward, exposed so gradient checks can
// exercise the exact code training uses. Layer layout: relu, relu, identity;
// ParamSet order [W1, b1, W2, b2, W3, b3].
struct AnnCache {
    Matrix x, z1, a1, z2, a2;
};

Matrix ann_forward(const std::vector<DenseParams>& layers, const Matrix& x,
                   AnnCache* cache = nullptr);
ParamSet ann_backward(const std::vector<DenseParams>& layers, const AnnCache& cache,
                      const Matrix& dpred);
ParamSet ann_to_params(const std::vector<DenseParams>& layers);
std::vector<DenseParams> ann_from_params(const ParamSet& params);

// ANN: dense(T -> 100, relu) -> dense(100 -> 50, relu) -> dense(50 -> 1).
// Adam on MSE over shuffled mini-batches; deterministic for a fixed seed.
std::pair<ForecastModel, FitReport> train_ann(const WindowedDataset& data, const TrainConfig& cfg,
                                              const ScalerParams& scaler = ScalerParams::identity());

// Stacked LSTM (default 2 layers x 100 units, dropout on layer outputs)
// with a linear head on the final hidden state.
std::pair<ForecastModel, FitReport> train_lstm(const WindowedDataset& data, const TrainConfig& cfg,
                                               const ScalerParams& scaler = ScalerParams::identity());

// Vanilla tanh RNN baseline, one layer, same head and loop.
std::pair<ForecastModel, FitReport> train_rnn(const WindowedDataset& data, const TrainConfig& cfg,
                                              const ScalerParams& scaler = ScalerParams::identity());

// Floor baseline: the prediction for any window is its last element.
ForecastModel fit_naive(const std::vector<double>& series, std::size_t window = kDefaultWindow,
                        const ScalerParams& scaler = ScalerParams::identity());

// One prediction per window, in scaled space. Inference mode: dropout off,
// deterministic.
std::vector<double> predict(const ForecastModel& model, const Matrix& windows);

// predict, then invert the model's stored scaler back to price units.
std::vector<double> predict_prices(const ForecastModel& model, const Matrix& windows);

// Versioned self-describing container (format documented in the README);
// load(save(m)) == m exactly, weights at full 64-bit precision.
void save_model(const ForecastModel& model, std::ostream& out);
void save_model(const ForecastModel& model, const std::string& path);
ForecastModel load_model(std::istream& in);
ForecastModel load_model_file(const std::string& path);

} // namespace stackcast

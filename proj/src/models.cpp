#include "stackcast/models.hpp"

#include "stackcast/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace stackcast {

std::string model_kind_to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::naive: return "naive";
    case ModelKind::rnn: return "rnn";
    case ModelKind::ann: return "ann";
    case ModelKind::lstm: return "lstm";
    }
    throw ValidationError("unknown model kind");
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "naive") return ModelKind::naive;
    if (name == "rnn") return ModelKind::rnn;
    if (name == "ann") return ModelKind::ann;
    if (name == "lstm") return ModelKind::lstm;
    throw ValidationError("unknown model kind '" + name + "'");
}

namespace {

constexpr std::size_t kAnnHidden1 = 100;
constexpr std::size_t kAnnHidden2 = 50;

void check_trainable(const WindowedDataset& data, const TrainConfig& cfg) {
    if (data.size() == 0) throw EmptyDataset("training data is empty");
    if (cfg.epochs < 1) throw ValidationError("epochs must be >= 1");
    if (cfg.batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0)
        throw InvalidRate("dropout_rate must be in [0, 1)");
    if (cfg.hidden_size < 1) throw ValidationError("hidden_size must be >= 1");
    if (cfg.num_layers < 1) throw ValidationError("num_layers must be >= 1");
}

Matrix gather_rows(const Matrix& source, const std::vector<std::size_t>& order,
                   std::size_t begin, std::size_t end) {
    Matrix out(end - begin, source.cols());
    for (std::size_t i = begin; i < end; ++i)
        for (std::size_t c = 0; c < source.cols(); ++c) out(i - begin, c) = source(order[i], c);
    return out;
}

std::vector<double> gather(const std::vector<double>& source, const std::vector<std::size_t>& order,
                           std::size_t begin, std::size_t end) {
    std::vector<double> out(end - begin);
    for (std::size_t i = begin; i < end; ++i) out[i - begin] = source[order[i]];
    return out;
}

// Shared mini-batch loop. step_fn(batch_x, batch_y, params, rng) must return
// the batch loss and write gradients; parameters advance by Adam.
template <typename StepFn>
FitReport run_training(const WindowedDataset& data, const TrainConfig& cfg, ParamSet& params,
                       RngStream& rng, StepFn step_fn) {
    const auto start = std::chrono::steady_clock::now();
    AdamState state = AdamState::init(params, AdamConfig{.learning_rate = cfg.learning_rate});

    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    FitReport report;
    report.config = cfg;
    report.epoch_loss.reserve(cfg.epochs);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
            const std::size_t end = std::min(begin + cfg.batch_size, n);
            const Matrix batch_x = gather_rows(data.inputs, order, begin, end);
            const std::vector<double> batch_y = gather(data.targets, order, begin, end);
            ParamSet grads;
            const double loss = step_fn(batch_x, batch_y, params, rng, grads);
            epoch_loss += loss * static_cast<double>(end - begin);
            auto [next_params, next_state] = adam_step(params, grads, std::move(state));
            params = std::move(next_params);
            state = std::move(next_state);
        }
        report.epoch_loss.push_back(epoch_loss / static_cast<double>(n));
    }
    report.final_loss = report.epoch_loss.back();
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::vector<double> matrix_to_vector(const Matrix& column) {
    return column.entries();
}

Matrix vector_to_column(const std::vector<double>& values) {
    Matrix out(values.size(), 1);
    out.entries() = values;
    return out;
}

} // namespace

Matrix ann_forward(const std::vector<DenseParams>& layers, const Matrix& x, AnnCache* cache) {
    Matrix z1 = dense_forward(x, layers[0]);
    Matrix a1 = activate(Activation::relu, z1);
    Matrix z2 = dense_forward(a1, layers[1]);
    Matrix a2 = activate(Activation::relu, z2);
    Matrix z3 = dense_forward(a2, layers[2]);
    if (cache) *cache = AnnCache{x, std::move(z1), std::move(a1), std::move(z2), std::move(a2)};
    return z3;
}

// Gradient order matches the ParamSet layout [W1, b1, W2, b2, W3, b3].
ParamSet ann_backward(const std::vector<DenseParams>& layers, const AnnCache& cache,
                      const Matrix& dpred) {
    Matrix dw3 = matmul(cache.a2, dpred, true);
    Matrix db3 = column_sums(dpred);
    Matrix da2 = matmul(dpred, layers[2].weights, false, true);
    Matrix dz2 = hadamard(da2, activate_grad(Activation::relu, cache.z2));
    Matrix dw2 = matmul(cache.a1, dz2, true);
    Matrix db2 = column_sums(dz2);
    Matrix da1 = matmul(dz2, layers[1].weights, false, true);
    Matrix dz1 = hadamard(da1, activate_grad(Activation::relu, cache.z1));
    Matrix dw1 = matmul(cache.x, dz1, true);
    Matrix db1 = column_sums(dz1);
    return {std::move(dw1), std::move(db1), std::move(dw2), std::move(db2), std::move(dw3),
            std::move(db3)};
}

ParamSet ann_to_params(const std::vector<DenseParams>& layers) {
    ParamSet params;
    for (const auto& layer : layers) {
        params.push_back(layer.weights);
        params.push_back(layer.bias);
    }
    return params;
}

std::vector<DenseParams> ann_from_params(const ParamSet& params) {
    std::vector<DenseParams> layers;
    for (std::size_t i = 0; i + 1 < params.size(); i += 2)
        layers.push_back(DenseParams{params[i], params[i + 1]});
    return layers;
}

namespace {

// --- recurrent helpers: ParamSet layout [per layer: W_in, W_rec, bias][head W, b] ---

ParamSet lstm_to_params(const std::vector<LstmCellParams>& layers, const DenseParams& head) {
    ParamSet params;
    for (const auto& layer : layers) {
        params.push_back(layer.w_in);
        params.push_back(layer.w_rec);
        params.push_back(layer.bias);
    }
    params.push_back(head.weights);
    params.push_back(head.bias);
    return params;
}

void lstm_from_params(const ParamSet& params, std::vector<LstmCellParams>& layers,
                      DenseParams& head) {
    std::size_t i = 0;
    for (auto& layer : layers) {
        layer.w_in = params[i++];
        layer.w_rec = params[i++];
        layer.bias = params[i++];
    }
    head.weights = params[i++];
    head.bias = params[i++];
}

ParamSet rnn_to_params(const std::vector<RnnCellParams>& layers, const DenseParams& head) {
    ParamSet params;
    for (const auto& layer : layers) {
        params.push_back(layer.w_in);
        params.push_back(layer.w_rec);
        params.push_back(layer.bias);
    }
    params.push_back(head.weights);
    params.push_back(head.bias);
    return params;
}

void rnn_from_params(const ParamSet& params, std::vector<RnnCellParams>& layers,
                     DenseParams& head) {
    std::size_t i = 0;
    for (auto& layer : layers) {
        layer.w_in = params[i++];
        layer.w_rec = params[i++];
        layer.bias = params[i++];
    }
    head.weights = params[i++];
    head.bias = params[i++];
}

} // namespace

std::pair<ForecastModel, FitReport> train_ann(const WindowedDataset& data, const TrainConfig& cfg,
                                              const ScalerParams& scaler) {
    check_trainable(data, cfg);
    RngStream rng(cfg.seed);

    std::vector<DenseParams> layers;
    layers.push_back(init_dense(data.window, kAnnHidden1, rng));
    layers.push_back(init_dense(kAnnHidden1, kAnnHidden2, rng));
    layers.push_back(init_dense(kAnnHidden2, 1, rng));
    ParamSet params = ann_to_params(layers);

    FitReport report = run_training(
        data, cfg, params, rng,
        [](const Matrix& batch_x, const std::vector<double>& batch_y, const ParamSet& current,
           RngStream&, ParamSet& grads) {
            const auto current_layers = ann_from_params(current);
            AnnCache cache;
            const Matrix pred = ann_forward(current_layers, batch_x, &cache);
            const MseResult loss = mse_loss(matrix_to_vector(pred), batch_y);
            grads = ann_backward(current_layers, cache, vector_to_column(loss.grad));
            return loss.loss;
        });

    ForecastModel model;
    model.kind = ModelKind::ann;
    model.window = data.window;
    model.scaler = scaler;
    model.dense_layers = ann_from_params(params);
    return {std::move(model), std::move(report)};
}

std::pair<ForecastModel, FitReport> train_lstm(const WindowedDataset& data, const TrainConfig& cfg,
                                               const ScalerParams& scaler) {
    check_trainable(data, cfg);
    RngStream rng(cfg.seed);

    std::vector<LstmCellParams> layers;
    for (std::size_t i = 0; i < cfg.num_layers; ++i)
        layers.push_back(LstmCellParams::init(i == 0 ? 1 : cfg.hidden_size, cfg.hidden_size, rng));
    DenseParams head = init_dense(cfg.hidden_size, 1, rng);
    ParamSet params = lstm_to_params(layers, head);

    FitReport report = run_training(
        data, cfg, params, rng,
        [&](const Matrix& batch_x, const std::vector<double>& batch_y, const ParamSet& current,
            RngStream& stream, ParamSet& grads) {
            std::vector<LstmCellParams> net = layers; // shapes
            DenseParams net_head;
            lstm_from_params(current, net, net_head);

            const StepInputs steps = windows_to_steps(batch_x);
            auto forward = lstm_sequence_forward(steps, net, cfg.dropout_rate, RunMode::train,
                                                 stream, /*collect_cache=*/true);
            const Matrix pred = dense_forward(forward.last_hidden, net_head);
            const MseResult loss = mse_loss(matrix_to_vector(pred), batch_y);

            const Matrix dpred = vector_to_column(loss.grad);
            Matrix dw_head = matmul(forward.last_hidden, dpred, true);
            Matrix db_head = column_sums(dpred);
            const Matrix dh = matmul(dpred, net_head.weights, false, true);
            auto back = lstm_backward(forward.cache, net, dh);

            grads.clear();
            for (auto& layer_grads : back.layer_grads) {
                grads.push_back(std::move(layer_grads.w_in));
                grads.push_back(std::move(layer_grads.w_rec));
                grads.push_back(std::move(layer_grads.bias));
            }
            grads.push_back(std::move(dw_head));
            grads.push_back(std::move(db_head));
            return loss.loss;
        });

    lstm_from_params(params, layers, head);

    ForecastModel model;
    model.kind = ModelKind::lstm;
    model.window = data.window;
    model.scaler = scaler;
    model.lstm_layers = std::move(layers);
    model.dense_layers.push_back(std::move(head));
    return {std::move(model), std::move(report)};
}

std::pair<ForecastModel, FitReport> train_rnn(const WindowedDataset& data, const TrainConfig& cfg,
                                              const ScalerParams& scaler) {
    check_trainable(data, cfg);
    RngStream rng(cfg.seed);

    // The RNN baseline is a single recurrent layer regardless of num_layers.
    std::vector<RnnCellParams> layers{RnnCellParams::init(1, cfg.hidden_size, rng)};
    DenseParams head = init_dense(cfg.hidden_size, 1, rng);
    ParamSet params = rnn_to_params(layers, head);

    FitReport report = run_training(
        data, cfg, params, rng,
        [&](const Matrix& batch_x, const std::vector<double>& batch_y, const ParamSet& current,
            RngStream& stream, ParamSet& grads) {
            std::vector<RnnCellParams> net = layers;
            DenseParams net_head;
            rnn_from_params(current, net, net_head);

            const StepInputs steps = windows_to_steps(batch_x);
            auto forward = rnn_sequence_forward(steps, net, cfg.dropout_rate, RunMode::train,
                                                stream, /*collect_cache=*/true);
            const Matrix pred = dense_forward(forward.last_hidden, net_head);
            const MseResult loss = mse_loss(matrix_to_vector(pred), batch_y);

            const Matrix dpred = vector_to_column(loss.grad);
            Matrix dw_head = matmul(forward.last_hidden, dpred, true);
            Matrix db_head = column_sums(dpred);
            const Matrix dh = matmul(dpred, net_head.weights, false, true);
            auto back = rnn_backward(forward.cache, net, dh);

            grads.clear();
            for (auto& layer_grads : back.layer_grads) {
                grads.push_back(std::move(layer_grads.w_in));
                grads.push_back(std::move(layer_grads.w_rec));
                grads.push_back(std::move(layer_grads.bias));
            }
            grads.push_back(std::move(dw_head));
            grads.push_back(std::move(db_head));
            return loss.loss;
        });

    rnn_from_params(params, layers, head);

    ForecastModel model;
    model.kind = ModelKind::rnn;
    model.window = data.window;
    model.scaler = scaler;
    model.rnn_layers = std::move(layers);
    model.dense_layers.push_back(std::move(head));
    return {std::move(model), std::move(report)};
}

ForecastModel fit_naive(const std::vector<double>&, std::size_t window,
                        const ScalerParams& scaler) {
    ForecastModel model;
    model.kind = ModelKind::naive;
    model.window = window;
    model.scaler = scaler;
    return model;
}

std::vector<double> predict(const ForecastModel& model, const Matrix& windows) {
    if (windows.cols() != model.window)
        throw ShapeMismatch("predict: window length " + std::to_string(windows.cols()) +
                            " but model expects " + std::to_string(model.window));
    switch (model.kind) {
    case ModelKind::naive: {
        std::vector<double> out(windows.rows());
        for (std::size_t r = 0; r < windows.rows(); ++r) out[r] = windows(r, windows.cols() - 1);
        return out;
    }
    case ModelKind::ann:
        return matrix_to_vector(ann_forward(model.dense_layers, windows, nullptr));
    case ModelKind::lstm: {
        RngStream unused(0);
        auto forward = lstm_sequence_forward(windows_to_steps(windows), model.lstm_layers, 0.0,
                                             RunMode::infer, unused);
        return matrix_to_vector(dense_forward(forward.last_hidden, model.dense_layers.front()));
    }
    case ModelKind::rnn: {
        RngStream unused(0);
        auto forward = rnn_sequence_forward(windows_to_steps(windows), model.rnn_layers, 0.0,
                                            RunMode::infer, unused);
        return matrix_to_vector(dense_forward(forward.last_hidden, model.dense_layers.front()));
    }
    }
    throw ValidationError("predict: unknown model kind");
}

std::vector<double> predict_prices(const ForecastModel& model, const Matrix& windows) {
    const std::vector<double> scaled = predict(model, windows);
    return invert_scaler(model.scaler, scaled);
}

} // namespace stackcast

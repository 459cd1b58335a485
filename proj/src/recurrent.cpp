#include "stackcast/recurrent.hpp"

#include "stackcast/errors.hpp"

#include <cmath>
#include <string>

namespace stackcast {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

LstmCellParams LstmCellParams::init(std::size_t input_dim, std::size_t hidden, RngStream& rng) {
    LstmCellParams params = zeros(input_dim, hidden);
    // Per-gate Glorot: each W_g is d x H and each U_g is H x H, drawn in
    // gate order f, i, o, g.
    for (std::size_t gate = 0; gate < 4; ++gate) {
        const Matrix block = init_params(input_dim, hidden, InitScheme::glorot_uniform, rng);
        for (std::size_t r = 0; r < input_dim; ++r)
            for (std::size_t c = 0; c < hidden; ++c) params.w_in(r, gate * hidden + c) = block(r, c);
    }
    for (std::size_t gate = 0; gate < 4; ++gate) {
        const Matrix block = init_params(hidden, hidden, InitScheme::glorot_uniform, rng);
        for (std::size_t r = 0; r < hidden; ++r)
            for (std::size_t c = 0; c < hidden; ++c) params.w_rec(r, gate * hidden + c) = block(r, c);
    }
    for (std::size_t c = 0; c < hidden; ++c) params.bias(0, kForgetGate * hidden + c) = 1.0;
    return params;
}

LstmCellParams LstmCellParams::zeros(std::size_t input_dim, std::size_t hidden) {
    LstmCellParams params;
    params.w_in = Matrix(input_dim, 4 * hidden);
    params.w_rec = Matrix(hidden, 4 * hidden);
    params.bias = Matrix(1, 4 * hidden);
    return params;
}

LstmCellGrads LstmCellGrads::zeros_like(const LstmCellParams& params) {
    LstmCellGrads grads;
    grads.w_in = Matrix(params.w_in.rows(), params.w_in.cols());
    grads.w_rec = Matrix(params.w_rec.rows(), params.w_rec.cols());
    grads.bias = Matrix(1, params.bias.cols());
    return grads;
}

std::pair<LstmState, LstmCellCache> lstm_cell_forward(const Matrix& x, const LstmState& state,
                                                      const LstmCellParams& params) {
    const std::size_t hidden = params.hidden_size();
    const std::size_t batch = x.rows();
    if (x.cols() != params.input_dim())
        throw ShapeMismatch("lstm_cell_forward: input dim " + std::to_string(x.cols()) + " vs " +
                            std::to_string(params.input_dim()));
    if (state.hidden.rows() != batch || state.hidden.cols() != hidden ||
        !state.hidden.same_shape(state.cell))
        throw ShapeMismatch("lstm_cell_forward: state shape");

    Matrix pre = add_row_vector(matmul(x, params.w_in), params.bias);
    matmul_acc(pre, state.hidden, params.w_rec);

    LstmCellCache cache;
    cache.x = x;
    cache.h_prev = state.hidden;
    cache.c_prev = state.cell;
    cache.gates = Matrix(batch, 4 * hidden);
    cache.cell_new = Matrix(batch, hidden);
    cache.tanh_cell = Matrix(batch, hidden);

    LstmState next;
    next.hidden = Matrix(batch, hidden);
    next.cell = Matrix(batch, hidden);

    for (std::size_t r = 0; r < batch; ++r) {
        for (std::size_t c = 0; c < hidden; ++c) {
            const double f = sigmoid(pre(r, kForgetGate * hidden + c));
            const double i = sigmoid(pre(r, kInputGate * hidden + c));
            const double o = sigmoid(pre(r, kOutputGate * hidden + c));
            const double g = std::tanh(pre(r, kCandidateGate * hidden + c));
            cache.gates(r, kForgetGate * hidden + c) = f;
            cache.gates(r, kInputGate * hidden + c) = i;
            cache.gates(r, kOutputGate * hidden + c) = o;
            cache.gates(r, kCandidateGate * hidden + c) = g;
            const double cell = f * state.cell(r, c) + i * g;
            const double tanh_cell = std::tanh(cell);
            cache.cell_new(r, c) = cell;
            cache.tanh_cell(r, c) = tanh_cell;
            next.cell(r, c) = cell;
            next.hidden(r, c) = o * tanh_cell;
        }
    }
    return {std::move(next), std::move(cache)};
}

LstmCellBackward lstm_cell_backward(const LstmCellCache& cache, const LstmCellParams& params,
                                    const Matrix& dh, const Matrix& dc, LstmCellGrads& grads) {
    const std::size_t hidden = params.hidden_size();
    const std::size_t batch = cache.x.rows();
    if (dh.rows() != batch || dh.cols() != hidden || !dh.same_shape(dc))
        throw CacheMismatch("lstm_cell_backward: upstream gradient shape");

    Matrix dpre(batch, 4 * hidden);
    LstmCellBackward result;
    result.dc_prev = Matrix(batch, hidden);

    for (std::size_t r = 0; r < batch; ++r) {
        for (std::size_t c = 0; c < hidden; ++c) {
            const double f = cache.gates(r, kForgetGate * hidden + c);
            const double i = cache.gates(r, kInputGate * hidden + c);
            const double o = cache.gates(r, kOutputGate * hidden + c);
            const double g = cache.gates(r, kCandidateGate * hidden + c);
            const double tanh_cell = cache.tanh_cell(r, c);

            const double d_out = dh(r, c) * tanh_cell;
            const double d_cell = dc(r, c) + dh(r, c) * o * (1.0 - tanh_cell * tanh_cell);
            const double d_forget = d_cell * cache.c_prev(r, c);
            const double d_input = d_cell * g;
            const double d_cand = d_cell * i;
            result.dc_prev(r, c) = d_cell * f;

            dpre(r, kForgetGate * hidden + c) = d_forget * f * (1.0 - f);
            dpre(r, kInputGate * hidden + c) = d_input * i * (1.0 - i);
            dpre(r, kOutputGate * hidden + c) = d_out * o * (1.0 - o);
            dpre(r, kCandidateGate * hidden + c) = d_cand * (1.0 - g * g);
        }
    }

    matmul_acc(grads.w_in, cache.x, dpre, /*trans_a=*/true);
    matmul_acc(grads.w_rec, cache.h_prev, dpre, /*trans_a=*/true);
    grads.bias += column_sums(dpre);
    result.dx = matmul(dpre, params.w_in, false, /*trans_b=*/true);
    result.dh_prev = matmul(dpre, params.w_rec, false, /*trans_b=*/true);
    return result;
}

StepInputs windows_to_steps(const Matrix& windows) {
    StepInputs steps;
    steps.reserve(windows.cols());
    for (std::size_t t = 0; t < windows.cols(); ++t) {
        Matrix step(windows.rows(), 1);
        for (std::size_t r = 0; r < windows.rows(); ++r) step(r, 0) = windows(r, t);
        steps.push_back(std::move(step));
    }
    return steps;
}

// TODO: precompute x*W_in for all time steps in one GEMM per layer; the
// recurrent h*W_rec products still dominate, but this is worth ~10% on the
// 2x100 training shape.
LstmForwardResult lstm_sequence_forward(const StepInputs& steps,
                                        const std::vector<LstmCellParams>& layers,
                                        double dropout_rate, RunMode mode, RngStream& rng,
                                        bool collect_cache) {
    if (layers.empty()) throw ShapeMismatch("lstm_sequence_forward: no layers");
    if (steps.empty()) throw ShapeMismatch("lstm_sequence_forward: empty sequence");
    const std::size_t batch = steps.front().rows();
    const std::size_t time_steps = steps.size();

    LstmForwardResult result;
    result.cache.dropout_rate = dropout_rate;
    result.cache.mode = mode;
    if (collect_cache) {
        result.cache.layer_steps.resize(layers.size());
        result.cache.step_masks.resize(layers.size());
    }

    StepInputs current = steps;
    Matrix last_hidden;
    for (std::size_t layer = 0; layer < layers.size(); ++layer) {
        const auto& params = layers[layer];
        LstmState state = LstmState::zeros(batch, params.hidden_size());
        StepInputs outputs;
        const bool feeds_next_layer = layer + 1 < layers.size();
        if (feeds_next_layer) outputs.reserve(time_steps);

        for (std::size_t t = 0; t < time_steps; ++t) {
            auto [next, cache] = lstm_cell_forward(current[t], state, params);
            state = std::move(next);
            Matrix output = state.hidden;
            if (feeds_next_layer || t + 1 == time_steps) {
                auto dropped = dropout(output, dropout_rate, mode, rng);
                if (collect_cache) {
                    if (feeds_next_layer)
                        result.cache.step_masks[layer].push_back(dropped.mask);
                    else if (t + 1 == time_steps)
                        result.cache.final_mask = dropped.mask;
                }
                output = std::move(dropped.output);
            }
            if (feeds_next_layer) outputs.push_back(std::move(output));
            else if (t + 1 == time_steps) last_hidden = std::move(output);
            if (collect_cache) result.cache.layer_steps[layer].push_back(std::move(cache));
        }
        current = std::move(outputs);
    }
    result.last_hidden = std::move(last_hidden);
    return result;
}

LstmBackwardResult lstm_backward(const LstmSequenceCache& cache,
                                 const std::vector<LstmCellParams>& layers,
                                 const Matrix& upstream) {
    if (cache.layer_steps.size() != layers.size())
        throw CacheMismatch("lstm_backward: cache covers " +
                            std::to_string(cache.layer_steps.size()) + " layers, params " +
                            std::to_string(layers.size()));
    if (layers.empty() || cache.layer_steps.front().empty())
        throw CacheMismatch("lstm_backward: empty cache");
    const std::size_t time_steps = cache.layer_steps.front().size();
    const std::size_t batch = upstream.rows();
    const bool train = cache.mode == RunMode::train;

    LstmBackwardResult result;
    result.layer_grads.reserve(layers.size());
    for (const auto& params : layers)
        result.layer_grads.push_back(LstmCellGrads::zeros_like(params));

    // d loss / d (this layer's per-step outputs); starts as the head
    // gradient on the last layer's final state.
    StepInputs d_outputs(time_steps);
    {
        Matrix dh_last = upstream;
        if (train) dh_last = hadamard(dh_last, cache.final_mask);
        d_outputs[time_steps - 1] = std::move(dh_last);
    }

    for (std::size_t idx = layers.size(); idx-- > 0;) {
        const auto& params = layers[idx];
        const std::size_t hidden = params.hidden_size();
        Matrix dh_next(batch, hidden);
        Matrix dc_next(batch, hidden);
        StepInputs d_inputs(time_steps);

        for (std::size_t t = time_steps; t-- > 0;) {
            Matrix dh_total = dh_next;
            if (!d_outputs[t].empty()) dh_total += d_outputs[t];
            auto back = lstm_cell_backward(cache.layer_steps[idx][t], params, dh_total, dc_next,
                                           result.layer_grads[idx]);
            dh_next = std::move(back.dh_prev);
            dc_next = std::move(back.dc_prev);
            d_inputs[t] = std::move(back.dx);
        }

        if (idx > 0) {
            // Pass through the inter-layer dropout masks.
            for (std::size_t t = 0; t < time_steps; ++t) {
                d_outputs[t] = train ? hadamard(d_inputs[t], cache.step_masks[idx - 1][t])
                                     : std::move(d_inputs[t]);
            }
        } else {
            result.input_grads = std::move(d_inputs);
        }
    }
    return result;
}

// --- RNN ---

RnnCellParams RnnCellParams::init(std::size_t input_dim, std::size_t hidden, RngStream& rng) {
    RnnCellParams params;
    params.w_in = init_params(input_dim, hidden, InitScheme::glorot_uniform, rng);
    params.w_rec = init_params(hidden, hidden, InitScheme::glorot_uniform, rng);
    params.bias = Matrix(1, hidden);
    return params;
}

RnnCellParams RnnCellParams::zeros(std::size_t input_dim, std::size_t hidden) {
    RnnCellParams params;
    params.w_in = Matrix(input_dim, hidden);
    params.w_rec = Matrix(hidden, hidden);
    params.bias = Matrix(1, hidden);
    return params;
}

RnnCellGrads RnnCellGrads::zeros_like(const RnnCellParams& params) {
    RnnCellGrads grads;
    grads.w_in = Matrix(params.w_in.rows(), params.w_in.cols());
    grads.w_rec = Matrix(params.w_rec.rows(), params.w_rec.cols());
    grads.bias = Matrix(1, params.bias.cols());
    return grads;
}

Matrix rnn_cell_forward(const Matrix& x, const Matrix& h_prev, const RnnCellParams& params,
                        RnnCellCache* cache) {
    if (x.cols() != params.input_dim() || h_prev.cols() != params.hidden_size())
        throw ShapeMismatch("rnn_cell_forward: input/state dims");
    Matrix pre = add_row_vector(matmul(x, params.w_in), params.bias);
    matmul_acc(pre, h_prev, params.w_rec);
    for (double& v : pre.entries()) v = std::tanh(v);
    if (cache) {
        cache->x = x;
        cache->h_prev = h_prev;
        cache->h_new = pre;
    }
    return pre;
}

RnnForwardResult rnn_sequence_forward(const StepInputs& steps,
                                      const std::vector<RnnCellParams>& layers,
                                      double dropout_rate, RunMode mode, RngStream& rng,
                                      bool collect_cache) {
    if (layers.empty()) throw ShapeMismatch("rnn_sequence_forward: no layers");
    if (steps.empty()) throw ShapeMismatch("rnn_sequence_forward: empty sequence");
    const std::size_t batch = steps.front().rows();
    const std::size_t time_steps = steps.size();

    RnnForwardResult result;
    result.cache.dropout_rate = dropout_rate;
    result.cache.mode = mode;
    if (collect_cache) {
        result.cache.layer_steps.resize(layers.size());
        result.cache.step_masks.resize(layers.size());
    }

    StepInputs current = steps;
    Matrix last_hidden;
    for (std::size_t layer = 0; layer < layers.size(); ++layer) {
        const auto& params = layers[layer];
        Matrix h(batch, params.hidden_size());
        StepInputs outputs;
        const bool feeds_next_layer = layer + 1 < layers.size();

        for (std::size_t t = 0; t < time_steps; ++t) {
            RnnCellCache cache;
            h = rnn_cell_forward(current[t], h, params, collect_cache ? &cache : nullptr);
            Matrix output = h;
            if (feeds_next_layer || t + 1 == time_steps) {
                auto dropped = dropout(output, dropout_rate, mode, rng);
                if (collect_cache) {
                    if (feeds_next_layer)
                        result.cache.step_masks[layer].push_back(dropped.mask);
                    else if (t + 1 == time_steps)
                        result.cache.final_mask = dropped.mask;
                }
                output = std::move(dropped.output);
            }
            if (feeds_next_layer) outputs.push_back(std::move(output));
            else if (t + 1 == time_steps) last_hidden = std::move(output);
            if (collect_cache) result.cache.layer_steps[layer].push_back(std::move(cache));
        }
        current = std::move(outputs);
    }
    result.last_hidden = std::move(last_hidden);
    return result;
}

RnnBackwardResult rnn_backward(const RnnSequenceCache& cache,
                               const std::vector<RnnCellParams>& layers, const Matrix& upstream) {
    if (cache.layer_steps.size() != layers.size())
        throw CacheMismatch("rnn_backward: cache/layer count mismatch");
    if (layers.empty() || cache.layer_steps.front().empty())
        throw CacheMismatch("rnn_backward: empty cache");
    const std::size_t time_steps = cache.layer_steps.front().size();
    const std::size_t batch = upstream.rows();
    const bool train = cache.mode == RunMode::train;

    RnnBackwardResult result;
    for (const auto& params : layers) result.layer_grads.push_back(RnnCellGrads::zeros_like(params));

    StepInputs d_outputs(time_steps);
    {
        Matrix dh_last = upstream;
        if (train) dh_last = hadamard(dh_last, cache.final_mask);
        d_outputs[time_steps - 1] = std::move(dh_last);
    }

    for (std::size_t idx = layers.size(); idx-- > 0;) {
        const auto& params = layers[idx];
        Matrix dh_next(batch, params.hidden_size());
        StepInputs d_inputs(time_steps);

        for (std::size_t t = time_steps; t-- > 0;) {
            Matrix dh = dh_next;
            if (!d_outputs[t].empty()) dh += d_outputs[t];
            const auto& step = cache.layer_steps[idx][t];
            // through tanh: dpre = dh . (1 - h^2)
            Matrix dpre = dh;
            for (std::size_t i = 0; i < dpre.size(); ++i) {
                const double h = step.h_new.entries()[i];
                dpre.entries()[i] *= 1.0 - h * h;
            }
            matmul_acc(result.layer_grads[idx].w_in, step.x, dpre, true);
            matmul_acc(result.layer_grads[idx].w_rec, step.h_prev, dpre, true);
            result.layer_grads[idx].bias += column_sums(dpre);
            d_inputs[t] = matmul(dpre, params.w_in, false, true);
            dh_next = matmul(dpre, params.w_rec, false, true);
        }

        if (idx > 0) {
            for (std::size_t t = 0; t < time_steps; ++t) {
                d_outputs[t] = train ? hadamard(d_inputs[t], cache.step_masks[idx - 1][t])
                                     : std::move(d_inputs[t]);
            }
        } else {
            result.input_grads = std::move(d_inputs);
        }
    }
    return result;
}

} // namespace stackcast

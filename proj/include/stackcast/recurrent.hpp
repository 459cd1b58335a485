#pragma once

#include "stackcast/matrix.hpp"
#include "stackcast/nn.hpp"
#include "stackcast/rng.hpp"

#include <cstddef>
#include <vector>

namespace stackcast {

// Gate blocks inside the concatenated LSTM weight layout. Column block b of
// a (rows x 4H) tensor spans [b*H, (b+1)*H).
enum GateBlock : std::size_t {
    kForgetGate = 0,
    kInputGate = 1,
    kOutputGate = 2,
    kCandidateGate = 3,
};

struct LstmCellParams {
    Matrix w_in;  // d x 4H, blocks [forget | input | output | candidate]
    Matrix w_rec; // H x 4H
    Matrix bias;  // 1 x 4H

    std::size_t input_dim() const { return w_in.rows(); }
    std::size_t hidden_size() const { return w_rec.rows(); }

    // Glorot per gate block; biases zero except the forget gate, which
    // starts at 1 so early training retains memory.
    static LstmCellParams init(std::size_t input_dim, std::size_t hidden, RngStream& rng);
    static LstmCellParams zeros(std::size_t input_dim, std::size_t hidden);

    bool operator==(const LstmCellParams&) const = default;
};

// Batched recurrent state; one row per sequence.
struct LstmState {
    Matrix hidden; // batch x H
    Matrix cell;   // batch x H

    static LstmState zeros(std::size_t batch, std::size_t hidden) {
        return {Matrix(batch, hidden), Matrix(batch, hidden)};
    }
};

struct LstmCellCache {
    Matrix x;
    Matrix h_prev;
    Matrix c_prev;
    Matrix gates;     // batch x 4H, post-activation [f | i | o | g]
    Matrix cell_new;  // batch x H
    Matrix tanh_cell; // batch x H
};

// f = sig(xWf + hUf + bf), i, o likewise; g = tanh(xWg + hUg + bg);
// c' = f.c + i.g; h' = o.tanh(c').
std::pair<LstmState, LstmCellCache> lstm_cell_forward(const Matrix& x, const LstmState& state,
                                                      const LstmCellParams& params);

struct LstmCellGrads {
    Matrix w_in;
    Matrix w_rec;
    Matrix bias;

    static LstmCellGrads zeros_like(const LstmCellParams& params);
};

struct LstmCellBackward {
    Matrix dx;
    Matrix dh_prev;
    Matrix dc_prev;
};

// Reverse-mode step; parameter gradients accumulate into `grads`.
LstmCellBackward lstm_cell_backward(const LstmCellCache& cache, const LstmCellParams& params,
                                    const Matrix& dh, const Matrix& dc, LstmCellGrads& grads);

// One matrix per time step, each batch x d.
using StepInputs = std::vector<Matrix>;

// Column t of an n x T window matrix becomes step t (single feature).
StepInputs windows_to_steps(const Matrix& windows);

struct LstmSequenceCache {
    std::vector<std::vector<LstmCellCache>> layer_steps; // [layer][t]
    std::vector<std::vector<Matrix>> step_masks;         // dropout masks between layers
    Matrix final_mask; // dropout mask on the last layer's final hidden state
    double dropout_rate = 0.0;
    RunMode mode = RunMode::infer;
};

struct LstmForwardResult {
    Matrix last_hidden; // batch x H, after output dropout in train mode
    LstmSequenceCache cache;
};

// Stacked LSTM over a sequence. Initial h and c are zero for every sequence.
// Dropout is applied to each layer's output states (never to the recurrent
// path): per step between layers, and once on the final hidden state that
// feeds the regression head. Caches are collected only when requested.
LstmForwardResult lstm_sequence_forward(const StepInputs& steps,
                                        const std::vector<LstmCellParams>& layers,
                                        double dropout_rate, RunMode mode, RngStream& rng,
                                        bool collect_cache = false);

struct LstmBackwardResult {
    std::vector<LstmCellGrads> layer_grads;
    StepInputs input_grads; // d loss / d x_t
};

// Full BPTT through every layer, gate and dropout mask. `upstream` is the
// loss gradient at the returned last_hidden.
LstmBackwardResult lstm_backward(const LstmSequenceCache& cache,
                                 const std::vector<LstmCellParams>& layers,
                                 const Matrix& upstream);

// --- vanilla RNN baseline: h' = tanh(xW + hU + b) ---

struct RnnCellParams {
    Matrix w_in;  // d x H
    Matrix w_rec; // H x H
    Matrix bias;  // 1 x H

    std::size_t input_dim() const { return w_in.rows(); }
    std::size_t hidden_size() const { return w_rec.rows(); }

    static RnnCellParams init(std::size_t input_dim, std::size_t hidden, RngStream& rng);
    static RnnCellParams zeros(std::size_t input_dim, std::size_t hidden);

    bool operator==(const RnnCellParams&) const = default;
};

struct RnnCellCache {
    Matrix x;
    Matrix h_prev;
    Matrix h_new;
};

Matrix rnn_cell_forward(const Matrix& x, const Matrix& h_prev, const RnnCellParams& params,
                        RnnCellCache* cache = nullptr);

struct RnnCellGrads {
    Matrix w_in;
    Matrix w_rec;
    Matrix bias;

    static RnnCellGrads zeros_like(const RnnCellParams& params);
};

struct RnnSequenceCache {
    std::vector<std::vector<RnnCellCache>> layer_steps;
    std::vector<std::vector<Matrix>> step_masks;
    Matrix final_mask;
    double dropout_rate = 0.0;
    RunMode mode = RunMode::infer;
};

struct RnnForwardResult {
    Matrix last_hidden;
    RnnSequenceCache cache;
};

RnnForwardResult rnn_sequence_forward(const StepInputs& steps,
                                      const std::vector<RnnCellParams>& layers,
                                      double dropout_rate, RunMode mode, RngStream& rng,
                                      bool collect_cache = false);

struct RnnBackwardResult {
    std::vector<RnnCellGrads> layer_grads;
    StepInputs input_grads;
};

RnnBackwardResult rnn_backward(const RnnSequenceCache& cache,
                               const std::vector<RnnCellParams>& layers, const Matrix& upstream);

} // namespace stackcast

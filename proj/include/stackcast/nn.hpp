#pragma once

#include "stackcast/matrix.hpp"
#include "stackcast/rng.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace stackcast {

enum class Activation { relu, sigmoid, tanh, identity };

Matrix activate(Activation kind, const Matrix& x);
// Elementwise derivative evaluated at the pre-activation x. relu'(0) is 0.
Matrix activate_grad(Activation kind, const Matrix& x);

struct DenseParams {
    Matrix weights; // in x out
    Matrix bias;    // 1 x out

    bool operator==(const DenseParams&) const = default;
};

// y = x * W + b, bias broadcast over the batch.
Matrix dense_forward(const Matrix& x, const DenseParams& params);

enum class RunMode { train, infer };

struct DropoutResult {
    Matrix output;
    Matrix mask; // entries are 0 or 1/(1-rate); multiply grads by this
};

// Inverted dropout: inference is the identity, training zeroes entries with
// probability `rate` and scales survivors by 1/(1-rate).
DropoutResult dropout(const Matrix& x, double rate, RunMode mode, RngStream& rng);

struct MseResult {
    double loss = 0.0;
    std::vector<double> grad; // d loss / d pred
};

MseResult mse_loss(std::span<const double> pred, std::span<const double> target);

enum class InitScheme { glorot_uniform, zeros };

// glorot_uniform draws U(-L, L) with L = sqrt(6 / (fan_in + fan_out)),
// fan_in = rows, fan_out = cols. Row-major draw order.
Matrix init_params(std::size_t rows, std::size_t cols, InitScheme scheme, RngStream& rng);

// Glorot weights, zero bias.
DenseParams init_dense(std::size_t in_dim, std::size_t out_dim, RngStream& rng);

// A model's trainable tensors, in a fixed documented order.
using ParamSet = std::vector<Matrix>;

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    ParamSet first_moment;
    ParamSet second_moment;
    std::int64_t step = 0;
    AdamConfig config;

    static AdamState init(const ParamSet& params, AdamConfig config = {});
};

// One bias-corrected Adam update. Pure: returns the new parameters and state.
std::pair<ParamSet, AdamState> adam_step(const ParamSet& params, const ParamSet& grads,
                                         AdamState state);

std::vector<double> flatten(const ParamSet& params);
ParamSet unflatten(std::span<const double> flat, const ParamSet& shapes);

// Central-difference check of an analytic gradient. Returns the max over
// coordinates of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
// The loss must be deterministic (run dropout in infer mode).
double grad_check(const std::function<double(std::span<const double>)>& loss_fn,
                  std::span<const double> params, std::span<const double> analytic_grad,
                  double epsilon = 1e-5);

} // namespace stackcast

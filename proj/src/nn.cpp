#include "stackcast/nn.hpp"

#include "stackcast/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stackcast {

Matrix activate(Activation kind, const Matrix& x) {
    Matrix out = x;
    switch (kind) {
    case Activation::relu:
        for (double& v : out.entries()) v = v > 0.0 ? v : 0.0;
        break;
    case Activation::sigmoid:
        for (double& v : out.entries()) v = 1.0 / (1.0 + std::exp(-v));
        break;
    case Activation::tanh:
        for (double& v : out.entries()) v = std::tanh(v);
        break;
    case Activation::identity:
        break;
    }
    return out;
}

Matrix activate_grad(Activation kind, const Matrix& x) {
    Matrix out = x;
    switch (kind) {
    case Activation::relu:
        for (double& v : out.entries()) v = v > 0.0 ? 1.0 : 0.0;
        break;
    case Activation::sigmoid:
        for (double& v : out.entries()) {
            const double s = 1.0 / (1.0 + std::exp(-v));
            v = s * (1.0 - s);
        }
        break;
    case Activation::tanh:
        for (double& v : out.entries()) {
            const double t = std::tanh(v);
            v = 1.0 - t * t;
        }
        break;
    case Activation::identity:
        for (double& v : out.entries()) v = 1.0;
        break;
    }
    return out;
}

Matrix dense_forward(const Matrix& x, const DenseParams& params) {
    if (x.cols() != params.weights.rows())
        throw ShapeMismatch("dense_forward: input cols " + std::to_string(x.cols()) +
                            " vs weight rows " + std::to_string(params.weights.rows()));
    return add_row_vector(matmul(x, params.weights), params.bias);
}

DropoutResult dropout(const Matrix& x, double rate, RunMode mode, RngStream& rng) {
    if (rate < 0.0 || rate >= 1.0)
        throw InvalidRate("dropout: rate must be in [0, 1), got " + std::to_string(rate));
    DropoutResult result;
    result.mask = Matrix(x.rows(), x.cols(), 1.0);
    if (mode == RunMode::infer || rate == 0.0) {
        result.output = x;
        return result;
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    result.output = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (rng.uniform() < rate) {
            result.mask.entries()[i] = 0.0;
            result.output.entries()[i] = 0.0;
        } else {
            result.mask.entries()[i] = keep_scale;
            result.output.entries()[i] *= keep_scale;
        }
    }
    return result;
}

MseResult mse_loss(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size())
        throw LengthMismatch("mse_loss: " + std::to_string(pred.size()) + " vs " +
                             std::to_string(target.size()));
    if (pred.empty()) throw EmptyInput("mse_loss: empty input");
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    MseResult result;
    result.grad.resize(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double diff = pred[i] - target[i];
        result.loss += diff * diff * inv_n;
        result.grad[i] = 2.0 * diff * inv_n;
    }
    return result;
}

Matrix init_params(std::size_t rows, std::size_t cols, InitScheme scheme, RngStream& rng) {
    Matrix out(rows, cols);
    if (scheme == InitScheme::glorot_uniform) {
        const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
        for (double& v : out.entries()) v = rng.uniform_range(-limit, limit);
    }
    return out;
}

DenseParams init_dense(std::size_t in_dim, std::size_t out_dim, RngStream& rng) {
    DenseParams params;
    params.weights = init_params(in_dim, out_dim, InitScheme::glorot_uniform, rng);
    params.bias = Matrix(1, out_dim);
    return params;
}

AdamState AdamState::init(const ParamSet& params, AdamConfig config) {
    AdamState state;
    state.config = config;
    state.first_moment.reserve(params.size());
    state.second_moment.reserve(params.size());
    for (const auto& p : params) {
        state.first_moment.emplace_back(p.rows(), p.cols());
        state.second_moment.emplace_back(p.rows(), p.cols());
    }
    return state;
}

std::pair<ParamSet, AdamState> adam_step(const ParamSet& params, const ParamSet& grads,
                                         AdamState state) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size())
        throw ShapeMismatch("adam_step: parameter/gradient/state count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i)
        if (!params[i].same_shape(grads[i]) || !params[i].same_shape(state.first_moment[i]))
            throw ShapeMismatch("adam_step: shape mismatch at tensor " + std::to_string(i));

    state.step += 1;
    const auto& cfg = state.config;
    const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

    ParamSet updated = params;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& m = state.first_moment[i].entries();
        auto& v = state.second_moment[i].entries();
        auto& p = updated[i].entries();
        const auto& g = grads[i].entries();
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            const double m_hat = m[j] / bias1;
            const double v_hat = v[j] / bias2;
            p[j] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
    }
    return {std::move(updated), std::move(state)};
}

std::vector<double> flatten(const ParamSet& params) {
    std::vector<double> flat;
    std::size_t total = 0;
    for (const auto& p : params) total += p.size();
    flat.reserve(total);
    for (const auto& p : params) flat.insert(flat.end(), p.entries().begin(), p.entries().end());
    return flat;
}

ParamSet unflatten(std::span<const double> flat, const ParamSet& shapes) {
    ParamSet out;
    out.reserve(shapes.size());
    std::size_t offset = 0;
    for (const auto& shape : shapes) {
        Matrix m(shape.rows(), shape.cols());
        if (offset + m.size() > flat.size()) throw ShapeMismatch("unflatten: too few values");
        std::copy(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                  flat.begin() + static_cast<std::ptrdiff_t>(offset + m.size()),
                  m.entries().begin());
        offset += m.size();
        out.push_back(std::move(m));
    }
    if (offset != flat.size()) throw ShapeMismatch("unflatten: too many values");
    return out;
}

double grad_check(const std::function<double(std::span<const double>)>& loss_fn,
                  std::span<const double> params, std::span<const double> analytic_grad,
                  double epsilon) {
    if (params.size() != analytic_grad.size())
        throw ShapeMismatch("grad_check: gradient length mismatch");

    std::vector<double> theta(params.begin(), params.end());
    const double base = loss_fn(theta);
    if (loss_fn(theta) != base)
        throw NonDeterministicLoss("grad_check: two evaluations at the same point disagree");

    double worst = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double saved = theta[i];
        theta[i] = saved + epsilon;
        const double up = loss_fn(theta);
        theta[i] = saved - epsilon;
        const double down = loss_fn(theta);
        theta[i] = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double analytic = analytic_grad[i];
        const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        worst = std::max(worst, std::abs(analytic - numeric) / scale);
    }
    return worst;
}

} // namespace stackcast

#include "stackcast/preprocess.hpp"

#include "stackcast/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stackcast {

ScalerParams fit_scaler(ScalerKind kind, std::span<const double> data) {
    if (data.empty()) throw EmptyInput("fit_scaler: empty data");
    ScalerParams params;
    params.kind = kind;
    if (kind == ScalerKind::minmax) {
        const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
        if (*lo == *hi)
            throw DegenerateRange("fit_scaler: constant feature (all values " +
                                  std::to_string(*lo) + ")");
        params.min = *lo;
        params.max = *hi;
    } else {
        double sum = 0.0;
        for (double v : data) sum += v;
        const double mean = sum / static_cast<double>(data.size());
        double sq = 0.0;
        for (double v : data) sq += (v - mean) * (v - mean);
        // Population convention: divide by N.
        const double std_dev = std::sqrt(sq / static_cast<double>(data.size()));
        if (std_dev == 0.0) throw ZeroVariance("fit_scaler: zero variance");
        params.mean = mean;
        params.std_dev = std_dev;
    }
    return params;
}

std::vector<double> apply_scaler(const ScalerParams& params, std::span<const double> data) {
    std::vector<double> out;
    out.reserve(data.size());
    if (params.kind == ScalerKind::minmax) {
        const double range = params.max - params.min;
        for (double v : data) out.push_back((v - params.min) / range);
    } else {
        for (double v : data) out.push_back((v - params.mean) / params.std_dev);
    }
    return out;
}

std::vector<double> invert_scaler(const ScalerParams& params, std::span<const double> data) {
    std::vector<double> out;
    out.reserve(data.size());
    if (params.kind == ScalerKind::minmax) {
        const double range = params.max - params.min;
        for (double v : data) out.push_back(v * range + params.min);
    } else {
        for (double v : data) out.push_back(v * params.std_dev + params.mean);
    }
    return out;
}

WindowedDataset make_windows(std::span<const double> series, std::size_t window) {
    if (window < 1) throw SeriesTooShort("make_windows: window length must be >= 1");
    if (series.size() <= window)
        throw SeriesTooShort("make_windows: need more than " + std::to_string(window) +
                             " samples, got " + std::to_string(series.size()));
    const std::size_t n = series.size() - window;
    WindowedDataset data;
    data.window = window;
    data.origin_index = window;
    data.inputs = Matrix(n, window);
    data.targets.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < window; ++j) data.inputs(i, j) = series[i + j];
        data.targets[i] = series[i + window];
    }
    return data;
}

WindowedDataset slice(const WindowedDataset& data, std::size_t begin, std::size_t end) {
    if (begin > end || end > data.size())
        throw ValidationError("slice: bad range [" + std::to_string(begin) + ", " +
                              std::to_string(end) + ") of " + std::to_string(data.size()));
    WindowedDataset out;
    out.window = data.window;
    out.origin_index = data.origin_index + begin;
    out.inputs = Matrix(end - begin, data.window);
    out.targets.assign(data.targets.begin() + static_cast<std::ptrdiff_t>(begin),
                       data.targets.begin() + static_cast<std::ptrdiff_t>(end));
    for (std::size_t i = begin; i < end; ++i)
        for (std::size_t j = 0; j < data.window; ++j) out.inputs(i - begin, j) = data.inputs(i, j);
    return out;
}

std::vector<FoldIndices> time_series_split(std::size_t n, std::size_t k) {
    if (k < 2) throw TooFewFolds("time_series_split: need k >= 2 folds");
    if (n < 2 * (k + 1))
        throw TooFewSamples("time_series_split: need n >= " + std::to_string(2 * (k + 1)) +
                            ", got " + std::to_string(n));
    const std::size_t test_size = n / (k + 1);
    std::vector<FoldIndices> folds;
    folds.reserve(k);
    for (std::size_t j = 1; j <= k; ++j) {
        FoldIndices fold;
        fold.test_begin = n - (k - j + 1) * test_size;
        fold.test_end = n - (k - j) * test_size;
        fold.train_begin = 0;
        fold.train_end = fold.test_begin;
        folds.push_back(fold);
    }
    return folds;
}

} // namespace stackcast

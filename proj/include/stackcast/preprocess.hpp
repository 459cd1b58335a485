#pragma once

#include "stackcast/matrix.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace stackcast {

enum class ScalerKind { minmax, standard };

// Fitted scaler statistics for a single feature. minmax keeps (min, max),
// standard keeps (mean, population std). Fit these on training data only;
// the harness owns that discipline.
struct ScalerParams {
    ScalerKind kind = ScalerKind::minmax;
    double min = 0.0;
    double max = 1.0;
    double mean = 0.0;
    double std_dev = 1.0;

    // minmax over (0, 1): the transform is x -> x.
    static ScalerParams identity() { return {}; }

    bool operator==(const ScalerParams&) const = default;
};

ScalerParams fit_scaler(ScalerKind kind, std::span<const double> data);
std::vector<double> apply_scaler(const ScalerParams& params, std::span<const double> data);
std::vector<double> invert_scaler(const ScalerParams& params, std::span<const double> data);

// Supervised pairs from a sliding window: inputs[i] = series[i .. i+T),
// targets[i] = series[i+T]. One feature per step (close price only).
struct WindowedDataset {
    Matrix inputs;               // n x T
    std::vector<double> targets; // n
    std::size_t window = 0;      // T
    std::size_t origin_index = 0; // source-series index of targets[0]

    std::size_t size() const { return targets.size(); }
};

inline constexpr std::size_t kDefaultWindow = 30;

WindowedDataset make_windows(std::span<const double> series, std::size_t window = kDefaultWindow);

// Sub-range of windows [begin, end); origin_index tracks the shift.
WindowedDataset slice(const WindowedDataset& data, std::size_t begin, std::size_t end);

// Expanding-window fold: train on everything before the test block.
struct FoldIndices {
    std::size_t train_begin = 0;
    std::size_t train_end = 0; // exclusive
    std::size_t test_begin = 0;
    std::size_t test_end = 0; // exclusive

    bool operator==(const FoldIndices&) const = default;
};

// k folds over n samples, test size s = n / (k + 1); the remainder is
// absorbed into the first training block. The last fold's test range is the
// held-out evaluation block.
std::vector<FoldIndices> time_series_split(std::size_t n, std::size_t k);

} // namespace stackcast

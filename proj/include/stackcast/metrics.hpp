#pragma once

#include <cstddef>
#include <span>

namespace stackcast {

struct MetricsReport {
    double r2 = 0.0;
    double mae = 0.0;
    double mse = 0.0;
    double rmse = 0.0;
    std::size_t n = 0;
};

// 1 - SS_res / SS_tot; negative when the model underperforms the mean
// predictor. Constant targets are an error, not a convention.
double r2(std::span<const double> actual, std::span<const double> predicted);
double mae(std::span<const double> actual, std::span<const double> predicted);
double mse(std::span<const double> actual, std::span<const double> predicted);
double rmse(std::span<const double> actual, std::span<const double> predicted);

MetricsReport evaluate_all(std::span<const double> actual, std::span<const double> predicted);

} // namespace stackcast

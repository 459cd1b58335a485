#include "stackcast/metrics.hpp"

#include "stackcast/errors.hpp"

#include <cmath>
#include <string>

namespace stackcast {

namespace {

void check_lengths(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size())
        throw LengthMismatch("metrics: " + std::to_string(actual.size()) + " actuals vs " +
                             std::to_string(predicted.size()) + " predictions");
    if (actual.empty()) throw EmptyInput("metrics: empty input");
}

} // namespace

double r2(std::span<const double> actual, std::span<const double> predicted) {
    check_lengths(actual, predicted);
    double mean = 0.0;
    for (double y : actual) mean += y;
    mean /= static_cast<double>(actual.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
        ss_tot += (actual[i] - mean) * (actual[i] - mean);
    }
    if (ss_tot == 0.0) throw ZeroVariance("r2: constant targets");
    return 1.0 - ss_res / ss_tot;
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
    check_lengths(actual, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) sum += std::abs(actual[i] - predicted[i]);
    return sum / static_cast<double>(actual.size());
}

double mse(std::span<const double> actual, std::span<const double> predicted) {
    check_lengths(actual, predicted);
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i)
        sum += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    return sum / static_cast<double>(actual.size());
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
    return std::sqrt(mse(actual, predicted));
}

MetricsReport evaluate_all(std::span<const double> actual, std::span<const double> predicted) {
    MetricsReport report;
    report.r2 = r2(actual, predicted);
    report.mae = mae(actual, predicted);
    report.mse = mse(actual, predicted);
    report.rmse = std::sqrt(report.mse);
    report.n = actual.size();
    return report;
}

} // namespace stackcast

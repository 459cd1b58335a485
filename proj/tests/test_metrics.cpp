#include "stackcast/errors.hpp"
#include "stackcast/metrics.hpp"
#include "stackcast/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace stackcast;

namespace {

// Naive-loop oracle, written against the metric definitions only. Kept
// independent of the library implementations it checks.
struct OracleReport {
    double r2, mae, mse, rmse;
};

OracleReport metrics_oracle(const std::vector<double>& y, const std::vector<double>& yhat) {
    const std::size_t n = y.size();
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += y[i];
    mean = mean / static_cast<double>(n);

    double ss_res = 0.0, ss_tot = 0.0, abs_sum = 0.0, sq_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
        ss_tot += (y[i] - mean) * (y[i] - mean);
        abs_sum += std::abs(y[i] - yhat[i]);
        sq_sum += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    }
    OracleReport report;
    report.r2 = 1.0 - ss_res / ss_tot;
    report.mae = abs_sum / static_cast<double>(n);
    report.mse = sq_sum / static_cast<double>(n);
    report.rmse = std::sqrt(report.mse);
    return report;
}

bool close_to(double a, double b, double tol) { return std::abs(a - b) <= tol; }

} // namespace

TEST_CASE("r2 hand cases") {
    const std::vector<double> y{1, 2, 3};
    CHECK(r2(y, y) == 1.0);
    // mean predictor scores exactly zero
    CHECK(r2(y, std::vector<double>{2, 2, 2}) == 0.0);
    // SS_res = 8, SS_tot = 2 -> 1 - 4 = -3
    CHECK(r2(y, std::vector<double>{3, 2, 1}) == -3.0);
}

TEST_CASE("r2 error cases") {
    CHECK_THROWS_AS(r2(std::vector<double>{5, 5}, std::vector<double>{1, 2}), ZeroVariance);
    CHECK_THROWS_AS(r2(std::vector<double>{1, 2}, std::vector<double>{1}), LengthMismatch);
    CHECK_THROWS_AS(mae(std::vector<double>{}, std::vector<double>{}), EmptyInput);
}

TEST_CASE("mae hand cases") {
    CHECK(mae(std::vector<double>{1, 2, 3}, std::vector<double>{2, 3, 4}) == 1.0);
    CHECK(mae(std::vector<double>{1, 2}, std::vector<double>{1, 2}) == 0.0);
    // (3 + 4) / 2
    CHECK(mae(std::vector<double>{0, 0}, std::vector<double>{3, -4}) == 3.5);
}

TEST_CASE("mse and rmse hand cases") {
    const std::vector<double> y{0, 0};
    const std::vector<double> yhat{3, 4};
    CHECK(mse(y, y) == 0.0);
    CHECK(mse(y, yhat) == 12.5); // (9 + 16) / 2
    CHECK(rmse(y, yhat) == doctest::Approx(3.5355339059327378).epsilon(1e-12));
}

TEST_CASE("rmse squared equals mse on random inputs") {
    RngStream rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> y(50), yhat(50);
        for (double& v : y) v = rng.normal(0, 10);
        for (double& v : yhat) v = rng.normal(0, 10);
        const double r = rmse(y, yhat);
        CHECK(close_to(r * r, mse(y, yhat), 1e-12 * std::max(1.0, mse(y, yhat))));
    }
}

TEST_CASE("evaluate_all matches the naive-loop oracle on 20 random pairs") {
    RngStream rng(20240202);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 5 + rng.next_below(200);
        std::vector<double> y(n), yhat(n);
        for (double& v : y) v = rng.uniform_range(-50.0, 150.0);
        for (double& v : yhat) v = rng.uniform_range(-50.0, 150.0);

        const OracleReport expected = metrics_oracle(y, yhat);
        const MetricsReport actual = evaluate_all(y, yhat);
        CHECK(close_to(actual.r2, expected.r2, 1e-12 * std::max(1.0, std::abs(expected.r2))));
        CHECK(close_to(actual.mae, expected.mae, 1e-12 * std::max(1.0, expected.mae)));
        CHECK(close_to(actual.mse, expected.mse, 1e-12 * std::max(1.0, expected.mse)));
        CHECK(close_to(actual.rmse, expected.rmse, 1e-12 * std::max(1.0, expected.rmse)));
        CHECK(actual.n == n);
        CHECK(actual.rmse == std::sqrt(actual.mse));
        CHECK(actual.mae <= actual.rmse + 1e-15);
        CHECK(actual.r2 <= 1.0);
    }
}

TEST_CASE("perfect predictions score (1, 0, 0, 0)") {
    const std::vector<double> y{3, 1, 4, 1, 5};
    const MetricsReport report = evaluate_all(y, y);
    CHECK(report.r2 == 1.0);
    CHECK(report.mae == 0.0);
    CHECK(report.mse == 0.0);
    CHECK(report.rmse == 0.0);
}

TEST_CASE("joint permutation leaves all metrics unchanged") {
    RngStream rng(5);
    std::vector<double> y(40), yhat(40);
    for (double& v : y) v = rng.normal(10, 3);
    for (double& v : yhat) v = rng.normal(10, 3);
    const MetricsReport before = evaluate_all(y, yhat);

    std::vector<std::size_t> order(y.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<double> y2(y.size()), yhat2(y.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        y2[i] = y[order[i]];
        yhat2[i] = yhat[order[i]];
    }
    const MetricsReport after = evaluate_all(y2, yhat2);
    CHECK(close_to(after.r2, before.r2, 1e-12));
    CHECK(close_to(after.mae, before.mae, 1e-12));
    CHECK(close_to(after.mse, before.mse, 1e-12));
    CHECK(close_to(after.rmse, before.rmse, 1e-12));
}

TEST_CASE("shifting both vectors by a constant fixes MAE/MSE/RMSE exactly") {
    // Dyadic values keep the shifted sums exactly representable.
    RngStream rng(6);
    std::vector<double> y(30), yhat(30), y_shift(30), yhat_shift(30);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = (static_cast<double>(rng.next_below(641)) - 320.0) / 64.0;
        yhat[i] = (static_cast<double>(rng.next_below(641)) - 320.0) / 64.0;
        y_shift[i] = y[i] + 128.0;
        yhat_shift[i] = yhat[i] + 128.0;
    }
    CHECK(mae(y, yhat) == mae(y_shift, yhat_shift));
    CHECK(mse(y, yhat) == mse(y_shift, yhat_shift));
    CHECK(rmse(y, yhat) == rmse(y_shift, yhat_shift));
}

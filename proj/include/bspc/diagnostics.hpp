#pragma once

#include "bspc/arma.hpp"
#include "bspc/charts.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace bspc {

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double df = 0.0;
};

/// Portmanteau whiteness test; df = lags - fitted_params.
TestResult ljung_box(std::span<const double> residuals, std::size_t lags, std::size_t fitted_params);

/// min(20, m / 5), at least 1.
std::size_t default_ljung_box_lags(std::size_t m);

/// Shapiro-Wilk W with Royston's (1995) p-value approximation, 3 <= n <= 5000.
TestResult shapiro_wilk(std::span<const double> sample);

struct ScreeningResult {
    std::vector<double> rates;
    std::vector<std::size_t> retained;
    double level = 0.05;
    double threshold = 0.95;
};

/// Per-coefficient rate of batches in which |coef / se| exceeds the two-sided t critical value.
ScreeningResult coef_significance_screen(std::span<const CoefEstimate> fits, double level, double threshold);

struct ResidualAdequacy {
    double white_rate = 0.0;   ///< share of batches where Ljung-Box does not reject
    double normal_rate = 0.0;  ///< share of batches where Shapiro-Wilk does not reject
    std::size_t batches = 0;
};

/// Ljung-Box and Shapiro-Wilk at `level` on each batch's residual series.
/// Pass the innovations recovered by filter_residuals with the batch's own fit.
/// A constant residual series cannot be tested and counts as passing neither test.
ResidualAdequacy residual_adequacy(std::span<const std::vector<double>> residuals, std::size_t fitted_params,
                                   double level);

struct LabelRates {
    double r0 = 0.0;
    double r1 = 0.0;
    std::size_t in_control_used = 0;
    std::size_t out_of_control_used = 0;
    std::size_t unmonitorable = 0;
};

/// False-alarm rate r0 and detection rate r1 of the T2 chart over labeled batches.
LabelRates evaluate_labels(const PhaseIReference& ref, const BatchSet& in_control, const BatchSet& out_of_control,
                           double alpha, Execution exec = Execution::Parallel);

/// Same rates from precomputed full-length coefficient vectors.
LabelRates evaluate_label_coefs(const PhaseIReference& ref, std::span<const std::vector<double>> in_control,
                                std::span<const std::vector<double>> out_of_control, double alpha);

}  // namespace bspc

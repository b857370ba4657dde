#pragma once

#include "bspc/arma.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace bspc {

enum class Execution { Serial, Parallel };

/// Pooled Phase I reference: mean and covariance of per-batch coefficient
/// estimates over the monitored coefficient subset. Immutable once built.
struct PhaseIReference {
    ArmaShape shape;
    std::vector<std::size_t> indices;  ///< monitored positions in the full coefficient vector
    std::vector<double> full_beta_bar; ///< mean over all coefficients (residual chart filter)
    std::vector<double> beta_bar;      ///< mean over the monitored subset
    Eigen::MatrixXd s_beta;
    Eigen::MatrixXd s_beta_inv;
    std::size_t batch_count = 0;
    double sigma2_pool = 0.0;
    std::vector<std::vector<double>> estimates; ///< full per-batch coefficient vectors
    std::string provenance = "all";

    std::size_t dim() const noexcept { return indices.size(); }
    std::vector<std::string> coef_names() const;
};

struct PooledMoments {
    std::vector<double> mean;
    Eigen::MatrixXd cov; ///< divisor n - 1
};

PooledMoments pooled_moments(std::span<const std::vector<double>> coefs);

/// Builds the reference from stored estimates; indices empty means all coefficients.
/// Throws DegenerateReference when S_beta is singular or its condition number exceeds 1e12,
/// InsufficientReference when fewer than p + 2 batches are available.
PhaseIReference make_reference(const ArmaShape& shape, std::vector<std::vector<double>> estimates, double sigma2_pool,
                               std::vector<std::size_t> indices = {}, std::string provenance = "all");

PhaseIReference estimate_reference(std::span<const CoefEstimate> fits, std::vector<std::size_t> indices = {},
                                   std::string provenance = "all");

/// Re-derives beta_bar and S_beta on a coefficient subset of the same Phase I estimates.
PhaseIReference project(const PhaseIReference& ref, std::vector<std::size_t> indices, std::string provenance);

/// coef is either the full coefficient vector or already restricted to ref.indices.
double t2_score(const PhaseIReference& ref, std::span<const double> coef);
double t2_limit(const PhaseIReference& ref, double alpha);
std::vector<double> t_scores(const PhaseIReference& ref, std::span<const double> coef);
double t_limit(const PhaseIReference& ref, double alpha);

/// Standardized mean of the residuals obtained by filtering with the full reference mean.
double residual_mean_score(std::span<const double> values, const PhaseIReference& ref);
double residual_limit(double alpha);

struct EwmaPoint {
    double value;
    double limit;
};

constexpr double kDefaultEwmaLambda = 0.2;

std::vector<EwmaPoint> ewma_sequence(std::span<const double> scores, double lambda, double alpha);

struct ChartSignals {
    bool t2 = false;
    std::vector<bool> t;
    bool residual = false;
    bool ewma = false;
};

struct ChartRecord {
    std::string batch_id;
    bool monitorable = true;
    std::string failure;
    double t2_score = 0.0;
    double t2_limit = 0.0;
    std::vector<double> t_scores;
    double t_limit = 0.0;
    double resid_mean_score = 0.0;
    double resid_limit = 0.0;
    double ewma_score = 0.0;
    double ewma_limit = 0.0;
    ChartSignals signals;
};

struct ChartReport {
    std::vector<std::string> coef_names;
    double alpha = 0.01;
    double lambda = kDefaultEwmaLambda;
    std::size_t reference_batches = 0; ///< leading records that belong to Phase I (0 when none)
    std::vector<ChartRecord> records;

    std::size_t signal_count_t2() const;
};

/// Fits the batch with the reference orders and scores every chart except EWMA.
/// A failed fit yields a record with monitorable = false instead of throwing.
ChartRecord monitor_batch(const PhaseIReference& ref, const BatchSeries& series, double alpha);

/// Scores batches in order and runs the EWMA over their residual-mean scores.
ChartReport monitor_batches(const PhaseIReference& ref, const BatchSet& batches, double alpha,
                            double lambda = kDefaultEwmaLambda, Execution exec = Execution::Parallel);

}  // namespace bspc

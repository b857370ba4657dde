#include "bspc/charts.hpp"

#include "bspc/dist.hpp"
#include "bspc/error.hpp"
#include "bspc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bspc {

namespace {

constexpr double kMaxCondition = 1e12;

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0,1)");
}

std::vector<double> restrict(const PhaseIReference& ref, std::span<const double> coef) {
    if (coef.size() == ref.dim()) return {coef.begin(), coef.end()};
    if (coef.size() == ref.shape.dim()) {
        std::vector<double> out(ref.dim());
        for (std::size_t j = 0; j < ref.dim(); ++j) out[j] = coef[ref.indices[j]];
        return out;
    }
    throw Error(ErrorKind::ShapeMismatch, "coefficient vector of length " + std::to_string(coef.size()) +
                                              " does not match reference dimension " + std::to_string(ref.dim()));
}

}  // namespace

std::vector<std::string> PhaseIReference::coef_names() const {
    const auto all = shape.coef_names();
    std::vector<std::string> out;
    for (std::size_t i : indices) out.push_back(all[i]);
    return out;
}

PooledMoments pooled_moments(std::span<const std::vector<double>> coefs) {
    if (coefs.size() < 2) throw Error(ErrorKind::InsufficientReference, "at least two estimates are required");
    const std::size_t p = coefs.front().size();
    const auto n = static_cast<double>(coefs.size());
    PooledMoments m;
    m.mean.assign(p, 0.0);
    for (const auto& c : coefs) {
        if (c.size() != p) throw Error(ErrorKind::ShapeMismatch, "estimates differ in length");
        for (std::size_t j = 0; j < p; ++j) m.mean[j] += c[j];
    }
    for (double& v : m.mean) v /= n;
    const auto ip = static_cast<Eigen::Index>(p);
    m.cov = Eigen::MatrixXd::Zero(ip, ip);
    Eigen::VectorXd d(ip);
    for (const auto& c : coefs) {
        for (std::size_t j = 0; j < p; ++j) d(static_cast<Eigen::Index>(j)) = c[j] - m.mean[j];
        m.cov.selfadjointView<Eigen::Lower>().rankUpdate(d);
    }
    m.cov = m.cov.selfadjointView<Eigen::Lower>();
    m.cov /= (n - 1.0);
    return m;
}

PhaseIReference make_reference(const ArmaShape& shape, std::vector<std::vector<double>> estimates, double sigma2_pool,
                               std::vector<std::size_t> indices, std::string provenance) {
    const std::size_t full = shape.dim();
    if (indices.empty()) {
        indices.resize(full);
        std::iota(indices.begin(), indices.end(), std::size_t{0});
    }
    for (std::size_t i : indices)
        if (i >= full) throw Error(ErrorKind::ShapeMismatch, "monitored coefficient index out of range");
    for (const auto& e : estimates)
        if (e.size() != full) throw Error(ErrorKind::ShapeMismatch, "estimate length does not match model orders");
    if (estimates.size() < 2) throw Error(ErrorKind::InsufficientReference, "at least two reference batches are required");

    PhaseIReference ref;
    ref.shape = shape;
    ref.indices = std::move(indices);
    ref.batch_count = estimates.size();
    ref.sigma2_pool = sigma2_pool;
    ref.provenance = std::move(provenance);

    std::vector<double> mean(full, 0.0);
    for (const auto& e : estimates)
        for (std::size_t j = 0; j < full; ++j) mean[j] += e[j];
    for (double& v : mean) v /= static_cast<double>(estimates.size());
    ref.full_beta_bar = mean;

    std::vector<std::vector<double>> sub(estimates.size(), std::vector<double>(ref.dim()));
    for (std::size_t i = 0; i < estimates.size(); ++i)
        for (std::size_t j = 0; j < ref.dim(); ++j) sub[i][j] = estimates[i][ref.indices[j]];
    PooledMoments m = pooled_moments(sub);
    ref.beta_bar = std::move(m.mean);
    ref.s_beta = std::move(m.cov);
    ref.estimates = std::move(estimates);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ref.s_beta, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxCondition)
        throw Error(ErrorKind::DegenerateReference, "coefficient covariance is singular or ill-conditioned");
    Eigen::LLT<Eigen::MatrixXd> llt(ref.s_beta);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::DegenerateReference, "coefficient covariance is not positive definite");
    ref.s_beta_inv = llt.solve(Eigen::MatrixXd::Identity(ref.s_beta.rows(), ref.s_beta.cols()));
    ref.s_beta_inv = 0.5 * (ref.s_beta_inv + ref.s_beta_inv.transpose()).eval();

    if (ref.batch_count < ref.dim() + 2)
        throw Error(ErrorKind::InsufficientReference, "reference needs at least p + 2 batches, got " +
                                                          std::to_string(ref.batch_count));
    return ref;
}

PhaseIReference estimate_reference(std::span<const CoefEstimate> fits, std::vector<std::size_t> indices,
                                   std::string provenance) {
    if (fits.empty()) throw Error(ErrorKind::InsufficientReference, "no reference fits");
    const ArmaShape shape = fits.front().shape;
    std::vector<std::vector<double>> estimates;
    estimates.reserve(fits.size());
    double pool = 0.0;
    for (const auto& f : fits) {
        if (!(f.shape == shape)) throw Error(ErrorKind::ShapeMismatch, "reference fits use different model orders");
        estimates.push_back(f.coef);
        pool += f.sigma2_hat;
    }
    pool /= static_cast<double>(fits.size());
    return make_reference(shape, std::move(estimates), pool, std::move(indices), std::move(provenance));
}

PhaseIReference project(const PhaseIReference& ref, std::vector<std::size_t> indices, std::string provenance) {
    return make_reference(ref.shape, ref.estimates, ref.sigma2_pool, std::move(indices), std::move(provenance));
}

double t2_score(const PhaseIReference& ref, std::span<const double> coef) {
    const std::vector<double> c = restrict(ref, coef);
    const auto p = static_cast<Eigen::Index>(ref.dim());
    Eigen::VectorXd d(p);
    for (Eigen::Index j = 0; j < p; ++j) d(j) = c[static_cast<std::size_t>(j)] - ref.beta_bar[static_cast<std::size_t>(j)];
    return std::max(0.0, d.dot(ref.s_beta_inv * d));
}

double t2_limit(const PhaseIReference& ref, double alpha) {
    require_alpha(alpha);
    const auto n = static_cast<double>(ref.batch_count);
    const auto p = static_cast<double>(ref.dim());
    if (!(n > p)) throw Error(ErrorKind::InsufficientReference, "T2 limit requires more reference batches than coefficients");
    const double scale = p * (n + 1.0) * (n - 1.0) / (n * (n - p));
    return scale * dist::f_quantile(p, n - p, 1.0 - alpha);
}

std::vector<double> t_scores(const PhaseIReference& ref, std::span<const double> coef) {
    const std::vector<double> c = restrict(ref, coef);
    std::vector<double> out(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) {
        const double var = ref.s_beta(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
        if (!(var > 0.0)) throw Error(ErrorKind::DegenerateReference, "zero variance for monitored coefficient");
        out[j] = (c[j] - ref.beta_bar[j]) / std::sqrt(var);
    }
    return out;
}

double t_limit(const PhaseIReference& ref, double alpha) {
    require_alpha(alpha);
    const auto n = static_cast<double>(ref.batch_count);
    return std::sqrt((n + 1.0) / n) * dist::t_quantile(n - 1.0, 1.0 - alpha / 2.0);
}

double residual_mean_score(std::span<const double> values, const PhaseIReference& ref) {
    const std::vector<double> eps = filter_residuals(values, ref.full_beta_bar, ref.shape);
    const auto m = static_cast<double>(eps.size());
    const double mean = std::accumulate(eps.begin(), eps.end(), 0.0) / m;
    return mean * std::sqrt(m) / std::sqrt(ref.sigma2_pool);
}

double residual_limit(double alpha) {
    require_alpha(alpha);
    return dist::normal_quantile(1.0 - alpha / 2.0);
}

std::vector<EwmaPoint> ewma_sequence(std::span<const double> scores, double lambda, double alpha) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw Error(ErrorKind::InvalidArgument, "EWMA lambda must lie in (0,1]");
    const double width = residual_limit(alpha);
    std::vector<EwmaPoint> out;
    out.reserve(scores.size());
    double z = 0.0;
    double decay = 1.0; // (1 - lambda)^(2j)
    const double step = (1.0 - lambda) * (1.0 - lambda);
    for (double s : scores) {
        z = lambda * s + (1.0 - lambda) * z;
        decay *= step;
        out.push_back({z, width * std::sqrt(lambda * (1.0 - decay) / (2.0 - lambda))});
    }
    return out;
}

std::size_t ChartReport::signal_count_t2() const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const ChartRecord& r) { return r.monitorable && r.signals.t2; }));
}

ChartRecord monitor_batch(const PhaseIReference& ref, const BatchSeries& series, double alpha) {
    ChartRecord rec;
    rec.batch_id = series.batch_id;
    rec.t2_limit = t2_limit(ref, alpha);
    rec.t_limit = t_limit(ref, alpha);
    rec.resid_limit = residual_limit(alpha);
    rec.signals.t.assign(ref.dim(), false);
    rec.t_scores.assign(ref.dim(), 0.0);
    try {
        rec.resid_mean_score = residual_mean_score(series.values, ref);
        rec.signals.residual = std::fabs(rec.resid_mean_score) > rec.resid_limit;
        const CoefEstimate fit = fit_ols(series, ref.shape);
        rec.t2_score = t2_score(ref, fit.coef);
        rec.signals.t2 = rec.t2_score > rec.t2_limit;
        rec.t_scores = t_scores(ref, fit.coef);
        for (std::size_t j = 0; j < rec.t_scores.size(); ++j) rec.signals.t[j] = std::fabs(rec.t_scores[j]) > rec.t_limit;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ShapeMismatch) throw;
        rec.monitorable = false;
        rec.failure = std::string(to_string(e.kind())) + ": " + e.what();
        rec.signals = ChartSignals{};
        rec.signals.t.assign(ref.dim(), false);
    }
    return rec;
}

ChartReport monitor_batches(const PhaseIReference& ref, const BatchSet& batches, double alpha, double lambda,
                            Execution exec) {
    ChartReport report;
    report.coef_names = ref.coef_names();
    report.alpha = alpha;
    report.lambda = lambda;
    report.records.resize(batches.size());
    parallel_for(batches.size(), exec, [&](std::size_t i) {
        report.records[i] = monitor_batch(ref, batches.batches[i], alpha);
    });

    std::vector<double> scores;
    std::vector<std::size_t> where;
    for (std::size_t i = 0; i < report.records.size(); ++i) {
        if (report.records[i].monitorable) {
            scores.push_back(report.records[i].resid_mean_score);
            where.push_back(i);
        }
    }
    const auto ewma = ewma_sequence(scores, lambda, alpha);
    for (std::size_t k = 0; k < ewma.size(); ++k) {
        ChartRecord& r = report.records[where[k]];
        r.ewma_score = ewma[k].value;
        r.ewma_limit = ewma[k].limit;
        r.signals.ewma = std::fabs(ewma[k].value) > ewma[k].limit;
    }
    return report;
}

}  // namespace bspc

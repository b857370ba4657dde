#include "bspc/arma.hpp"

#include "bspc/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

namespace bspc {

std::vector<std::string> ArmaShape::coef_names() const {
    std::vector<std::string> names;
    if (intercept) names.emplace_back("phi0");
    for (std::size_t j = 1; j <= ar_order; ++j) names.push_back("phi" + std::to_string(j));
    for (std::size_t k = 1; k <= ma_order; ++k) names.push_back("theta" + std::to_string(k));
    return names;
}

std::vector<double> ArmaSpec::beta() const {
    std::vector<double> b;
    b.reserve(shape().dim());
    if (intercept) b.push_back(phi0);
    b.insert(b.end(), phi.begin(), phi.end());
    b.insert(b.end(), theta.begin(), theta.end());
    return b;
}

ArmaSpec ArmaSpec::from_beta(const ArmaShape& shape, std::span<const double> beta, double sigma2) {
    if (beta.size() != shape.dim())
        throw Error(ErrorKind::ShapeMismatch, "coefficient vector length does not match model orders");
    ArmaSpec spec;
    spec.intercept = shape.intercept;
    std::size_t i = 0;
    spec.phi0 = shape.intercept ? beta[i++] : 0.0;
    spec.phi.assign(beta.begin() + i, beta.begin() + i + shape.ar_order);
    i += shape.ar_order;
    spec.theta.assign(beta.begin() + i, beta.end());
    spec.sigma2 = sigma2;
    return spec;
}

void ArmaSpec::validate() const {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw Error(ErrorKind::ModelInvalid, "innovation variance must be positive");
    if (shape().dim() == 0) throw Error(ErrorKind::ModelInvalid, "model has no coefficients");
    for (double c : beta())
        if (!std::isfinite(c)) throw Error(ErrorKind::ModelInvalid, "model coefficient is not finite");
}

double companion_spectral_radius(std::span<const double> coefs) {
    const auto n = static_cast<Eigen::Index>(coefs.size());
    if (n == 0) return 0.0;
    if (n == 1) return std::fabs(coefs[0]);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) companion(0, j) = coefs[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {
constexpr double kUnitCircleMargin = 1e-8;
}

bool ArmaSpec::causal() const { return companion_spectral_radius(phi) < 1.0 - kUnitCircleMargin; }

bool ArmaSpec::invertible() const {
    std::vector<double> neg(theta.size());
    std::transform(theta.begin(), theta.end(), neg.begin(), [](double t) { return -t; });
    return companion_spectral_radius(neg) < 1.0 - kUnitCircleMargin;
}

double ArmaSpec::process_mean() const {
    double s = 1.0;
    for (double c : phi) s -= c;
    return intercept ? phi0 / s : 0.0;
}

std::size_t BatchSet::series_length() const {
    if (batches.empty()) return 0;
    const std::size_t n = batches.front().size();
    for (std::size_t i = 1; i < batches.size(); ++i)
        if (batches[i].size() != n)
            throw Error(ErrorKind::Format, "batch " + std::to_string(i) + " has length " +
                                               std::to_string(batches[i].size()) + ", expected " + std::to_string(n));
    return n;
}

bool BatchSet::has_labels() const {
    return !batches.empty() && std::all_of(batches.begin(), batches.end(), [](const BatchSeries& b) { return !b.label.empty(); });
}

BatchSet BatchSet::with_label(const std::string& label) const {
    BatchSet out;
    std::copy_if(batches.begin(), batches.end(), std::back_inserter(out.batches),
                 [&](const BatchSeries& b) { return b.label == label; });
    return out;
}

BatchSet BatchSet::without_label(const std::string& label) const {
    BatchSet out;
    std::copy_if(batches.begin(), batches.end(), std::back_inserter(out.batches),
                 [&](const BatchSeries& b) { return b.label != label; });
    return out;
}

BatchSeries simulate(const ArmaSpec& spec, std::size_t length, std::size_t burn_in, std::uint64_t seed) {
    spec.validate();
    if (!spec.causal()) throw Error(ErrorKind::ModelInvalid, "AR polynomial is not causal");
    if (!spec.invertible()) throw Error(ErrorKind::ModelInvalid, "MA polynomial is not invertible");

    std::mt19937_64 rng(seed);
    const double sd = std::sqrt(spec.sigma2);
    std::normal_distribution<double> gauss(0.0, sd);
    const double half_width = std::sqrt(3.0) * sd;
    std::uniform_real_distribution<double> uniform(-half_width, half_width);
    auto draw = [&]() { return spec.innovations == Innovations::Gaussian ? gauss(rng) : uniform(rng); };

    const std::size_t v = spec.phi.size();
    const std::size_t w = spec.theta.size();
    const std::size_t lead = std::max(v, w);
    const std::size_t total = lead + burn_in + length;
    std::vector<double> x(total, spec.process_mean());
    std::vector<double> e(total, 0.0);
    for (std::size_t t = lead; t < total; ++t) {
        e[t] = draw();
        double value = (spec.intercept ? spec.phi0 : 0.0) + e[t];
        for (std::size_t j = 1; j <= v; ++j) value += spec.phi[j - 1] * x[t - j];
        for (std::size_t k = 1; k <= w; ++k) value += spec.theta[k - 1] * e[t - k];
        x[t] = value;
    }
    BatchSeries out;
    out.values.assign(x.end() - static_cast<std::ptrdiff_t>(length), x.end());
    return out;
}

std::size_t long_ar_order(std::size_t length) {
    const auto by_log = static_cast<std::size_t>(std::floor(10.0 * std::log10(static_cast<double>(length))));
    return std::max<std::size_t>(1, std::min(by_log, length / 4));
}

std::size_t startup_offset(const ArmaShape& shape, std::size_t length) {
    if (shape.ma_order == 0) return shape.ar_order;
    return long_ar_order(length) + shape.max_lag();
}

namespace {

struct LeastSquares {
    Eigen::VectorXd coef;
    Eigen::VectorXd residuals;
    Eigen::MatrixXd xtx_inv;
};

LeastSquares solve_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response, bool want_cov) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < design.cols()) throw Error(ErrorKind::SingularFit, "design matrix is rank deficient");
    LeastSquares ls;
    ls.coef = qr.solve(response);
    ls.residuals = response - design * ls.coef;
    if (want_cov) {
        // (X'X)^-1 = P R^-1 R^-T P'
        const auto k = design.cols();
        Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
        Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
        Eigen::MatrixXd inner = r_inv * r_inv.transpose();
        ls.xtx_inv = qr.colsPermutation() * inner * qr.colsPermutation().transpose();
    }
    return ls;
}

// Rows t = start..T-1 regress x_t on [1?, x_{t-1..t-v}, eps_{t-1..t-w}].
void build_design(std::span<const double> x, std::span<const double> eps, std::size_t start, std::size_t v,
                  std::size_t w, bool intercept, Eigen::MatrixXd& design, Eigen::VectorXd& response) {
    const auto rows = static_cast<Eigen::Index>(x.size() - start);
    const auto cols = static_cast<Eigen::Index>(v + w + (intercept ? 1 : 0));
    design.resize(rows, cols);
    response.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t t = start + static_cast<std::size_t>(r);
        Eigen::Index c = 0;
        if (intercept) design(r, c++) = 1.0;
        for (std::size_t j = 1; j <= v; ++j) design(r, c++) = x[t - j];
        for (std::size_t k = 1; k <= w; ++k) design(r, c++) = eps[t - k];
        response(r) = x[t];
    }
}

}  // namespace

CoefEstimate fit_ols(std::span<const double> values, const ArmaShape& shape, std::size_t min_length_ratio) {
    const std::size_t p = shape.dim();
    const std::size_t n = values.size();
    if (p == 0) throw Error(ErrorKind::InvalidArgument, "model has no coefficients");
    if (n < min_length_ratio * p)
        throw Error(ErrorKind::InsufficientData, "series length " + std::to_string(n) + " is below " +
                                                     std::to_string(min_length_ratio) + "*p = " +
                                                     std::to_string(min_length_ratio * p));
    for (double x : values)
        if (!std::isfinite(x)) throw Error(ErrorKind::InsufficientData, "series contains a non-finite value");

    const std::size_t start = startup_offset(shape, n);
    if (n <= start + p) throw Error(ErrorKind::InsufficientData, "too few regression rows after start-up offset");

    std::vector<double> proxy;
    if (shape.ma_order > 0) {
        const std::size_t h = long_ar_order(n);
        Eigen::MatrixXd design;
        Eigen::VectorXd response;
        build_design(values, {}, h, h, 0, shape.intercept, design, response);
        const LeastSquares stage1 = solve_least_squares(design, response, false);
        proxy.assign(n, 0.0);
        for (Eigen::Index r = 0; r < stage1.residuals.size(); ++r) proxy[h + static_cast<std::size_t>(r)] = stage1.residuals(r);
    }

    Eigen::MatrixXd design;
    Eigen::VectorXd response;
    build_design(values, proxy, start, shape.ar_order, shape.ma_order, shape.intercept, design, response);
    const LeastSquares stage2 = solve_least_squares(design, response, true);

    CoefEstimate est;
    est.shape = shape;
    est.effective_n = n - start;
    est.coef.assign(stage2.coef.data(), stage2.coef.data() + stage2.coef.size());
    est.residuals.assign(stage2.residuals.data(), stage2.residuals.data() + stage2.residuals.size());
    const double ssr = stage2.residuals.squaredNorm();
    est.sigma2_hat = ssr / static_cast<double>(est.effective_n);
    const double s2 = ssr / static_cast<double>(est.effective_n - p);
    est.coef_se.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        est.coef_se[j] = std::sqrt(std::max(0.0, s2 * stage2.xtx_inv(jj, jj)));
    }
    return est;
}

std::vector<double> filter_residuals(std::span<const double> values, std::span<const double> coef,
                                     const ArmaShape& shape) {
    if (coef.size() != shape.dim())
        throw Error(ErrorKind::ShapeMismatch, "coefficient vector length does not match model orders");
    const std::size_t lead = shape.max_lag();
    const std::size_t n = values.size();
    if (n <= lead) throw Error(ErrorKind::InsufficientData, "series shorter than the model start-up");
    const double phi0 = shape.intercept ? coef[0] : 0.0;
    const std::size_t ar0 = shape.intercept ? 1 : 0;
    const std::size_t ma0 = ar0 + shape.ar_order;

    std::vector<double> eps(n, 0.0);
    for (std::size_t t = lead; t < n; ++t) {
        double e = values[t] - phi0;
        for (std::size_t j = 1; j <= shape.ar_order; ++j) e -= coef[ar0 + j - 1] * values[t - j];
        for (std::size_t k = 1; k <= shape.ma_order; ++k) e -= coef[ma0 + k - 1] * eps[t - k];
        eps[t] = e;
    }
    return {eps.begin() + static_cast<std::ptrdiff_t>(lead), eps.end()};
}

}  // namespace bspc

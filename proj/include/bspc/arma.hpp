#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bspc {

/// Orders of an ARMA(v, w) model and whether it carries an intercept.
/// Coefficient vectors are laid out as [phi0?, phi_1..phi_v, theta_1..theta_w].
struct ArmaShape {
    std::size_t ar_order = 0;
    std::size_t ma_order = 0;
    bool intercept = true;

    std::size_t dim() const noexcept { return ar_order + ma_order + (intercept ? 1 : 0); }
    std::size_t max_lag() const noexcept { return ar_order > ma_order ? ar_order : ma_order; }
    std::size_t phi_index(std::size_t lag) const noexcept { return (intercept ? 1 : 0) + lag - 1; }
    std::size_t theta_index(std::size_t lag) const noexcept { return (intercept ? 1 : 0) + ar_order + lag - 1; }
    /// Coefficient labels: "phi0", "phi1", ..., "theta1", ...
    std::vector<std::string> coef_names() const;

    bool operator==(const ArmaShape&) const = default;
};

enum class Innovations { Gaussian, Uniform };

/// x_t = phi0 + sum phi_j x_{t-j} + e_t + sum theta_k e_{t-k},  e_t ~ WN(0, sigma2).
struct ArmaSpec {
    bool intercept = true;
    double phi0 = 0.0;
    std::vector<double> phi;
    std::vector<double> theta;
    double sigma2 = 1.0;
    Innovations innovations = Innovations::Gaussian;

    ArmaShape shape() const noexcept { return {phi.size(), theta.size(), intercept}; }
    std::vector<double> beta() const;
    static ArmaSpec from_beta(const ArmaShape& shape, std::span<const double> beta, double sigma2 = 1.0);

    /// Throws ModelInvalid when sigma2 <= 0, p == 0 or a coefficient is not finite.
    void validate() const;
    bool causal() const;
    bool invertible() const;
    double process_mean() const;
};

/// Spectral radius of the companion matrix of z^n - c_1 z^{n-1} - ... - c_n.
double companion_spectral_radius(std::span<const double> coefs);

struct BatchSeries {
    std::string batch_id;
    std::vector<double> values;
    std::string label;

    std::size_t size() const noexcept { return values.size(); }
};

struct BatchSet {
    std::vector<BatchSeries> batches;

    std::size_t size() const noexcept { return batches.size(); }
    bool empty() const noexcept { return batches.empty(); }
    /// Common series length, 0 when empty. Throws Format when lengths differ.
    std::size_t series_length() const;
    bool has_labels() const;
    BatchSet with_label(const std::string& label) const;
    BatchSet without_label(const std::string& label) const;
};

struct CoefEstimate {
    std::vector<double> coef;
    std::vector<double> coef_se;   ///< sqrt(diag(s2 (X'X)^-1)), s2 = SSR / (n - p)
    std::vector<double> residuals; ///< regression residuals on the effective rows
    double sigma2_hat = 0.0;       ///< mean of squared residuals
    std::size_t effective_n = 0;
    ArmaShape shape;
};

constexpr std::size_t kDefaultBurnIn = 200;

/// Draws T values of the process after discarding burn_in warm-up values.
/// Bit-identical for identical arguments.
BatchSeries simulate(const ArmaSpec& spec, std::size_t length, std::size_t burn_in, std::uint64_t seed);

/// Order of the long autoregression used to build proxy innovations when w > 0.
std::size_t long_ar_order(std::size_t length);

/// Number of leading observations with no regression row (h + max(v,w), or v for pure AR).
std::size_t startup_offset(const ArmaShape& shape, std::size_t length);

constexpr std::size_t kMinLengthRatio = 10;

/// Least-squares coefficient estimate. Pure AR is one-stage OLS on lagged values;
/// with MA terms, lagged innovations come from a long-autoregression first stage.
/// Series shorter than min_length_ratio * p are rejected with InsufficientData.
CoefEstimate fit_ols(std::span<const double> values, const ArmaShape& shape,
                     std::size_t min_length_ratio = kMinLengthRatio);
inline CoefEstimate fit_ols(const BatchSeries& series, const ArmaShape& shape) { return fit_ols(series.values, shape); }

/// Innovation recursion with zero start-up innovations; returns the T - max(v,w) residuals.
std::vector<double> filter_residuals(std::span<const double> values, std::span<const double> coef,
                                     const ArmaShape& shape);

}  // namespace bspc

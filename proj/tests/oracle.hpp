#pragma once

// Independent reference computations used to cross-check the library.

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

/// Plain bisection of an increasing function g for g(x) = target, run until
/// the bracket cannot be split further in double precision.
inline double bisect(const std::function<double(double)>& g, double target, double lo, double hi) {
    while (g(lo) > target) lo = lo < 0 ? lo * 2 : lo / 2 - 1;
    while (g(hi) < target) hi = hi > 0 ? hi * 2 : hi / 2 + 1;
    for (int i = 0; i < 2000; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (g(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Quantile by bisection of the cdf below the median and of the complement above it.
template <class Dist>
double quantile(const Dist& d, double p, double lo, double hi, double floor) {
    const auto clamp = [floor](double x) { return std::max(x, floor); };
    if (p <= 0.5)
        return bisect([&](double x) { return x <= floor ? 0.0 : boost::math::cdf(d, clamp(x)); }, p, lo, hi);
    return bisect([&](double x) { return x <= floor ? -1.0 : -boost::math::cdf(boost::math::complement(d, clamp(x))); },
                  -(1.0 - p), lo, hi);
}

inline double normal_cdf(double x) { return boost::math::cdf(boost::math::normal_distribution<double>(), x); }
inline double t_cdf(double df, double x) { return boost::math::cdf(boost::math::students_t_distribution<double>(df), x); }
inline double f_cdf(double a, double b, double x) {
    return boost::math::cdf(boost::math::fisher_f_distribution<double>(a, b), x);
}
inline double chi2_cdf(double df, double x) {
    return boost::math::cdf(boost::math::chi_squared_distribution<double>(df), x);
}

inline constexpr double kNoFloor = -std::numeric_limits<double>::infinity();

inline double normal_quantile(double p) { return quantile(boost::math::normal_distribution<double>(), p, -1, 1, kNoFloor); }
inline double t_quantile(double df, double p) {
    return quantile(boost::math::students_t_distribution<double>(df), p, -1, 1, kNoFloor);
}
inline double f_quantile(double a, double b, double p) {
    return quantile(boost::math::fisher_f_distribution<double>(a, b), p, 0.0, 1.0, 0.0);
}
inline double chi2_quantile(double df, double p) {
    return quantile(boost::math::chi_squared_distribution<double>(df), p, 0.0, df, 0.0);
}

/// Solves A x = b by Gaussian elimination with partial pivoting in long double.
inline std::vector<double> solve(std::vector<std::vector<long double>> a, std::vector<long double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        if (a[c][c] == 0) throw std::runtime_error("singular");
        for (std::size_t r = c + 1; r < n; ++r) {
            const long double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        long double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = static_cast<double>(s / a[i][i]);
    }
    return x;
}

/// Least squares for AR(v) with optional intercept via the normal equations X'X b = X'y.
inline std::vector<double> ar_normal_equations(const std::vector<double>& x, std::size_t v, bool intercept) {
    const std::size_t p = v + (intercept ? 1 : 0);
    std::vector<std::vector<long double>> xtx(p, std::vector<long double>(p, 0));
    std::vector<long double> xty(p, 0);
    for (std::size_t t = v; t < x.size(); ++t) {
        std::vector<long double> row;
        if (intercept) row.push_back(1);
        for (std::size_t j = 1; j <= v; ++j) row.push_back(x[t - j]);
        for (std::size_t i = 0; i < p; ++i) {
            xty[i] += row[i] * x[t];
            for (std::size_t k = 0; k < p; ++k) xtx[i][k] += row[i] * row[k];
        }
    }
    return solve(xtx, xty);
}

/// Two-sample free KS distance between a sample and a continuous cdf.
inline double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

}  // namespace oracle

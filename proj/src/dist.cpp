#include "bspc/dist.hpp"

#include "bspc/error.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

namespace bspc::dist {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 10000;

void require_df(double df, const char* what) {
    if (!(df > 0.0) || !std::isfinite(df))
        throw Error(ErrorKind::InvalidArgument, std::string(what) + ": degrees of freedom must be positive");
}

void require_prob(double p, const char* what) {
    if (!(p > 0.0 && p < 1.0))
        throw Error(ErrorKind::InvalidArgument, std::string(what) + ": probability must lie in (0,1)");
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_cf(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    return h;
}

double gamma_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Inverts a continuous CDF on (lo, hi). The bracket is widened until it
// straddles prob, bisected down, then polished with safeguarded Newton steps.
double invert_cdf(const std::function<double(double)>& cdf, const std::function<double(double)>& pdf,
                  double prob, double lo, double hi, bool lower_bounded) {
    while (cdf(hi) < prob) {
        lo = hi;
        hi = hi <= 0.0 ? 1.0 : hi * 2.0;
        if (!std::isfinite(hi)) return hi;
    }
    if (!lower_bounded) {
        while (cdf(lo) > prob) {
            hi = lo;
            lo = lo >= 0.0 ? -1.0 : lo * 2.0;
        }
    }
    for (int i = 0; i < 60 && (hi - lo) > 1e-6 * (1.0 + std::fabs(lo)); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < prob)
            lo = mid;
        else
            hi = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 100; ++i) {
        const double diff = cdf(x) - prob;
        if (diff == 0.0) break;
        if (diff < 0.0)
            lo = x;
        else
            hi = x;
        const double dens = pdf(x);
        double next = dens > 0.0 ? x - diff / dens : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(x))) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

// Upper-tail probabilities are inverted through the survival function so that
// quantiles far in the right tail keep full relative precision.
double invert_upper(const std::function<double(double)>& sf, const std::function<double(double)>& pdf,
                    double prob, double lo, double hi, bool lower_bounded) {
    return invert_cdf([&](double x) { return -sf(x); }, pdf, -(1.0 - prob), lo, hi, lower_bounded);
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw Error(ErrorKind::InvalidArgument, "incomplete_beta: shape parameters must be positive");
    if (!(x >= 0.0 && x <= 1.0))
        throw Error(ErrorKind::InvalidArgument, "incomplete_beta: x must lie in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double incomplete_gamma_p(double a, double x) {
    if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "incomplete_gamma: shape must be positive");
    if (!(x >= 0.0)) throw Error(ErrorKind::InvalidArgument, "incomplete_gamma: x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return gamma_series(a, x);
    return 1.0 - gamma_cf(a, x);
}

double incomplete_gamma_q(double a, double x) {
    if (!(a > 0.0)) throw Error(ErrorKind::InvalidArgument, "incomplete_gamma: shape must be positive");
    if (!(x >= 0.0)) throw Error(ErrorKind::InvalidArgument, "incomplete_gamma: x must be nonnegative");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - gamma_series(a, x);
    return gamma_cf(a, x);
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double prob) {
    require_prob(prob, "normal_quantile");
    if (prob == 0.5) return 0.0;
    if (prob < 0.5) return -normal_quantile(1.0 - prob);
    return invert_upper([](double x) { return normal_cdf(-x); }, normal_pdf, prob, 0.0, 1.0, false);
}

double t_pdf(double df, double x) {
    require_df(df, "t_pdf");
    const double log_norm = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * std::numbers::pi);
    return std::exp(log_norm - 0.5 * (df + 1.0) * std::log1p(x * x / df));
}

double t_cdf(double df, double x) {
    require_df(df, "t_cdf");
    if (std::isnan(x)) throw Error(ErrorKind::InvalidArgument, "t_cdf: x is NaN");
    if (x == 0.0) return 0.5;
    const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + x * x));
    return x > 0.0 ? 1.0 - tail : tail;
}

double t_quantile(double df, double prob) {
    require_df(df, "t_quantile");
    require_prob(prob, "t_quantile");
    if (prob == 0.5) return 0.0;
    if (prob < 0.5) return -t_quantile(df, 1.0 - prob);
    return invert_upper([df](double x) { return x > 0.0 ? 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + x * x))
                                                        : 1.0 - t_cdf(df, x); },
                        [df](double x) { return t_pdf(df, x); }, prob, 0.0, 1.0, false);
}

double f_pdf(double d1, double d2, double x) {
    require_df(d1, "f_pdf");
    require_df(d2, "f_pdf");
    if (x <= 0.0) return 0.0;
    const double log_b = std::lgamma(0.5 * d1) + std::lgamma(0.5 * d2) - std::lgamma(0.5 * (d1 + d2));
    const double log_pdf = 0.5 * d1 * std::log(d1 / d2) + (0.5 * d1 - 1.0) * std::log(x) -
                           0.5 * (d1 + d2) * std::log1p(d1 * x / d2) - log_b;
    return std::exp(log_pdf);
}

double f_cdf(double d1, double d2, double x) {
    require_df(d1, "f_cdf");
    require_df(d2, "f_cdf");
    if (!(x >= 0.0)) throw Error(ErrorKind::InvalidArgument, "f_cdf: x must be nonnegative");
    if (std::isinf(x)) return 1.0;
    return incomplete_beta(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2));
}

double f_quantile(double d1, double d2, double prob) {
    require_df(d1, "f_quantile");
    require_df(d2, "f_quantile");
    require_prob(prob, "f_quantile");
    const auto pdf = [=](double x) { return f_pdf(d1, d2, x); };
    if (prob <= 0.5) return invert_cdf([=](double x) { return f_cdf(d1, d2, x); }, pdf, prob, 0.0, 1.0, true);
    return invert_upper([=](double x) { return std::isinf(x) ? 0.0 : incomplete_beta(0.5 * d2, 0.5 * d1, d2 / (d1 * x + d2)); },
                        pdf, prob, 0.0, 1.0, true);
}

double chi2_pdf(double df, double x) {
    require_df(df, "chi2_pdf");
    if (x <= 0.0) return 0.0;
    const double k = 0.5 * df;
    return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::numbers::ln2 - std::lgamma(k));
}

double chi2_cdf(double df, double x) {
    require_df(df, "chi2_cdf");
    if (!(x >= 0.0)) throw Error(ErrorKind::InvalidArgument, "chi2_cdf: x must be nonnegative");
    return incomplete_gamma_p(0.5 * df, 0.5 * x);
}

double chi2_sf(double df, double x) {
    require_df(df, "chi2_sf");
    if (!(x >= 0.0)) throw Error(ErrorKind::InvalidArgument, "chi2_sf: x must be nonnegative");
    return incomplete_gamma_q(0.5 * df, 0.5 * x);
}

double chi2_quantile(double df, double prob) {
    require_df(df, "chi2_quantile");
    require_prob(prob, "chi2_quantile");
    const auto pdf = [df](double x) { return chi2_pdf(df, x); };
    const double hi = df > 1.0 ? df : 1.0;
    if (prob <= 0.5) return invert_cdf([df](double x) { return chi2_cdf(df, x); }, pdf, prob, 0.0, hi, true);
    return invert_upper([df](double x) { return chi2_sf(df, x); }, pdf, prob, 0.0, hi, true);
}

}  // namespace bspc::dist

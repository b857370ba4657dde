#include "bspc/diagnostics.hpp"

#include "bspc/dist.hpp"
#include "bspc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace bspc {

TestResult ljung_box(std::span<const double> residuals, std::size_t lags, std::size_t fitted_params) {
    const std::size_t m = residuals.size();
    if (lags == 0 || lags <= fitted_params)
        throw Error(ErrorKind::InvalidArgument, "Ljung-Box lags must exceed the number of fitted parameters");
    if (m <= lags + 1) throw Error(ErrorKind::InvalidArgument, "Ljung-Box needs more residuals than lags + 1");

    const double mean = std::accumulate(residuals.begin(), residuals.end(), 0.0) / static_cast<double>(m);
    double denom = 0.0;
    for (double e : residuals) denom += (e - mean) * (e - mean);
    if (!(denom > 0.0)) throw Error(ErrorKind::InvalidArgument, "Ljung-Box residuals have zero variance");

    double q = 0.0;
    for (std::size_t k = 1; k <= lags; ++k) {
        double num = 0.0;
        for (std::size_t t = k; t < m; ++t) num += (residuals[t] - mean) * (residuals[t - k] - mean);
        const double rho = num / denom;
        q += rho * rho / static_cast<double>(m - k);
    }
    const auto md = static_cast<double>(m);
    q *= md * (md + 2.0);
    TestResult r;
    r.statistic = q;
    r.df = static_cast<double>(lags - fitted_params);
    r.p_value = dist::chi2_sf(r.df, q);
    return r;
}

std::size_t default_ljung_box_lags(std::size_t m) { return std::max<std::size_t>(1, std::min<std::size_t>(20, m / 5)); }

namespace {

double poly(const double* c, int n, double x) {
    double result = c[0];
    if (n > 1) {
        double p = x * c[n - 1];
        for (int j = n - 2; j > 0; --j) p = (p + c[j]) * x;
        result += p;
    }
    return result;
}

}  // namespace

TestResult shapiro_wilk(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 3 || n > 5000) throw Error(ErrorKind::InvalidArgument, "Shapiro-Wilk sample size must lie in [3, 5000]");

    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    const double centre = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    for (double& v : x) v -= centre;
    const double range = x[n - 1] - x[0];
    if (!(range > 0.0)) throw Error(ErrorKind::InvalidArgument, "Shapiro-Wilk sample has zero variance");

    static constexpr double g[2] = {-2.273, 0.459};
    static constexpr double c1[6] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
    static constexpr double c2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static constexpr double c3[4] = {0.544, -0.39978, 0.025054, -6.714e-4};
    static constexpr double c4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static constexpr double c5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static constexpr double c6[3] = {-0.4803, -0.082676, 0.0030302};

    const std::size_t half = n / 2;
    const auto an = static_cast<double>(n);
    std::vector<double> a(half + 1, 0.0); // 1-based coefficients
    if (n == 3) {
        a[1] = std::numbers::sqrt2 / 2.0;
    } else {
        const double an25 = an + 0.25;
        double summ2 = 0.0;
        for (std::size_t i = 1; i <= half; ++i) {
            a[i] = dist::normal_quantile((static_cast<double>(i) - 0.375) / an25);
            summ2 += a[i] * a[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, 6, rsn) - a[1] / ssumm2;
        std::size_t first;
        double fac;
        if (n > 5) {
            first = 3;
            const double a2 = -a[2] / ssumm2 + poly(c2, 6, rsn);
            fac = std::sqrt((summ2 - 2.0 * a[1] * a[1] - 2.0 * a[2] * a[2]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[2] = a2;
        } else {
            first = 2;
            fac = std::sqrt((summ2 - 2.0 * a[1] * a[1]) / (1.0 - 2.0 * a1 * a1));
        }
        a[1] = a1;
        for (std::size_t i = first; i <= half; ++i) a[i] /= -fac;
    }

    // Squared correlation between the scaled order statistics and the coefficients.
    auto coef_at = [&](std::size_t i) {
        const std::size_t j = n - 1 - i;
        if (i == j) return 0.0;
        return i < j ? -a[1 + i] : a[1 + j];
    };
    double sa = 0.0;
    double sx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sa += coef_at(i);
        sx += x[i] / range;
    }
    sa /= an;
    sx /= an;
    double ssa = 0.0, ssx = 0.0, sax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double asa = coef_at(i) - sa;
        const double xsx = x[i] / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    const double ssassx = std::sqrt(ssa * ssx);
    const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    TestResult r;
    r.statistic = 1.0 - w1;

    if (n == 3) {
        constexpr double pi6 = 6.0 / std::numbers::pi;
        constexpr double stqr = std::numbers::pi / 3.0;
        r.p_value = std::max(0.0, pi6 * (std::asin(std::sqrt(r.statistic)) - stqr));
        return r;
    }
    double y = std::log(w1);
    const double xx = std::log(an);
    double m, s;
    if (n <= 11) {
        const double gamma = poly(g, 2, an);
        if (y >= gamma) {
            r.p_value = 1e-99;
            return r;
        }
        y = -std::log(gamma - y);
        m = poly(c3, 4, an);
        s = std::exp(poly(c4, 4, an));
    } else {
        m = poly(c5, 4, xx);
        s = std::exp(poly(c6, 3, xx));
    }
    r.p_value = 1.0 - dist::normal_cdf((y - m) / s);
    r.p_value = std::clamp(r.p_value, 0.0, 1.0);
    return r;
}

ScreeningResult coef_significance_screen(std::span<const CoefEstimate> fits, double level, double threshold) {
    if (!(level > 0.0 && level < 1.0) || !(threshold > 0.0 && threshold < 1.0))
        throw Error(ErrorKind::InvalidArgument, "screening level and threshold must lie in (0,1)");
    if (fits.empty()) throw Error(ErrorKind::InvalidArgument, "no fits to screen");
    const ArmaShape shape = fits.front().shape;
    const std::size_t p = shape.dim();
    ScreeningResult out;
    out.level = level;
    out.threshold = threshold;
    out.rates.assign(p, 0.0);
    for (const auto& f : fits) {
        if (!(f.shape == shape)) throw Error(ErrorKind::ShapeMismatch, "screened fits use different model orders");
        const double crit = dist::t_quantile(static_cast<double>(f.effective_n - p), 1.0 - level / 2.0);
        for (std::size_t j = 0; j < p; ++j)
            if (f.coef_se[j] > 0.0 && std::fabs(f.coef[j]) / f.coef_se[j] > crit) out.rates[j] += 1.0;
    }
    for (std::size_t j = 0; j < p; ++j) {
        out.rates[j] /= static_cast<double>(fits.size());
        if (out.rates[j] >= threshold) out.retained.push_back(j);
    }
    return out;
}

ResidualAdequacy residual_adequacy(std::span<const std::vector<double>> residuals, std::size_t fitted,
                                   double level) {
    ResidualAdequacy out;
    std::size_t white = 0, normal = 0;
    for (const auto& r : residuals) {
        const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
        if (r.empty() || *lo == *hi) continue;
        const std::size_t lags = std::max(default_ljung_box_lags(r.size()), fitted + 1);
        if (ljung_box(r, lags, fitted).p_value > level) ++white;
        std::span<const double> sw(r);
        if (sw.size() > 5000) sw = sw.first(5000);
        if (shapiro_wilk(sw).p_value > level) ++normal;
    }
    out.batches = residuals.size();
    if (!residuals.empty()) {
        out.white_rate = static_cast<double>(white) / static_cast<double>(residuals.size());
        out.normal_rate = static_cast<double>(normal) / static_cast<double>(residuals.size());
    }
    return out;
}

LabelRates evaluate_labels(const PhaseIReference& ref, const BatchSet& in_control, const BatchSet& out_of_control,
                           double alpha, Execution exec) {
    if (in_control.empty() || out_of_control.empty())
        throw Error(ErrorKind::InvalidArgument, "labeled evaluation sets must be nonempty");
    const ChartReport a = monitor_batches(ref, in_control, alpha, kDefaultEwmaLambda, exec);
    const ChartReport b = monitor_batches(ref, out_of_control, alpha, kDefaultEwmaLambda, exec);
    LabelRates r;
    auto tally = [&](const ChartReport& rep, std::size_t& used) {
        std::size_t hits = 0;
        for (const auto& rec : rep.records) {
            if (!rec.monitorable) {
                ++r.unmonitorable;
                continue;
            }
            ++used;
            if (rec.signals.t2) ++hits;
        }
        return used ? static_cast<double>(hits) / static_cast<double>(used) : 0.0;
    };
    r.r0 = tally(a, r.in_control_used);
    r.r1 = tally(b, r.out_of_control_used);
    return r;
}

LabelRates evaluate_label_coefs(const PhaseIReference& ref, std::span<const std::vector<double>> in_control,
                                std::span<const std::vector<double>> out_of_control, double alpha) {
    if (in_control.empty() || out_of_control.empty())
        throw Error(ErrorKind::InvalidArgument, "labeled evaluation sets must be nonempty");
    const double limit = t2_limit(ref, alpha);
    auto rate = [&](std::span<const std::vector<double>> coefs) {
        std::size_t hits = 0;
        for (const auto& c : coefs)
            if (t2_score(ref, c) > limit) ++hits;
        return static_cast<double>(hits) / static_cast<double>(coefs.size());
    };
    LabelRates r;
    r.r0 = rate(in_control);
    r.r1 = rate(out_of_control);
    r.in_control_used = in_control.size();
    r.out_of_control_used = out_of_control.size();
    return r;
}

}  // namespace bspc

#pragma once

// CDFs and quantiles of the reference distributions behind every chart limit
// and hypothesis test. CDFs go through the regularized incomplete beta and
// gamma functions; quantiles are bracketed bisection refined by Newton steps.

namespace bspc::dist {

/// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
double incomplete_beta(double a, double b, double x);

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double incomplete_gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), without cancellation.
double incomplete_gamma_q(double a, double x);

double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double prob);

double t_pdf(double df, double x);
double t_cdf(double df, double x);
double t_quantile(double df, double prob);

double f_pdf(double d1, double d2, double x);
double f_cdf(double d1, double d2, double x);
double f_quantile(double d1, double d2, double prob);

double chi2_pdf(double df, double x);
double chi2_cdf(double df, double x);
/// Upper tail 1 - chi2_cdf, accurate for small tail probabilities (p-values).
double chi2_sf(double df, double x);
double chi2_quantile(double df, double prob);

}  // namespace bspc::dist

#include "oracle.hpp"

#include "bspc/arma.hpp"
#include "bspc/dist.hpp"
#include "bspc/error.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace bspc;

namespace {

ArmaSpec table1_spec() {
    ArmaSpec s;
    s.phi0 = 1.0;
    s.phi = {0.2};
    s.theta = {0.5};
    return s;
}

ArmaSpec ar1(double phi, double phi0 = 0.0) {
    ArmaSpec s;
    s.phi0 = phi0;
    s.phi = {phi};
    return s;
}

double mean_of(const std::vector<double>& xs) { return std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size()); }

}  // namespace

TEST_CASE("shape layout") {
    const ArmaShape s{2, 1, true};
    CHECK(s.dim() == 4);
    CHECK(s.phi_index(1) == 1);
    CHECK(s.phi_index(2) == 2);
    CHECK(s.theta_index(1) == 3);
    CHECK(s.coef_names() == std::vector<std::string>{"phi0", "phi1", "phi2", "theta1"});
    CHECK(ArmaShape{1, 0, false}.coef_names() == std::vector<std::string>{"phi1"});
    const ArmaSpec spec = table1_spec();
    CHECK(spec.beta() == std::vector<double>{1.0, 0.2, 0.5});
    const ArmaSpec back = ArmaSpec::from_beta(spec.shape(), spec.beta());
    CHECK(back.phi == spec.phi);
    CHECK(back.theta == spec.theta);
}

TEST_CASE("causality and invertibility") {
    CHECK(table1_spec().causal());
    CHECK(table1_spec().invertible());
    CHECK_FALSE(ar1(1.0).causal());
    CHECK_FALSE(ar1(-1.2).causal());
    ArmaSpec ma;
    ma.theta = {1.5};
    CHECK_FALSE(ma.invertible());
    ArmaSpec ar2;
    ar2.phi = {0.5, 0.49};
    CHECK(ar2.causal());
    ar2.phi = {0.5, 0.51};
    CHECK_FALSE(ar2.causal());
    CHECK_THROWS_AS(simulate(ar1(1.0), 10, 10, 1), Error);
}

TEST_CASE("simulate: degenerate noise gives the intercept") {
    ArmaSpec s;
    s.phi0 = 1.0;
    s.sigma2 = 1e-20;
    const BatchSeries b = simulate(s, 5, 200, 7);
    REQUIRE(b.size() == 5);
    for (double x : b.values) CHECK(std::abs(x - 1.0) < 1e-8);
}

TEST_CASE("simulate: long-run moments") {
    const BatchSeries arma = simulate(table1_spec(), 1'000'000, 200, 11);
    CHECK(std::abs(mean_of(arma.values) - 1.25) < 0.01);

    const BatchSeries a = simulate(ar1(0.5), 1'000'000, 200, 12);
    const double m = mean_of(a.values);
    double c0 = 0, c1 = 0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        c0 += (a.values[t] - m) * (a.values[t] - m);
        if (t > 0) c1 += (a.values[t] - m) * (a.values[t - 1] - m);
    }
    CHECK(std::abs(c1 / c0 - 0.5) < 0.01);
}

TEST_CASE("simulate is bit-reproducible and seed-sensitive") {
    const auto a = simulate(table1_spec(), 300, 200, 99);
    const auto b = simulate(table1_spec(), 300, 200, 99);
    const auto c = simulate(table1_spec(), 300, 200, 100);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
}

TEST_CASE("uniform innovations keep the requested variance") {
    ArmaSpec s;
    s.phi0 = 0.0;
    s.intercept = true;
    s.sigma2 = 4.0;
    s.innovations = Innovations::Uniform;
    const auto b = simulate(s, 200'000, 0, 3);
    const double m = mean_of(b.values);
    double v = 0;
    for (double x : b.values) {
        v += (x - m) * (x - m);
        CHECK(std::abs(x) <= std::sqrt(12.0) + 1e-12);
    }
    CHECK(std::abs(v / double(b.size()) - 4.0) < 0.05);
}

TEST_CASE("fit: intercept-only model on a constant series") {
    const std::vector<double> c(20, 3.5);
    const CoefEstimate f = fit_ols(c, ArmaShape{0, 0, true});
    REQUIRE(f.coef.size() == 1);
    CHECK(f.coef[0] == doctest::Approx(3.5).epsilon(1e-14));
    for (double r : f.residuals) CHECK(std::abs(r) < 1e-12);
    CHECK(f.sigma2_hat < 1e-24);
}

TEST_CASE("fit: six-point AR(1) matches the hand-solved normal equations") {
    const std::vector<double> x{1, 0.5, 0.25, 0.5, 1, 0.5};
    CHECK_THROWS_AS(fit_ols(x, ArmaShape{1, 0, true}), Error);
    const CoefEstimate f = fit_ols(x, ArmaShape{1, 0, true}, 0);
    const auto oracle_coef = oracle::ar_normal_equations(x, 1, true);
    CHECK(std::abs(f.coef[0] - 29.0 / 48.0) < 1e-12);
    CHECK(std::abs(f.coef[1] + 1.0 / 12.0) < 1e-12);
    CHECK(std::abs(f.coef[0] - oracle_coef[0]) < 1e-12);
    CHECK(std::abs(f.coef[1] - oracle_coef[1]) < 1e-12);
    CHECK(f.effective_n == 5);
    CHECK(f.residuals.size() == 5);
    double ssr = 0;
    for (double r : f.residuals) ssr += r * r;
    CHECK(f.sigma2_hat == doctest::Approx(ssr / 5));
}

TEST_CASE("fit: w = 0 equals the normal-equation solution on random instances") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> order(1, 4), len(0, 60);
    std::normal_distribution<double> z;
    for (int k = 0; k < 100; ++k) {
        const std::size_t v = order(rng);
        const bool intercept = k % 3 != 0;
        const ArmaShape shape{v, 0, intercept};
        std::vector<double> x(10 * shape.dim() + len(rng));
        for (auto& xi : x) xi = z(rng) + (intercept ? 2.0 : 0.0);
        const CoefEstimate f = fit_ols(x, shape);
        const auto ref = oracle::ar_normal_equations(x, v, intercept);
        for (std::size_t j = 0; j < ref.size(); ++j) CHECK(std::abs(f.coef[j] - ref[j]) < 1e-10);
    }
}

TEST_CASE("fit: errors") {
    CHECK_THROWS_AS(fit_ols(std::vector<double>(29, 1.0), ArmaShape{1, 1, true}), Error);
    try {
        fit_ols(std::vector<double>(20, 1.0), ArmaShape{1, 0, true});
        FAIL("constant series with a lag regressor must be singular");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SingularFit);
    }
    std::vector<double> bad(50, 0.5);
    bad[10] = std::nan("");
    CHECK_THROWS_AS(fit_ols(bad, ArmaShape{1, 0, true}), Error);
}

TEST_CASE("fit: startup offset and effective rows") {
    CHECK(long_ar_order(500) == 26);
    CHECK(long_ar_order(100) == 20);
    CHECK(long_ar_order(40) == 10);
    CHECK(startup_offset(ArmaShape{1, 1, true}, 500) == 27);
    CHECK(startup_offset(ArmaShape{3, 0, true}, 500) == 3);
    const auto b = simulate(table1_spec(), 500, 200, 5);
    const CoefEstimate f = fit_ols(b, ArmaShape{1, 1, true});
    CHECK(f.effective_n == 500 - 27);
    CHECK(f.residuals.size() == f.effective_n);
}

TEST_CASE("fit: AR(1) estimate is consistent") {
    double sum = 0;
    for (int r = 0; r < 1000; ++r) sum += fit_ols(simulate(ar1(0.5), 500, 200, 1000 + r), ArmaShape{1, 0, true}).coef[1];
    CHECK(std::abs(sum / 1000 - 0.5) < 0.01);
}

TEST_CASE("fit: 99% confidence bands cover the true coefficients") {
    const double z = dist::normal_quantile(0.995);
    for (const ArmaSpec& spec : {ar1(0.5, 1.0), table1_spec()}) {
        const auto beta = spec.beta();
        std::vector<int> covered(beta.size(), 0);
        for (int r = 0; r < 1000; ++r) {
            const CoefEstimate f = fit_ols(simulate(spec, 500, 200, 50'000 + r), spec.shape());
            for (std::size_t j = 0; j < beta.size(); ++j) covered[j] += std::abs(f.coef[j] - beta[j]) <= z * f.coef_se[j];
        }
        for (std::size_t j = 0; j < beta.size(); ++j) {
            INFO("coefficient " << j << " covered " << covered[j]);
            CHECK(covered[j] >= 950);
        }
    }
}

TEST_CASE("filter_residuals") {
    SUBCASE("hand recursion") {
        const std::vector<double> x{1, 0.5, 0.25};
        const std::vector<double> coef{0.5};
        const auto e = filter_residuals(x, coef, ArmaShape{1, 0, false});
        REQUIRE(e.size() == 2);
        CHECK(e[0] == 0.0);
        CHECK(e[1] == 0.0);
    }
    SUBCASE("identity filter returns the series tail") {
        const std::vector<double> x{0.3, -1.2, 0.8, 2.0, -0.1};
        const std::vector<double> coef{0.0, 0.0, 0.0};
        const auto e = filter_residuals(x, coef, ArmaShape{1, 1, true});
        CHECK(e == std::vector<double>(x.begin() + 1, x.end()));
    }
    SUBCASE("noise-free data from the same model") {
        ArmaSpec s = table1_spec();
        s.sigma2 = 1e-24;
        const auto b = simulate(s, 200, 200, 4);
        for (double r : filter_residuals(b.values, s.beta(), s.shape())) CHECK(std::abs(r) < 1e-9);
    }
    SUBCASE("an ARMA recursion by hand") {
        const std::vector<double> x{1.0, 2.0, 0.5, 1.5};
        const std::vector<double> coef{0.1, 0.5, 0.4};
        const auto e = filter_residuals(x, coef, ArmaShape{1, 1, true});
        const double e2 = 2.0 - 0.1 - 0.5 * 1.0;
        const double e3 = 0.5 - 0.1 - 0.5 * 2.0 - 0.4 * e2;
        const double e4 = 1.5 - 0.1 - 0.5 * 0.5 - 0.4 * e3;
        REQUIRE(e.size() == 3);
        CHECK(e[0] == doctest::Approx(e2));
        CHECK(e[1] == doctest::Approx(e3));
        CHECK(e[2] == doctest::Approx(e4));
    }
}

TEST_CASE("fitted-model residual means shrink with T") {
    int inside = 0;
    const int n = 500;
    for (int r = 0; r < n; ++r) {
        const auto b = simulate(table1_spec(), 1000, 200, 70'000 + r);
        const CoefEstimate f = fit_ols(b, ArmaShape{1, 1, true});
        const auto e = filter_residuals(b.values, f.coef, f.shape);
        inside += std::abs(mean_of(e)) < 3 * std::sqrt(f.sigma2_hat) / std::sqrt(double(b.size()));
    }
    CHECK(inside >= 0.99 * n);
}

TEST_CASE("batch sets") {
    BatchSet s;
    s.batches = {{"a", {1, 2}, "1"}, {"b", {3, 4}, "-1"}, {"c", {5, 6}, "1"}};
    CHECK(s.series_length() == 2);
    CHECK(s.has_labels());
    CHECK(s.with_label("1").size() == 2);
    CHECK(s.without_label("1").size() == 1);
    s.batches.push_back({"d", {1}, "1"});
    CHECK_THROWS_AS(s.series_length(), Error);
}

#include "oracle.hpp"

#include "bspc/charts.hpp"
#include "bspc/dist.hpp"
#include "bspc/error.hpp"
#include "bspc/mc.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bspc;

namespace {

PhaseIReference fixed_reference(std::vector<double> beta_bar, const Eigen::MatrixXd& s_beta, std::size_t I = 30) {
    PhaseIReference ref;
    ref.shape = ArmaShape{beta_bar.size(), 0, false};
    for (std::size_t j = 0; j < beta_bar.size(); ++j) ref.indices.push_back(j);
    ref.full_beta_bar = beta_bar;
    ref.beta_bar = std::move(beta_bar);
    ref.s_beta = s_beta;
    ref.s_beta_inv = s_beta.inverse();
    ref.batch_count = I;
    ref.sigma2_pool = 1.0;
    return ref;
}

std::vector<std::vector<double>> random_estimates(std::size_t n, std::size_t p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::vector<std::vector<double>> out(n, std::vector<double>(p));
    for (auto& e : out)
        for (std::size_t j = 0; j < p; ++j) e[j] = z(rng) * double(j + 1) + (j == 0 ? e[0] * 0.0 : 0.3 * z(rng));
    return out;
}

ArmaSpec table1() {
    ArmaSpec s;
    s.phi0 = 1.0;
    s.phi = {0.2};
    s.theta = {0.5};
    return s;
}

}  // namespace

TEST_CASE("pooled reference from two fits is rank deficient") {
    const std::vector<std::vector<double>> two{{1, 0}, {3, 2}};
    const PooledMoments m = pooled_moments(two);
    CHECK(m.mean == std::vector<double>{2, 1});
    CHECK(m.cov(0, 0) == doctest::Approx(2));
    CHECK(m.cov(0, 1) == doctest::Approx(2));
    CHECK(m.cov(1, 0) == doctest::Approx(2));
    CHECK(m.cov(1, 1) == doctest::Approx(2));
    try {
        make_reference(ArmaShape{2, 0, false}, two, 1.0);
        FAIL("expected a degenerate reference");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateReference);
    }
}

TEST_CASE("identical fits give a degenerate reference") {
    CoefEstimate f;
    f.coef = {1.0, 0.2, 0.5};
    f.shape = ArmaShape{1, 1, true};
    f.sigma2_hat = 1.0;
    const std::vector<CoefEstimate> fits(10, f);
    try {
        estimate_reference(fits);
        FAIL("expected a degenerate reference");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateReference);
    }
}

TEST_CASE("reference errors") {
    std::vector<CoefEstimate> fits(8);
    const auto est = random_estimates(8, 3, 1);
    for (std::size_t i = 0; i < 8; ++i) {
        fits[i].coef = est[i];
        fits[i].shape = ArmaShape{1, 1, true};
    }
    fits[3].shape = ArmaShape{2, 0, true};
    try {
        estimate_reference(fits);
        FAIL("expected a shape mismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ShapeMismatch);
    }
    try {
        make_reference(ArmaShape{1, 1, true}, random_estimates(4, 3, 2), 1.0);
        FAIL("expected an insufficient reference");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InsufficientReference);
    }
}

TEST_CASE("reference moments follow the pooled formulas") {
    const auto est = random_estimates(25, 3, 9);
    const PhaseIReference ref = make_reference(ArmaShape{1, 1, true}, est, 2.0);
    for (std::size_t j = 0; j < 3; ++j) {
        long double m = 0;
        for (const auto& e : est) m += e[j];
        m /= 25;
        CHECK(std::abs(ref.beta_bar[j] - double(m)) < 1e-13);
        for (std::size_t k = 0; k < 3; ++k) {
            long double c = 0;
            long double mk = 0;
            for (const auto& e : est) mk += e[k];
            mk /= 25;
            for (const auto& e : est) c += (e[j] - m) * (e[k] - mk);
            CHECK(std::abs(ref.s_beta(j, k) - double(c / 24)) < 1e-12);
        }
    }
    CHECK((ref.s_beta_inv * ref.s_beta - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(ref.batch_count == 25);
    CHECK(ref.sigma2_pool == 2.0);
}

TEST_CASE("long-batch in-control reference converges to the true coefficients") {
    const ArmaSpec spec = table1();
    std::vector<CoefEstimate> fits;
    for (int i = 0; i < 20; ++i) fits.push_back(fit_ols(simulate(spec, 2000, 200, 300 + i), spec.shape()));
    const PhaseIReference ref = estimate_reference(fits);
    const auto beta = spec.beta();
    for (std::size_t j = 0; j < 3; ++j) {
        INFO("coefficient " << j << " mean " << ref.beta_bar[j]);
        CHECK(std::abs(ref.beta_bar[j] - beta[j]) < 0.05);
    }
}

TEST_CASE("T2 scores") {
    const PhaseIReference euclid = fixed_reference({0, 0}, Eigen::Matrix2d::Identity());
    CHECK(t2_score(euclid, std::vector<double>{3, 4}) == doctest::Approx(25.0));
    CHECK(t2_score(euclid, std::vector<double>{0, 0}) == 0.0);

    Eigen::Matrix2d s;
    s << 2, 1, 1, 2;
    const PhaseIReference general = fixed_reference({0, 0}, s);
    CHECK(t2_score(general, std::vector<double>{1, 1}) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(t2_score(general, std::vector<double>{1, 1, 1}), Error);
}

TEST_CASE("t scores") {
    Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
    s.diagonal() << 0.04, 0.01, 0.09;
    const PhaseIReference ref = fixed_reference({1, 0.2, 0.5}, s);
    const auto t = t_scores(ref, std::vector<double>{1.4, 0.2, 0.2});
    CHECK(t[0] == doctest::Approx(2.0));
    CHECK(t[1] == doctest::Approx(0.0));
    CHECK(t[2] == doctest::Approx(-1.0));
    for (double v : t_scores(ref, ref.beta_bar)) CHECK(v == 0.0);
}

TEST_CASE("chart limits") {
    const PhaseIReference ref30 = make_reference(ArmaShape{1, 1, true}, random_estimates(30, 3, 4), 1.0);
    const double f = oracle::f_quantile(3, 27, 0.99);
    CHECK(t2_limit(ref30, 0.01) == doctest::Approx(3.0 * 31 * 29 / (30.0 * 27) * f).epsilon(1e-10));
    CHECK(std::abs(t2_limit(ref30, 0.01) - 15.32) < 0.02);
    CHECK(std::abs(t_limit(ref30, 0.01) - 2.801) < 0.005);
    CHECK(t_limit(ref30, 0.01) == doctest::Approx(std::sqrt(31.0 / 30) * oracle::t_quantile(29, 0.995)).epsilon(1e-10));

    const PhaseIReference ref10 = make_reference(ArmaShape{0, 0, true}, random_estimates(10, 1, 5), 1.0);
    CHECK(std::abs(t_limit(ref10, 0.05) - 2.372) < 0.002);

    PhaseIReference big = ref10;
    big.batch_count = 1'000'000;
    CHECK(std::abs(t_limit(big, 0.01) - 2.5758) < 1e-3);

    for (std::size_t I : {5, 12, 30, 100}) {
        PhaseIReference one = ref10;
        one.batch_count = I;
        const double t = t_limit(one, 0.01);
        CHECK(t2_limit(one, 0.01) == doctest::Approx(t * t).epsilon(1e-8));
    }
    CHECK_THROWS_AS(t2_limit(ref30, 0.0), Error);
    CHECK(residual_limit(0.01) == doctest::Approx(2.5758293035489));
}

TEST_CASE("T2 equals the squared t score for one coefficient") {
    const PhaseIReference ref = make_reference(ArmaShape{0, 0, true}, random_estimates(20, 1, 6), 1.0);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> z;
    for (int k = 0; k < 200; ++k) {
        const std::vector<double> c{z(rng) * 3};
        const double t = t_scores(ref, c)[0];
        CHECK(std::abs(t2_score(ref, c) - t * t) < 1e-10 * std::max(1.0, t * t));
    }
}

TEST_CASE("T2 is nonnegative, zero only at the centre, and affine invariant") {
    const auto est = random_estimates(40, 3, 8);
    const PhaseIReference ref = make_reference(ArmaShape{1, 1, true}, est, 1.0);
    Eigen::Matrix3d a;
    a << 2.0, 0.3, -1.0, 0.0, 0.5, 0.2, 1.5, 0.0, 3.0;
    const Eigen::Vector3d shift(1.0, -2.0, 0.5);
    auto map = [&](const std::vector<double>& v) {
        const Eigen::Vector3d y = a * Eigen::Vector3d(v[0], v[1], v[2]) + shift;
        return std::vector<double>{y(0), y(1), y(2)};
    };
    std::vector<std::vector<double>> mapped;
    for (const auto& e : est) mapped.push_back(map(e));
    const PhaseIReference ref2 = make_reference(ArmaShape{1, 1, true}, mapped, 1.0);
    CHECK(t2_score(ref, ref.beta_bar) == doctest::Approx(0.0));
    std::mt19937_64 rng(10);
    std::normal_distribution<double> z;
    for (int k = 0; k < 200; ++k) {
        const std::vector<double> c{z(rng), z(rng), z(rng)};
        const double s1 = t2_score(ref, c);
        CHECK(s1 > 0.0);
        CHECK(std::abs(s1 - t2_score(ref2, map(c))) < 1e-8 * std::max(1.0, s1));
    }
}

TEST_CASE("subset projection") {
    const auto est = random_estimates(30, 3, 11);
    const PhaseIReference full = make_reference(ArmaShape{1, 1, true}, est, 1.0);
    const PhaseIReference sub = project(full, {0, 2}, "explicit");
    CHECK(sub.dim() == 2);
    CHECK(sub.coef_names() == std::vector<std::string>{"phi0", "theta1"});
    CHECK(sub.beta_bar[1] == full.beta_bar[2]);
    CHECK(sub.s_beta(0, 1) == doctest::Approx(full.s_beta(0, 2)));
    CHECK(sub.full_beta_bar == full.full_beta_bar);
    const std::vector<double> c{0.5, 9.0, -0.2};
    const std::vector<double> c_sub{0.5, -0.2};
    CHECK(t2_score(sub, c) == doctest::Approx(t2_score(sub, c_sub)));
    CHECK(t_scores(sub, c)[1] == doctest::Approx(t_scores(full, c)[2]));
}

TEST_CASE("residual mean score") {
    PhaseIReference ref = fixed_reference({0.0}, Eigen::Matrix<double, 1, 1>::Identity());
    ref.shape = ArmaShape{0, 0, true};
    const std::vector<double> tenth(100, 0.1);
    CHECK(residual_mean_score(tenth, ref) == doctest::Approx(1.0));
    const std::vector<double> zeros(50, 0.0);
    CHECK(residual_mean_score(zeros, ref) == 0.0);
    ref.sigma2_pool = 4.0;
    CHECK(residual_mean_score(tenth, ref) == doctest::Approx(0.5));
}

TEST_CASE("EWMA recursion and limits") {
    const std::vector<double> ones(6, 1.0);
    const auto z = ewma_sequence(ones, 0.2, 0.01);
    CHECK(z[0].value == doctest::Approx(0.2));
    CHECK(z[1].value == doctest::Approx(0.36));
    CHECK(z[2].value == doctest::Approx(0.488));
    const double L = residual_limit(0.01);
    CHECK(z[0].limit == doctest::Approx(L * 0.2));
    CHECK(z[5].limit == doctest::Approx(L * std::sqrt(0.2 * (1 - std::pow(0.8, 12)) / 1.8)));

    const std::vector<double> s{0.3, -2.0, 4.1};
    const auto plain = ewma_sequence(s, 1.0, 0.05);
    for (std::size_t j = 0; j < s.size(); ++j) {
        CHECK(plain[j].value == s[j]);
        CHECK(plain[j].limit == doctest::Approx(residual_limit(0.05)));
    }
    CHECK_THROWS_AS(ewma_sequence(s, 0.0, 0.01), Error);
    CHECK_THROWS_AS(ewma_sequence(s, 1.5, 0.01), Error);
}

TEST_CASE("EWMA signal rate on standardized in-control scores") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> z;
    std::size_t signals = 0, points = 0;
    for (int k = 0; k < 4000; ++k) {
        std::vector<double> s(50);
        for (auto& v : s) v = z(rng);
        for (const auto& p : ewma_sequence(s, 0.2, 0.01)) {
            signals += std::abs(p.value) > p.limit;
            ++points;
        }
    }
    CHECK(std::abs(double(signals) / double(points) - 0.01) < 0.0015);
}

TEST_CASE("monitor_batch flags agree with the limits") {
    const ArmaSpec spec = table1();
    std::vector<CoefEstimate> fits;
    for (int i = 0; i < 30; ++i) fits.push_back(fit_ols(simulate(spec, 200, 200, 500 + i), spec.shape()));
    const PhaseIReference ref = estimate_reference(fits);
    ArmaSpec shifted = spec;
    shifted.phi = {0.6};
    BatchSet set;
    for (int i = 0; i < 20; ++i) {
        BatchSeries b = simulate(i < 10 ? spec : shifted, 200, 200, 900 + i);
        b.batch_id = "n" + std::to_string(i);
        set.batches.push_back(b);
    }
    set.batches.push_back({"short", std::vector<double>(12, 1.0), ""});
    const ChartReport serial = monitor_batches(ref, set, 0.01, 0.2, Execution::Serial);
    const ChartReport parallel = monitor_batches(ref, set, 0.01, 0.2, Execution::Parallel);
    REQUIRE(serial.records.size() == 21);
    CHECK(serial.coef_names == std::vector<std::string>{"phi0", "phi1", "theta1"});
    for (std::size_t i = 0; i < 21; ++i) {
        const ChartRecord& r = serial.records[i];
        CHECK(r.t2_score == parallel.records[i].t2_score);
        CHECK(r.ewma_score == parallel.records[i].ewma_score);
        if (!r.monitorable) continue;
        CHECK(r.signals.t2 == (r.t2_score > r.t2_limit));
        for (std::size_t j = 0; j < 3; ++j) CHECK(r.signals.t[j] == (std::abs(r.t_scores[j]) > r.t_limit));
        CHECK(r.signals.residual == (std::abs(r.resid_mean_score) > r.resid_limit));
        CHECK(r.signals.ewma == (std::abs(r.ewma_score) > r.ewma_limit));
    }
    CHECK_FALSE(serial.records[20].monitorable);
    CHECK_FALSE(serial.records[20].failure.empty());
    std::size_t shifted_hits = 0;
    for (std::size_t i = 10; i < 20; ++i) shifted_hits += serial.records[i].signals.t2;
    CHECK(shifted_hits >= 8);
}

TEST_CASE("monitor_batch rejects a batch of another shape only through the reference") {
    const PhaseIReference ref = make_reference(ArmaShape{1, 1, true}, random_estimates(30, 3, 13), 1.0);
    const ChartRecord r = monitor_batch(ref, simulate(table1(), 200, 200, 1), 0.01);
    CHECK(r.monitorable);
    CHECK(r.t_scores.size() == 3);
}

TEST_CASE("false-alarm rates of the T2 and residual charts") {
    const NullScores null = null_scores(table1(), 100, 500, 200, 500, 0.01, 77);
    REQUIRE(null.t2.size() == 100'000);
    double exceed = 0;
    for (double e : null.exceed_t2) exceed += e;
    const double rate = exceed / double(null.exceed_t2.size());
    INFO("T2 false-alarm rate " << rate);
    CHECK(std::abs(rate - 0.01) < 0.005);
}

TEST_CASE("residual chart false-alarm rate") {
    const ArmaSpec spec = table1();
    std::size_t hits = 0, total = 0;
    for (int k = 0; k < 100; ++k) {
        std::vector<CoefEstimate> fits;
        for (int i = 0; i < 100; ++i) fits.push_back(fit_ols(simulate(spec, 500, 200, splitmix64(k * 1000 + i)), spec.shape()));
        const PhaseIReference ref = estimate_reference(fits);
        for (int j = 0; j < 1000; ++j) {
            const BatchSeries b = simulate(spec, 500, 200, splitmix64(0xabcdefULL + k * 100000 + j));
            hits += std::abs(residual_mean_score(b.values, ref)) > residual_limit(0.01);
            ++total;
        }
    }
    const double rate = double(hits) / double(total);
    INFO("residual-chart false-alarm rate " << rate);
    CHECK(std::abs(rate - 0.01) < 0.005);
}

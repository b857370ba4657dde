#include "bspc/mc.hpp"

#include "bspc/error.hpp"
#include "bspc/parallel.hpp"

#include <bit>
#include <cmath>
#include <optional>

namespace bspc {

DisturbedParam DisturbedParam::parse(const std::string& name) {
    DisturbedParam d;
    auto lag_of = [&](std::size_t prefix) {
        const std::string digits = name.substr(prefix);
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
            throw Error(ErrorKind::Config, "bad disturbed parameter '" + name + "'");
        return static_cast<std::size_t>(std::stoul(digits));
    };
    if (name == "phi0") {
        d.kind = Kind::Phi0;
        d.lag = 0;
    } else if (name.rfind("phi", 0) == 0) {
        d.kind = Kind::Phi;
        d.lag = lag_of(3);
    } else if (name.rfind("theta", 0) == 0) {
        d.kind = Kind::Theta;
        d.lag = lag_of(5);
    } else {
        throw Error(ErrorKind::Config, "bad disturbed parameter '" + name + "'");
    }
    if (d.kind != Kind::Phi0 && d.lag == 0) throw Error(ErrorKind::Config, "bad disturbed parameter '" + name + "'");
    return d;
}

std::string DisturbedParam::name() const {
    switch (kind) {
        case Kind::Phi0: return "phi0";
        case Kind::Phi: return "phi" + std::to_string(lag);
        case Kind::Theta: return "theta" + std::to_string(lag);
    }
    return {};
}

ArmaSpec DisturbedParam::apply(const ArmaSpec& spec, double value) const {
    ArmaSpec out = spec;
    switch (kind) {
        case Kind::Phi0:
            if (!spec.intercept) throw Error(ErrorKind::Config, "model has no intercept to disturb");
            out.phi0 = value;
            break;
        case Kind::Phi:
            if (lag > spec.phi.size()) throw Error(ErrorKind::Config, "disturbed " + name() + " exceeds the AR order");
            out.phi[lag - 1] = value;
            break;
        case Kind::Theta:
            if (lag > spec.theta.size()) throw Error(ErrorKind::Config, "disturbed " + name() + " exceeds the MA order");
            out.theta[lag - 1] = value;
            break;
    }
    return out;
}

double DisturbedParam::current(const ArmaSpec& spec) const {
    switch (kind) {
        case Kind::Phi0: return spec.phi0;
        case Kind::Phi: return spec.phi.at(lag - 1);
        case Kind::Theta: return spec.theta.at(lag - 1);
    }
    return 0.0;
}

void ScenarioSpec::validate() const {
    in_control.validate();
    if (!in_control.causal() || !in_control.invertible())
        throw Error(ErrorKind::ModelInvalid, "in-control model must be causal and invertible");
    (void)disturbed.apply(in_control, disturbed.current(in_control));
    if (levels.empty() || I_grid.empty() || T_grid.empty()) throw Error(ErrorKind::Config, "scenario grids must be nonempty");
    if (phase2_batches == 0 || replications == 0) throw Error(ErrorKind::Config, "phase2_batches and replications must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::Config, "alpha must lie in (0,1)");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw Error(ErrorKind::Config, "EWMA lambda must lie in (0,1]");
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t cell_seed(std::uint64_t base, double level, std::size_t I, std::size_t T) noexcept {
    std::uint64_t h = splitmix64(base);
    h = splitmix64(h ^ std::bit_cast<std::uint64_t>(level));
    h = splitmix64(h ^ static_cast<std::uint64_t>(I));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(T) << 32));
    return h;
}

std::size_t RunSummary::censored_total() const {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.t2.censored + c.residual.censored + c.ewma.censored;
    return n;
}

namespace {

// Draws batches from consecutive seeds of one stream, re-simulating on fit failure.
class BatchSource {
public:
    BatchSource(std::uint64_t stream, std::size_t length, std::size_t burn_in)
        : stream_(stream), length_(length), burn_in_(burn_in) {}

    BatchSeries draw(const ArmaSpec& spec) { return simulate(spec, length_, burn_in_, splitmix64(stream_ + counter_++)); }

    // Returns nullopt after kMaxRetries + 1 failed attempts.
    std::optional<std::pair<BatchSeries, CoefEstimate>> draw_fitted(const ArmaSpec& spec, std::size_t& failures) {
        for (std::size_t attempt = 0; attempt <= kMaxRetries; ++attempt) {
            BatchSeries s = draw(spec);
            try {
                CoefEstimate f = fit_ols(s, spec.shape());
                return std::make_pair(std::move(s), std::move(f));
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::SingularFit && e.kind() != ErrorKind::InsufficientData) throw;
                ++failures;
            }
        }
        return std::nullopt;
    }

private:
    std::uint64_t stream_;
    std::size_t length_;
    std::size_t burn_in_;
    std::uint64_t counter_ = 0;
};

std::optional<PhaseIReference> build_reference(BatchSource& source, const ArmaSpec& spec, std::size_t I,
                                               std::size_t& failures) {
    std::vector<CoefEstimate> fits;
    fits.reserve(I);
    for (std::size_t i = 0; i < I; ++i) {
        auto drawn = source.draw_fitted(spec, failures);
        if (!drawn) return std::nullopt;
        fits.push_back(std::move(drawn->second));
    }
    try {
        return estimate_reference(fits);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateReference && e.kind() != ErrorKind::InsufficientReference) throw;
        return std::nullopt;
    }
}

ArlStat aggregate(const std::vector<ReplicationResult>& reps, double ReplicationResult::*arl,
                  bool ReplicationResult::*censored) {
    ArlStat s;
    std::size_t n = 0;
    double sum = 0.0;
    for (const auto& r : reps) {
        if (r.dropped) continue;
        ++n;
        sum += r.*arl;
        if (r.*censored) ++s.censored;
    }
    if (n == 0) return s;
    s.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& r : reps)
        if (!r.dropped) ss += (r.*arl - s.mean) * (r.*arl - s.mean);
    s.std = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    return s;
}

}  // namespace

ReplicationResult run_replication(const ScenarioSpec& scenario, const ArmaSpec& disturbed, std::size_t I,
                                  std::size_t T, std::uint64_t rep_seed) {
    ReplicationResult out;
    BatchSource source(rep_seed, T, scenario.burn_in);
    auto ref = build_reference(source, scenario.in_control, I, out.failed_fits);
    if (!ref) {
        out.dropped = true;
        return out;
    }
    const double limit_t2 = t2_limit(*ref, scenario.alpha);
    const double limit_res = residual_limit(scenario.alpha);

    const std::size_t n = scenario.phase2_batches;
    std::size_t hits_t2 = 0, hits_res = 0, hits_ewma = 0;
    std::vector<double> res_scores;
    res_scores.reserve(n);
    for (std::size_t b = 0; b < n; ++b) {
        auto drawn = source.draw_fitted(disturbed, out.failed_fits);
        if (!drawn) {
            out.dropped = true;
            return out;
        }
        if (t2_score(*ref, drawn->second.coef) > limit_t2) ++hits_t2;
        const double score = residual_mean_score(drawn->first.values, *ref);
        if (std::fabs(score) > limit_res) ++hits_res;
        res_scores.push_back(score);
    }
    for (const auto& pt : ewma_sequence(res_scores, scenario.lambda, scenario.alpha))
        if (std::fabs(pt.value) > pt.limit) ++hits_ewma;

    auto arl = [n](std::size_t hits, bool& censored) {
        censored = hits == 0;
        return censored ? static_cast<double>(n + 1) : static_cast<double>(n) / static_cast<double>(hits);
    };
    out.arl_t2 = arl(hits_t2, out.censored_t2);
    out.arl_residual = arl(hits_res, out.censored_residual);
    out.arl_ewma = arl(hits_ewma, out.censored_ewma);
    return out;
}

CellRecord run_cell(const ScenarioSpec& scenario, double level, std::size_t I, std::size_t T, Execution exec) {
    CellRecord cell;
    cell.level = level;
    cell.I = I;
    cell.T = T;
    const ArmaSpec disturbed = scenario.disturbed.apply(scenario.in_control, level);
    if (!disturbed.causal() || !disturbed.invertible()) {
        cell.valid = false;
        cell.invalid_reason = "disturbed model is not causal and invertible";
        return cell;
    }
    const std::uint64_t base = cell_seed(scenario.seed, level, I, T);
    std::vector<ReplicationResult> reps(scenario.replications);
    parallel_for(reps.size(), exec, [&](std::size_t r) {
        reps[r] = run_replication(scenario, disturbed, I, T, base + r * kReplicationStride);
    });
    for (const auto& r : reps) {
        cell.failed_fits += r.failed_fits;
        if (r.dropped)
            ++cell.dropped_replications;
        else
            ++cell.replications_used;
    }
    cell.t2 = aggregate(reps, &ReplicationResult::arl_t2, &ReplicationResult::censored_t2);
    cell.residual = aggregate(reps, &ReplicationResult::arl_residual, &ReplicationResult::censored_residual);
    cell.ewma = aggregate(reps, &ReplicationResult::arl_ewma, &ReplicationResult::censored_ewma);
    return cell;
}

RunSummary run_study(const ScenarioSpec& scenario, Execution exec) {
    scenario.validate();
    RunSummary summary;
    summary.scenario = scenario;
    for (double level : scenario.levels)
        for (std::size_t I : scenario.I_grid)
            for (std::size_t T : scenario.T_grid) summary.cells.push_back(run_cell(scenario, level, I, T, exec));
    return summary;
}

ChartReport diagnose_sequence(const ArmaSpec& in_control, const ArmaSpec& disturbed, std::size_t I, std::size_t T,
                              std::size_t n_new, double alpha, std::uint64_t seed, double lambda) {
    if (!(disturbed.shape() == in_control.shape()))
        throw Error(ErrorKind::ShapeMismatch, "disturbed model must share the in-control orders");
    BatchSource source(seed, T, kDefaultBurnIn);
    std::size_t failures = 0;
    BatchSet all;
    std::vector<CoefEstimate> fits;
    for (std::size_t i = 0; i < I; ++i) {
        auto drawn = source.draw_fitted(in_control, failures);
        if (!drawn) throw Error(ErrorKind::SingularFit, "could not fit a reference batch");
        drawn->first.batch_id = "ref-" + std::to_string(i + 1);
        all.batches.push_back(std::move(drawn->first));
        fits.push_back(std::move(drawn->second));
    }
    const PhaseIReference ref = estimate_reference(fits);
    for (std::size_t i = 0; i < n_new; ++i) {
        BatchSeries s = source.draw(disturbed);
        s.batch_id = "new-" + std::to_string(i + 1);
        all.batches.push_back(std::move(s));
    }
    ChartReport report = monitor_batches(ref, all, alpha, lambda, Execution::Serial);
    report.reference_batches = I;
    return report;
}

NullScores null_scores(const ArmaSpec& spec, std::size_t I, std::size_t T, std::size_t references,
                       std::size_t per_reference, double alpha, std::uint64_t seed, Execution exec) {
    NullScores out;
    out.p = spec.shape().dim();
    out.I = I;
    std::vector<std::vector<double>> t2(references);
    std::vector<std::vector<std::vector<double>>> t(references);
    std::vector<std::vector<double>> exceed(references);
    parallel_for(references, exec, [&](std::size_t r) {
        BatchSource source(splitmix64(seed) + r * kReplicationStride, T, kDefaultBurnIn);
        std::size_t failures = 0;
        auto ref = build_reference(source, spec, I, failures);
        if (!ref) return;
        const double limit = t2_limit(*ref, alpha);
        t[r].assign(out.p, {});
        for (std::size_t b = 0; b < per_reference; ++b) {
            auto drawn = source.draw_fitted(spec, failures);
            if (!drawn) continue;
            const double score = t2_score(*ref, drawn->second.coef);
            t2[r].push_back(score);
            exceed[r].push_back(score > limit ? 1.0 : 0.0);
            const auto ts = t_scores(*ref, drawn->second.coef);
            for (std::size_t j = 0; j < out.p; ++j) t[r][j].push_back(ts[j]);
        }
    });
    out.t.assign(out.p, {});
    for (std::size_t r = 0; r < references; ++r) {
        out.t2.insert(out.t2.end(), t2[r].begin(), t2[r].end());
        out.exceed_t2.insert(out.exceed_t2.end(), exceed[r].begin(), exceed[r].end());
        for (std::size_t j = 0; j < out.p && !t[r].empty(); ++j)
            out.t[j].insert(out.t[j].end(), t[r][j].begin(), t[r][j].end());
    }
    return out;
}

}  // namespace bspc

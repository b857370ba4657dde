#pragma once

#include "bspc/arma.hpp"
#include "bspc/charts.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace bspc {

/// Which coefficient a scenario perturbs: phi0, phi<j> or theta<k>.
struct DisturbedParam {
    enum class Kind { Phi0, Phi, Theta };
    Kind kind = Kind::Phi;
    std::size_t lag = 1;

    static DisturbedParam parse(const std::string& name);
    std::string name() const;
    /// Copy of spec with this coefficient replaced by value.
    ArmaSpec apply(const ArmaSpec& spec, double value) const;
    double current(const ArmaSpec& spec) const;
};

struct ScenarioSpec {
    ArmaSpec in_control;
    DisturbedParam disturbed;
    std::vector<double> levels;
    std::vector<std::size_t> I_grid;
    std::vector<std::size_t> T_grid;
    std::size_t phase2_batches = 500;
    std::size_t replications = 1000;
    double alpha = 0.01;
    double lambda = kDefaultEwmaLambda;
    std::size_t burn_in = kDefaultBurnIn;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Seeds of consecutive replications of a cell are this far apart; each
/// replication draws its batch seeds from [rep_seed, rep_seed + stride).
constexpr std::uint64_t kReplicationStride = std::uint64_t{1} << 24;
constexpr std::size_t kMaxRetries = 5;

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t cell_seed(std::uint64_t base, double level, std::size_t I, std::size_t T) noexcept;

struct ArlStat {
    double mean = 0.0;
    double std = 0.0;
    std::size_t censored = 0; ///< replications with no signal, recorded as phase2_batches + 1
};

struct ReplicationResult {
    bool dropped = false;
    std::size_t failed_fits = 0;
    double arl_t2 = 0.0;
    double arl_residual = 0.0;
    double arl_ewma = 0.0;
    bool censored_t2 = false;
    bool censored_residual = false;
    bool censored_ewma = false;
};

struct CellRecord {
    double level = 0.0;
    std::size_t I = 0;
    std::size_t T = 0;
    bool valid = true;
    std::string invalid_reason;
    ArlStat t2;
    ArlStat residual;
    ArlStat ewma;
    std::size_t replications_used = 0;
    std::size_t dropped_replications = 0;
    std::size_t failed_fits = 0;
};

struct RunSummary {
    ScenarioSpec scenario;
    std::vector<CellRecord> cells;

    std::size_t censored_total() const;
};

/// One Phase I reference plus phase2_batches monitored batches from `disturbed`.
ReplicationResult run_replication(const ScenarioSpec& scenario, const ArmaSpec& disturbed, std::size_t I,
                                  std::size_t T, std::uint64_t rep_seed);

/// Aggregates ARL = 1/r over replications. Parallel and serial execution give identical records.
CellRecord run_cell(const ScenarioSpec& scenario, double level, std::size_t I, std::size_t T,
                    Execution exec = Execution::Parallel);

/// Every (level, I, T) cell in that nesting order.
RunSummary run_study(const ScenarioSpec& scenario, Execution exec = Execution::Parallel);

/// Reference from I in-control batches, then a report over those batches followed by n_new disturbed ones.
ChartReport diagnose_sequence(const ArmaSpec& in_control, const ArmaSpec& disturbed, std::size_t I, std::size_t T,
                              std::size_t n_new, double alpha, std::uint64_t seed,
                              double lambda = kDefaultEwmaLambda);

/// Held-out in-control scores for distribution-law calibration: `references` independent
/// Phase I references, each scoring `per_reference` fresh batches.
struct NullScores {
    std::vector<double> t2;
    std::vector<std::vector<double>> t;        ///< [coefficient][score]
    std::vector<double> exceed_t2;             ///< per-score indicator against t2_limit(alpha)
    std::size_t p = 0;
    std::size_t I = 0;
};

NullScores null_scores(const ArmaSpec& spec, std::size_t I, std::size_t T, std::size_t references,
                       std::size_t per_reference, double alpha, std::uint64_t seed,
                       Execution exec = Execution::Parallel);

}  // namespace bspc

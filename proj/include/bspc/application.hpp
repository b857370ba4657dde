#pragma once

#include "bspc/arma.hpp"
#include "bspc/charts.hpp"
#include "bspc/diagnostics.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace bspc {

/// Which coefficients the T2 chart monitors.
struct SubsetRule {
    enum class Kind { All, Screened, Explicit };
    Kind kind = Kind::All;
    std::vector<std::size_t> indices; ///< for Explicit

    /// "all", "screened", or a comma list of coefficient names ("phi1,phi2") for `shape`.
    static SubsetRule parse(const std::string& text, const ArmaShape& shape);
    std::string describe(const ArmaShape& shape) const;
};

/// Resolves the monitored indices; Screened uses `screening.retained`.
std::vector<std::size_t> resolve_subset(const SubsetRule& rule, const ArmaShape& shape, const ScreeningResult& screening);

struct ApplicationConfig {
    ArmaShape shape{12, 0, true};
    std::string reference_label = "1";
    SubsetRule subset{SubsetRule::Kind::Screened, {}};
    double screen_level = 0.05;
    double screen_threshold = 0.95;
    std::vector<std::size_t> sizes{10, 30, 100, 200, 300, 500};
    std::vector<double> alphas{0.10, 0.05, 0.01};
    std::size_t replications = 200;
    std::uint64_t seed = 1;
};

struct RateStat {
    double mean = 0.0;
    double std = 0.0;
};

struct ApplicationCell {
    std::size_t I = 0;
    double alpha = 0.0;
    RateStat r0;
    RateStat r1;
    std::size_t replications_used = 0;
};

struct ApplicationResult {
    std::size_t reference_batches = 0;
    std::size_t other_batches = 0;
    std::size_t failed_fits = 0;
    ResidualAdequacy adequacy;
    ScreeningResult screening;
    std::vector<std::size_t> monitored;
    std::vector<std::string> monitored_names;
    std::vector<std::size_t> skipped_sizes; ///< sizes too small for the subset or not below the reference count
    std::vector<ApplicationCell> cells;     ///< sizes x alphas, sizes outer
};

/// Fit every batch, check residual adequacy, screen coefficients, then for each
/// reference size draw random in-control references and measure r0 on the
/// remaining in-control batches and r1 on every other batch.
ApplicationResult run_application(const BatchSet& data, const ApplicationConfig& cfg,
                                  Execution exec = Execution::Parallel);

/// Random subset of `count` distinct indices from [0, n), deterministic in seed.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, std::uint64_t seed);

}  // namespace bspc

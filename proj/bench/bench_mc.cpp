#include "bspc/mc.hpp"
#include "bspc/parallel.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <omp.h>

using namespace bspc;

namespace {

double seconds_for(const ScenarioSpec& s, Execution exec, CellRecord& out) {
    const auto start = std::chrono::steady_clock::now();
    out = run_cell(s, 0.6, s.I_grid[0], s.T_grid[0], exec);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool same(const ArlStat& a, const ArlStat& b) { return a.mean == b.mean && a.std == b.std && a.censored == b.censored; }

}  // namespace

int main(int argc, char** argv) {
    ScenarioSpec s;
    s.in_control.phi0 = 1.0;
    s.in_control.phi = {0.2};
    s.in_control.theta = {0.5};
    s.disturbed = DisturbedParam::parse("phi1");
    s.levels = {0.6};
    s.I_grid = {30};
    s.T_grid = {200};
    s.phase2_batches = 100;
    s.replications = argc > 1 ? static_cast<std::size_t>(std::atoi(argv[1])) : 40;

    CellRecord serial, parallel;
    const double ts = seconds_for(s, Execution::Serial, serial);
    const double tp = seconds_for(s, Execution::Parallel, parallel);
    const bool identical = same(serial.t2, parallel.t2) && same(serial.residual, parallel.residual) &&
                           same(serial.ewma, parallel.ewma) && serial.failed_fits == parallel.failed_fits;

    std::printf("cell phi1=0.6 I=30 T=200, %zu replications x %zu batches\n", s.replications, s.phase2_batches);
    std::printf("threads   %d\n", omp_get_max_threads());
    std::printf("serial    %.3f s\n", ts);
    std::printf("parallel  %.3f s  (speedup %.2fx)\n", tp, ts / tp);
    std::printf("results   %s\n", identical ? "identical" : "DIFFER");
    return identical ? 0 : 1;
}

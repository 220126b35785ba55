#pragma once

#include <cstdint>
#include <vector>

#include "relayim/metrics.hpp"
#include "relayim/relaying.hpp"

namespace relayim {

// One experiment family: a fixed scenario swept over transmit power.
// pt_grid_db entries are 10 log10(Pt / sigma^2); config.transmit_power is
// overwritten at each grid point.
struct SweepSpec {
    ScenarioConfig config;
    std::vector<double> pt_grid_db;
    std::uint64_t trials_per_point = 1;
    std::uint64_t master_seed = 1;
};

struct SweepResult {
    std::vector<double> pt_grid_db;
    std::vector<MetricSummary> points;  // aligned with pt_grid_db
};

// Runs trials_per_point independent trials at every grid point. Trial (i, j)
// draws from a stream derived from (master_seed, i, j), so the result is
// bit-identical for any worker_count and any scheduling.
SweepResult run_sweep(const SweepSpec& spec, int worker_count);

// Least-squares slope of -log10(BLER) against Pt_dB / 10 over the grid points
// inside [low_db, high_db]. Zero-BLER points are excluded with a warning to
// stderr; fewer than two usable points is an error.
double estimate_diversity_order(const SweepResult& result, double low_db, double high_db);

}  // namespace relayim

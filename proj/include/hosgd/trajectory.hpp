#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "hosgd/vec.hpp"

namespace hosgd {

/// State snapshot at iteration t. loss and grad_norm_sq are exact
/// full-dataset quantities at x^t; the cumulative counters cover
/// iterations 0..t-1, so the t = N record carries no message increment.
struct TrajectoryRecord {
    long t = 0;
    double loss = 0.0;
    double grad_norm_sq = 0.0;
    std::uint64_t scalars_sent_cum = 0;
    std::uint64_t fevals_cum = 0;
    std::uint64_t gevals_cum = 0;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    ModelVector final_x;
    long iterations_run = 0;
    bool diverged = false;
    std::string error;
    std::vector<std::string> warnings;
};

/// CSV with header iter,loss,grad_norm_sq,scalars_sent_cum,fevals_cum,
/// gevals_cum; floats printed with 17 significant digits.
void write_csv(const Trajectory& traj, std::ostream& out);
std::string to_csv(const Trajectory& traj);

}  // namespace hosgd

#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "cli/spec_file.hpp"
#include "hosgd/objective.hpp"
#include "hosgd/runner.hpp"

namespace hosgd::cli {

/// Objective instance plus the constants the analysis needs (L from the
/// objective, sigma estimated at the origin, f* from the objective).
struct PreparedObjective {
    std::shared_ptr<Objective> objective;
    AssumptionConstants constants;
    nlohmann::json description;  // enough to rebuild it
};

PreparedObjective prepare_objective(const ObjectiveParams& params);
PreparedObjective objective_from_json(const nlohmann::json& description);

/// x0 for one (run, seed). "zeros" or "gaussian" (standard normal drawn
/// from the master seed's init stream).
ModelVector resolve_x0(const std::string& mode, std::size_t d, std::uint64_t master_seed);

RunConfig build_config(const RunSpec& run, std::uint64_t master_seed,
                       const ModelVector& x0);

/// The JSON manifest for one run: every RunConfig field (per seed, with the
/// resolved x0), the constants, and the CSV file names. The manifest alone
/// reproduces the CSVs byte for byte.
nlohmann::json make_manifest(const RunSpec& run, const PreparedObjective& prepared,
                             const std::vector<std::uint64_t>& seeds, long record_stride);

/// Re-executes one seed entry of a manifest; returns the trajectory whose
/// CSV must match the original file byte for byte.
Trajectory run_from_manifest(const nlohmann::json& manifest, std::size_t seed_index);

int cmd_run(const std::string& spec_path, const std::string& out_override, int jobs);
int cmd_bound(const std::string& config_path);

}  // namespace hosgd::cli

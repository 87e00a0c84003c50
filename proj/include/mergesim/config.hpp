#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mergesim/dynamics.hpp"
#include "mergesim/policy.hpp"
#include "mergesim/reward.hpp"
#include "mergesim/road.hpp"
#include "mergesim/shield_types.hpp"
#include "mergesim/world.hpp"

namespace mergesim {

/// Everything that determines an episode apart from its seed and policy.
struct SimConfig {
    ScenarioConfig scenario;
    RoadNetwork road;
    ShieldConfig shield;
    VehicleParams vehicle;
    TrackingConfig tracking;
    RewardWeights reward;
    RewardFunction reward_fn = RewardFunction::custom;

    /// Throws ConfigError naming the first violated invariant.
    void validate() const;
};

struct RunConfig {
    SimConfig sim;
    PolicySpec policy;
    int episodes = 1;
    std::uint64_t seed = 42;  // seed of the first episode; episode k uses seed + k
    std::string output_dir = "out";
    bool emit_trajectories = false;
    int jobs = 1;
};

/// Reference range of the fleet size for the merging scenario.
inline constexpr int kMinReferenceVehicles = 7;
inline constexpr int kMaxReferenceVehicles = 11;

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

/// Parses a YAML run configuration. Unknown keys and malformed values
/// raise ConfigError with the source name and line. Invariants are not
/// checked here; see validate_run_config.
RunConfig parse_run_config(const std::string& yaml_text, const std::string& source = "<config>");

/// Reads and parses a YAML file; throws ConfigError if it cannot be read.
RunConfig load_run_config(const std::string& path);

/// Invariant check with human-readable errors and warnings (a fleet size
/// outside the reference range is a warning).
ValidationReport validate_run_config(const RunConfig& config);

nlohmann::ordered_json to_json(const SimConfig& config);
SimConfig sim_config_from_json(const nlohmann::json& j);

}  // namespace mergesim

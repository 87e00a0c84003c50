#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mergesim/config.hpp"
#include "mergesim/shield_types.hpp"
#include "mergesim/simulation.hpp"

namespace mergesim {

inline constexpr const char* kRecordSchema = "mergesim.record/1";

/// State of one vehicle in a recorded snapshot.
struct VehicleSnapshot {
    int id = -1;
    VehicleState state;
    Lane lane = Lane::highway;
    Lane target_lane = Lane::highway;
    bool changing = false;
    bool crashed = false;
    bool merged = false;
    bool failed_merge = false;
    bool exited = false;

    bool active() const { return !failed_merge && !exited; }
};

/// Static per-vehicle data written once in the header.
struct VehicleInfo {
    int id = -1;
    Lane origin = Lane::highway;
    double length = 0.0;
    double width = 0.0;
};

struct StepRecord {
    int step = 0;
    std::vector<VehicleSnapshot> vehicles;  // after the step, by ascending id
    std::vector<std::pair<int, BehaviorAction>> actions;
    std::vector<ShieldOutcome> outcomes;
    std::vector<std::pair<int, double>> rewards;
    InteractionTopology topology;
};

struct EpisodeSummary {
    std::uint64_t seed = 0;
    std::string shield = "none";
    std::string policy = "random";
    std::string reward = "custom";
    int steps = 0;
    int n_vehicles = 0;
    int ramp_spawned = 0;
    int merged = 0;
    std::optional<double> merging_pct;  // absent without ramp spawns
    double min_headway = 0.0;           // +inf when no vehicle ever followed another
    double avg_speed = 0.0;
    int collisions = 0;                 // vehicles that crashed
    int shield_faults = 0;
    int protocol_warnings = 0;
    double mean_reward = 0.0;
};

struct EpisodeRecord {
    std::string schema = kRecordSchema;
    std::uint64_t seed = 0;
    std::string policy = "random";
    SimConfig config;
    std::vector<VehicleInfo> vehicles;
    std::vector<VehicleSnapshot> initial;
    std::vector<StepRecord> steps;
    std::optional<EpisodeSummary> summary;

    const VehicleInfo* info(int id) const;
};

VehicleSnapshot snapshot(const Vehicle& v);
std::vector<VehicleSnapshot> snapshot(const World& world);

/// Step entry built from a world right after step_world.
StepRecord make_step_record(const World& world, const StepReport& report,
                            std::vector<std::pair<int, double>> rewards);

nlohmann::ordered_json to_json(const EpisodeSummary& s);
EpisodeSummary summary_from_json(const nlohmann::json& j);

/// Line-delimited record: header, one line per step, summary line.
void write_record(std::ostream& out, const EpisodeRecord& record);

/// Parses a record written by write_record; throws ConfigError on
/// malformed input or an unknown schema.
EpisodeRecord read_record(std::istream& in);

}  // namespace mergesim

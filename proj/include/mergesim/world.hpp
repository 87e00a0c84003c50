#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "mergesim/action.hpp"
#include "mergesim/road.hpp"
#include "mergesim/shield_types.hpp"
#include "mergesim/vehicle.hpp"

namespace mergesim {

struct ScenarioConfig {
    int n_vehicles = 9;
    double comm_range = 180.0;   // m
    int perception_n = 5;        // observed vehicles per observation
    double tau = 0.5;            // s
    double dt = 0.1;             // s
    int episode_steps = 300;
    double spawn_spacing_min = 5.0;  // m, bumper gap
    std::pair<double, double> initial_speed_range{20.0, 25.0};
    std::uint64_t rng_seed = 42;
    double ramp_share = 0.4;         // fraction of vehicles spawned on the ramp
    double spawn_jitter = 4.0;       // m, extra random spacing per vehicle
    double highway_spawn_end = 200.0;
    double ramp_spawn_end = 150.0;
    double speed_step = 2.0;         // m/s change requested by speed_up / slow_down

    int ramp_count() const;
    void validate() const;
};

struct TrackingConfig {
    double k_speed = 0.0;         // 1/s; 0 selects 1/dt (one-step tracking)
    double tau_lateral = 0.6;     // s
    double tau_heading = 0.2;     // s
    double lane_done_fraction = 0.1;
};

/// Complete simulation state. Vehicles keep their insertion order; every
/// query and the step pipeline are independent of that order.
struct World {
    ScenarioConfig scenario;
    RoadNetwork road;
    ShieldConfig shield;
    TrackingConfig tracking;
    VehicleParams vehicle_params;
    std::vector<Vehicle> vehicles;
    int step = 0;

    const Vehicle* find(int id) const;
    Vehicle* find(int id);
    std::vector<const Vehicle*> active() const;
};

/// Builds a world with shield and vehicle parameters made consistent with
/// the scenario (shared tau and dt).
World make_world(const ScenarioConfig& scenario, const RoadNetwork& road, ShieldConfig shield,
                 const VehicleParams& params, const TrackingConfig& tracking = {});

/// Places the scenario's vehicles. Throws ConfigError when the spawn
/// region cannot hold the requested vehicles.
std::vector<Vehicle> spawn(const ScenarioConfig& config, const RoadNetwork& road,
                           const VehicleParams& params, std::mt19937_64& rng);

struct Neighbors {
    const Vehicle* leader = nullptr;            // nearest ahead in ego's lane
    const Vehicle* adjacent_leader = nullptr;   // nearest ahead in the adjacent lane
    const Vehicle* adjacent_rear = nullptr;     // nearest behind in the adjacent lane
    Lane adjacent_lane = Lane::ramp;
};

/// Lane used for adjacent-lane queries: the target lane while changing
/// lanes, the neighbouring lane otherwise.
Lane adjacent_lane_of(const Vehicle& ego);

Neighbors neighbors(const World& world, const Vehicle& ego);

inline constexpr int kObservationWidth = 5;
using ObservationRow = std::array<double, kObservationWidth>;

struct Observation {
    int ego_id = -1;
    ObservationRow ego{};
    std::vector<ObservationRow> others;  // perception_n rows, nearest first, zero padded
    std::vector<int> observed_ids;       // ids behind the non-padding rows
};

Observation observe(const World& world, const Vehicle& ego);

struct ControlTarget {
    double v_nominal = 0.0;
    Lane target_lane = Lane::highway;
    bool lane_change_requested = false;
};

ControlTarget plan_motion(const Vehicle& ego, BehaviorAction action, const RoadNetwork& road,
                          double speed_step = 2.0);

/// Fills the kinematic fields (x_m, merged, failure, exit) after a move.
void update_progress(const RoadNetwork& road, Vehicle& v);

}  // namespace mergesim

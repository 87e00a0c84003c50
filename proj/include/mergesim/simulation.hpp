#pragma once

#include <map>
#include <vector>

#include "mergesim/shield.hpp"
#include "mergesim/topology.hpp"
#include "mergesim/world.hpp"

namespace mergesim {

/// Everything decided during one call to step_world.
struct StepReport {
    int step = 0;  // index of the step that was executed
    std::map<int, BehaviorAction> actions;
    std::map<int, ControlTarget> plans;
    InteractionTopology topology;
    std::map<int, ShieldOutcome> outcomes;
    std::map<int, ControlInput> controls;
    std::vector<int> collided;       // vehicles whose crashed flag was set this step
    std::vector<int> merged;         // ramp vehicles that completed their merge this step
    std::vector<int> failed_merges;  // ramp vehicles that ran out of acceleration lane
    std::vector<int> exited;
};

/// Low-level tracking: proportional speed control toward `v_safe` and a
/// lane-keeping steering law toward the centerline of `lane`, both
/// saturated at the actuator limits.
ControlInput track(const Vehicle& vehicle, double v_safe, Lane lane, const RoadNetwork& road,
                   const TrackingConfig& tracking, double dt);

/// Strict overlap of the two vehicles' axis-aligned footprints.
bool footprints_overlap(const Vehicle& a, const Vehicle& b);

/// Advances the world by one step: plan, build the interaction topology,
/// filter through the shield, track, integrate every vehicle from the same
/// snapshot, then detect collisions and lane/merge/exit events. Vehicles
/// without an entry in `actions` follow their lane.
StepReport step_world(World& world, const std::map<int, BehaviorAction>& actions);

}  // namespace mergesim

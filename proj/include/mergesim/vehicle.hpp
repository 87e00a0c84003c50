#pragma once

#include "mergesim/action.hpp"
#include "mergesim/dynamics.hpp"
#include "mergesim/road.hpp"

namespace mergesim {

enum class LaneChangePhase { not_changing, changing };

struct Vehicle {
    int id = 0;
    VehicleState state;
    VehicleParams params;
    Lane lane = Lane::highway;
    Lane target_lane = Lane::highway;
    Lane origin_lane = Lane::highway;
    BehaviorAction behavior = BehaviorAction::follow_lane;
    LaneChangePhase lc_phase = LaneChangePhase::not_changing;
    double x_m = 0.0;  // distance travelled on the merging lane
    bool merged = false;
    bool crashed = false;
    bool failed_merge = false;  // reached the end of the acceleration lane
    bool exited = false;        // left the simulated road

    bool active() const { return !failed_merge && !exited; }
    bool changing() const { return lc_phase == LaneChangePhase::changing; }
    double speed() const { return state.speed(); }
    double front() const { return state.x + 0.5 * params.length; }
    double rear() const { return state.x - 0.5 * params.length; }
};

/// Strict total order on the common longitudinal coordinate: larger x is
/// ahead; at equal x the smaller id is ahead.
inline bool ahead_of(const Vehicle& a, const Vehicle& b) {
    return a.state.x > b.state.x || (a.state.x == b.state.x && a.id < b.id);
}

/// Bumper-to-bumper gap from `follower`'s front to `leader`'s rear.
inline double bumper_gap(const Vehicle& follower, const Vehicle& leader) {
    return leader.rear() - follower.front();
}

}  // namespace mergesim

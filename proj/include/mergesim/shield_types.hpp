#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mergesim {

enum class ShieldMode { none, hss, mass };

std::string_view shield_mode_name(ShieldMode mode);
ShieldMode shield_mode_from_name(std::string_view name);  // throws ConfigError

struct ShieldConfig {
    ShieldMode mode = ShieldMode::mass;
    double tau = 0.5;        // s, longitudinal headway threshold
    double eta = 0.5;        // discrete-time barrier decay rate, (0, 1]
    double k_eps = 1e6;      // slack penalty
    double wc_brake = -5.0;  // m/s^2, worst-case deceleration of an observed leader
    double wc_accel = 5.0;   // m/s^2, worst-case acceleration of an observed rear vehicle
    double tau_lat = 0.5;    // s, headway threshold of the lane-change barriers
    double dt = 0.1;         // s, prediction step (the simulation step)

    void validate() const;
};

/// Result of filtering one vehicle's nominal speed reference.
struct ShieldOutcome {
    int vehicle_id = -1;
    double v_plan = 0.0;     // planner target before actuator reachability
    double v_nominal = 0.0;  // reachable reference handed to the filter
    double v_safe = 0.0;
    double v_cbf = 0.0;      // v_safe - v_nominal
    bool lane_change_requested = false;
    bool lane_change_allowed = false;
    double slack_used = 0.0;
    bool fault = false;      // hard constraints infeasible, full braking applied
    std::vector<std::string> active_constraints;
    std::vector<std::string> candidate_constraints;
};

}  // namespace mergesim

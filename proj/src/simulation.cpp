#include "mergesim/simulation.hpp"

#include <algorithm>
#include <cmath>

namespace mergesim {

ControlInput track(const Vehicle& vehicle, double v_safe, Lane lane, const RoadNetwork& road,
                   const TrackingConfig& tracking, double dt) {
    const auto& s = vehicle.state;
    const auto& p = vehicle.params;
    const double v = s.speed();
    const double k = tracking.k_speed > 0.0 ? tracking.k_speed : 1.0 / dt;

    ControlInput u;
    u.a = k * (v_safe - v);
    if (v > 0.1) {
        const double offset = s.y - road.centerline_y(lane, s.x);
        const double v_lat = -offset / tracking.tau_lateral;
        const double heading_ref = std::clamp(std::asin(std::clamp(v_lat / v, -1.0, 1.0)), -M_PI / 4.0, M_PI / 4.0);
        const double yaw_rate = (heading_ref - s.psi) / tracking.tau_heading;
        const double beta = std::asin(std::clamp(p.length / (2.0 * v) * yaw_rate, -1.0, 1.0));
        u.delta = std::atan(2.0 * std::tan(beta));
    }
    return saturate(u, p);
}

bool footprints_overlap(const Vehicle& a, const Vehicle& b) {
    return std::abs(a.state.x - b.state.x) < 0.5 * (a.params.length + b.params.length) &&
           std::abs(a.state.y - b.state.y) < 0.5 * (a.params.width + b.params.width);
}

StepReport step_world(World& world, const std::map<int, BehaviorAction>& actions) {
    StepReport report;
    report.step = world.step;
    const double dt = world.scenario.dt;

    for (const auto& v : world.vehicles) {
        if (!v.active() || v.crashed) continue;
        auto it = actions.find(v.id);
        const BehaviorAction action = it == actions.end() ? BehaviorAction::follow_lane : it->second;
        report.actions[v.id] = action;
        report.plans[v.id] = plan_motion(v, action, world.road, world.scenario.speed_step);
    }

    report.topology = build_topology(world);
    report.outcomes = joint_safe_control(world, report.topology, report.plans);

    std::vector<VehicleState> next(world.vehicles.size());
    for (std::size_t i = 0; i < world.vehicles.size(); ++i) {
        Vehicle& v = world.vehicles[i];
        next[i] = v.state;
        if (!v.active() || v.crashed) continue;
        v.behavior = report.actions[v.id];
        const ShieldOutcome& outcome = report.outcomes.at(v.id);
        const ControlTarget& plan = report.plans.at(v.id);
        if (!v.changing() && outcome.lane_change_allowed) {
            v.target_lane = plan.target_lane;
            v.lc_phase = LaneChangePhase::changing;
        }
        const Lane track_lane = v.changing() ? v.target_lane : v.lane;
        const ControlInput u = track(v, outcome.v_safe, track_lane, world.road, world.tracking, dt);
        report.controls[v.id] = u;
        next[i] = step(v.state, v.params, u, dt);
    }
    for (std::size_t i = 0; i < world.vehicles.size(); ++i) world.vehicles[i].state = next[i];

    for (std::size_t i = 0; i < world.vehicles.size(); ++i) {
        for (std::size_t j = i + 1; j < world.vehicles.size(); ++j) {
            Vehicle& a = world.vehicles[i];
            Vehicle& b = world.vehicles[j];
            if (!a.active() || !b.active() || !footprints_overlap(a, b)) continue;
            for (Vehicle* c : {&a, &b}) {
                if (c->crashed) continue;
                c->crashed = true;
                c->state.v_x = c->state.v_y = 0.0;
                report.collided.push_back(c->id);
            }
        }
    }
    std::sort(report.collided.begin(), report.collided.end());

    const double done_band = world.tracking.lane_done_fraction * world.road.lane_width;
    for (auto& v : world.vehicles) {
        if (!v.active()) continue;
        if (v.changing() && std::abs(v.state.y - world.road.centerline_y(v.target_lane, v.state.x)) < done_band) {
            v.lane = v.target_lane;
            v.lc_phase = LaneChangePhase::not_changing;
            if (v.origin_lane == Lane::ramp && v.lane == Lane::highway && !v.merged) {
                v.merged = true;
                report.merged.push_back(v.id);
            }
        }
        const bool was_failed = v.failed_merge;
        const bool was_exited = v.exited;
        update_progress(world.road, v);
        if (v.failed_merge && !was_failed) report.failed_merges.push_back(v.id);
        if (v.exited && !was_exited) report.exited.push_back(v.id);
    }
    ++world.step;
    return report;
}

}  // namespace mergesim

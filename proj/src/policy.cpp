#include "mergesim/policy.hpp"

#include <cmath>
#include <limits>

#include "mergesim/errors.hpp"
#include "mergesim/protocol.hpp"
#include "mergesim/rng.hpp"
#include "mergesim/shield.hpp"

namespace mergesim {

namespace {

constexpr double kRampCruise = 25.0;      // m/s, speed ramp vehicles match before the merge section
constexpr double kHighwayCruise = 27.0;   // m/s
constexpr double kMergeMargin = 3.0;      // m beyond the lane-change headway
constexpr double kYieldWindow = 20.0;     // m ahead in which a ramp vehicle makes highway traffic yield
constexpr double kYieldFloor = 15.0;      // m/s, highway vehicles do not yield below this speed

double headway(const Vehicle& follower, const Vehicle* leader) {
    if (!leader) return std::numeric_limits<double>::infinity();
    return bumper_gap(follower, *leader) / std::max(follower.speed(), 1.0);
}

BehaviorAction toward(double v, double target) {
    if (v < target - 1.0) return BehaviorAction::speed_up;
    if (v > target + 1.0) return BehaviorAction::slow_down;
    return BehaviorAction::follow_lane;
}

}  // namespace

PolicySpec PolicySpec::parse(std::string_view text) {
    PolicySpec spec;
    if (text == "random") {
        spec.kind = PolicyKind::random;
    } else if (text == "heuristic") {
        spec.kind = PolicyKind::heuristic;
    } else if (text.substr(0, 9) == "external:" && text.size() > 9) {
        spec.kind = PolicyKind::external;
        spec.endpoint = std::string(text.substr(9));
    } else {
        throw ConfigError("unknown policy '" + std::string(text) + "' (expected random, heuristic or external:CMD)");
    }
    return spec;
}

std::string PolicySpec::label() const {
    switch (kind) {
        case PolicyKind::random: return "random";
        case PolicyKind::heuristic: return "heuristic";
        case PolicyKind::external: return "external";
    }
    return "random";
}

void Policy::begin_episode(const World&, std::uint64_t, const nlohmann::ordered_json&) {}
void Policy::end_episode(const nlohmann::ordered_json&) {}

BehaviorAction random_action(std::uint64_t seed, int step, int vehicle_id) {
    const std::uint64_t h = mix64(mix64(mix64(seed) ^ static_cast<std::uint64_t>(step)) ^
                                  static_cast<std::uint64_t>(vehicle_id));
    const auto k = static_cast<std::size_t>(((h >> 32) * kAllActions.size()) >> 32);
    return kAllActions[k];
}

BehaviorAction heuristic_action(const World& world, const Vehicle& ego) {
    if (ego.changing()) return BehaviorAction::follow_lane;
    const Neighbors n = neighbors(world, ego);
    const double v = ego.speed();
    const double h_lead = headway(ego, n.leader);
    const ShieldConfig& cfg = world.shield;
    const RoadNetwork& road = world.road;

    if (ego.lane == Lane::ramp) {
        if (h_lead < 2.0 * cfg.tau) return BehaviorAction::slow_down;
        const bool in_zone = ego.state.x >= road.merge_start && ego.state.x < road.merge_end();
        if (!in_zone) return toward(v, kRampCruise);

        const bool lead_open =
            !n.adjacent_leader || bumper_gap(ego, *n.adjacent_leader) >= cfg.tau_lat * v + kMergeMargin;
        bool rear_open = true;
        if (n.adjacent_rear) {
            const double v_r = n.adjacent_rear->speed();
            rear_open = bumper_gap(*n.adjacent_rear, ego) >=
                        cfg.tau_lat * worst_case_rear_speed(*n.adjacent_rear, cfg) + kMergeMargin + std::max(0.0, v_r - v);
        }
        if (lead_open && rear_open) return BehaviorAction::lane_left;
        if (lead_open && h_lead > 4.0 * cfg.tau) return BehaviorAction::speed_up;
        return BehaviorAction::slow_down;
    }

    if (h_lead < 1.6 * cfg.tau) return BehaviorAction::slow_down;
    const Vehicle* ramp_ahead = n.adjacent_leader;
    if (ramp_ahead && ramp_ahead->lane == Lane::ramp && ramp_ahead->state.x >= road.merge_start - kYieldWindow &&
        ramp_ahead->state.x < road.merge_end() && ramp_ahead->state.x - ego.state.x < kYieldWindow && v > kYieldFloor)
        return BehaviorAction::slow_down;
    if (h_lead > 3.0 * cfg.tau) return toward(v, kHighwayCruise);
    return BehaviorAction::follow_lane;
}

void RandomPolicy::begin_episode(const World&, std::uint64_t seed, const nlohmann::ordered_json&) { seed_ = seed; }

std::map<int, BehaviorAction> RandomPolicy::decide(const World& world, const std::vector<AgentStep>& agents) {
    std::map<int, BehaviorAction> out;
    for (const auto& a : agents) {
        if (!a.done) out[a.id] = random_action(seed_, world.step, a.id);
    }
    return out;
}

std::map<int, BehaviorAction> HeuristicPolicy::decide(const World& world, const std::vector<AgentStep>& agents) {
    std::map<int, BehaviorAction> out;
    for (const auto& a : agents) {
        if (!a.done) out[a.id] = heuristic_action(world, *world.find(a.id));
    }
    return out;
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec) {
    switch (spec.kind) {
        case PolicyKind::random: return std::make_unique<RandomPolicy>();
        case PolicyKind::heuristic: return std::make_unique<HeuristicPolicy>();
        case PolicyKind::external: return std::make_unique<ExternalPolicy>(spec);
    }
    return std::make_unique<RandomPolicy>();
}

}  // namespace mergesim

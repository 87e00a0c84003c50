#include "mergesim/world.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mergesim/errors.hpp"
#include "mergesim/rng.hpp"
#include "mergesim/shield.hpp"

namespace mergesim {

namespace {

constexpr double kSpawnMargin = 1.0;  // m beyond the required gap

// Nearest vehicle in the ordering: `better(a, b)` is true when a is nearer.
template <typename Better>
const Vehicle* pick(const Vehicle* current, const Vehicle* candidate, Better better) {
    if (!current || better(*candidate, *current)) return candidate;
    return current;
}

}  // namespace

int ScenarioConfig::ramp_count() const {
    const int n = static_cast<int>(std::lround(n_vehicles * ramp_share));
    return std::clamp(n, 0, n_vehicles);
}

void ScenarioConfig::validate() const {
    if (n_vehicles < 1) throw ConfigError("scenario.n_vehicles must be >= 1");
    if (!(comm_range > 0.0)) throw ConfigError("scenario.comm_range must be > 0");
    if (perception_n < 0) throw ConfigError("scenario.perception_n must be >= 0");
    if (!(tau > 0.0)) throw ConfigError("scenario.tau must be > 0");
    if (!(dt > 0.0)) throw ConfigError("scenario.dt must be > 0");
    if (episode_steps < 1) throw ConfigError("scenario.episode_steps must be >= 1");
    if (!(spawn_spacing_min >= 0.0)) throw ConfigError("scenario.spawn_spacing_min must be >= 0");
    if (!(initial_speed_range.first >= 0.0 && initial_speed_range.second >= initial_speed_range.first))
        throw ConfigError("scenario.initial_speed_range must satisfy 0 <= lo <= hi");
    if (!(ramp_share >= 0.0 && ramp_share <= 1.0)) throw ConfigError("scenario.ramp_share must lie in [0, 1]");
    if (!(spawn_jitter >= 0.0)) throw ConfigError("scenario.spawn_jitter must be >= 0");
    if (!(highway_spawn_end > 0.0 && ramp_spawn_end > 0.0)) throw ConfigError("scenario spawn regions must be positive");
    if (!(speed_step > 0.0)) throw ConfigError("scenario.speed_step must be > 0");
}

const Vehicle* World::find(int id) const {
    for (const auto& v : vehicles) {
        if (v.id == id) return &v;
    }
    return nullptr;
}

Vehicle* World::find(int id) {
    for (auto& v : vehicles) {
        if (v.id == id) return &v;
    }
    return nullptr;
}

std::vector<const Vehicle*> World::active() const {
    std::vector<const Vehicle*> out;
    out.reserve(vehicles.size());
    for (const auto& v : vehicles) {
        if (v.active()) out.push_back(&v);
    }
    return out;
}

World make_world(const ScenarioConfig& scenario, const RoadNetwork& road, ShieldConfig shield,
                 const VehicleParams& params, const TrackingConfig& tracking) {
    scenario.validate();
    road.validate();
    params.validate();
    shield.tau = scenario.tau;
    shield.dt = scenario.dt;
    shield.validate();

    World world;
    world.scenario = scenario;
    world.road = road;
    world.shield = shield;
    world.tracking = tracking;
    world.vehicle_params = params;
    std::mt19937_64 rng(scenario.rng_seed);
    world.vehicles = spawn(scenario, road, params, rng);
    return world;
}

std::vector<Vehicle> spawn(const ScenarioConfig& config, const RoadNetwork& road, const VehicleParams& params,
                           std::mt19937_64& rng) {
    config.validate();
    const int n_ramp = config.ramp_count();
    const int n_highway = config.n_vehicles - n_ramp;
    const auto [v_lo, v_hi] = config.initial_speed_range;

    std::vector<Vehicle> out;
    out.reserve(static_cast<std::size_t>(config.n_vehicles));
    int next_id = 0;

    auto place_lane = [&](Lane lane, int count, double region_end) {
        double prev_rear = 0.0;
        double prev_speed = 0.0;
        for (int k = 0; k < count; ++k) {
            Vehicle v;
            v.id = next_id++;
            v.params = params;
            v.lane = v.target_lane = v.origin_lane = lane;
            const double speed = v_lo + (v_hi - v_lo) * uniform01(rng);
            double x;
            if (k == 0) {
                x = region_end - 0.5 * params.length - config.spawn_jitter * uniform01(rng);
            } else {
                // The follower must be able to keep its headway while both
                // brake at full rate, not only meet it at spawn time.
                const double brake = -params.a_min;
                const double envelope =
                    braking_envelope_min_gap(speed, prev_speed, config.tau, config.dt, brake, brake);
                const double gap = std::max({config.spawn_spacing_min, config.tau * speed, envelope}) + kSpawnMargin +
                                   config.spawn_jitter * uniform01(rng);
                x = prev_rear - gap - 0.5 * params.length;
            }
            if (x - 0.5 * params.length < 0.0) {
                throw ConfigError("spawn: " + std::to_string(count) + " vehicles do not fit on the " +
                                  lane_name(lane) + " spawn region of " + std::to_string(region_end) + " m");
            }
            prev_rear = x - 0.5 * params.length;
            prev_speed = speed;
            v.state.x = x;
            v.state.y = road.centerline_y(lane, x);
            v.state.v_x = speed;
            update_progress(road, v);
            out.push_back(v);
        }
    };

    place_lane(Lane::highway, n_highway, config.highway_spawn_end);
    place_lane(Lane::ramp, n_ramp, std::min(config.ramp_spawn_end, road.merge_start));
    return out;
}

Lane adjacent_lane_of(const Vehicle& ego) {
    return ego.changing() ? ego.target_lane : RoadNetwork::other_lane(ego.lane);
}

Neighbors neighbors(const World& world, const Vehicle& ego) {
    Neighbors n;
    n.adjacent_lane = adjacent_lane_of(ego);
    const double range = world.scenario.comm_range;
    auto nearer_ahead = [](const Vehicle& a, const Vehicle& b) { return ahead_of(b, a); };
    auto nearer_behind = [](const Vehicle& a, const Vehicle& b) { return ahead_of(a, b); };

    for (const auto& other : world.vehicles) {
        if (other.id == ego.id || !other.active()) continue;
        if (std::hypot(other.state.x - ego.state.x, other.state.y - ego.state.y) > range) continue;
        const bool ahead = ahead_of(other, ego);
        if (other.lane == ego.lane && ahead) {
            n.leader = pick(n.leader, &other, nearer_ahead);
        } else if (other.lane == n.adjacent_lane) {
            if (ahead)
                n.adjacent_leader = pick(n.adjacent_leader, &other, nearer_ahead);
            else
                n.adjacent_rear = pick(n.adjacent_rear, &other, nearer_behind);
        }
    }
    return n;
}

Observation observe(const World& world, const Vehicle& ego) {
    Observation obs;
    obs.ego_id = ego.id;
    const auto& s = ego.state;
    obs.ego = {s.x, s.y, s.v_x, s.v_y, s.psi};

    std::vector<std::pair<double, const Vehicle*>> seen;
    for (const auto& other : world.vehicles) {
        if (other.id == ego.id || !other.active()) continue;
        const double d = std::hypot(other.state.x - s.x, other.state.y - s.y);
        if (d <= world.scenario.comm_range) seen.emplace_back(d, &other);
    }
    std::sort(seen.begin(), seen.end(), [](const auto& a, const auto& b) {
        return a.first < b.first || (a.first == b.first && a.second->id < b.second->id);
    });

    const auto width = static_cast<std::size_t>(world.scenario.perception_n);
    obs.others.assign(width, ObservationRow{});
    for (std::size_t i = 0; i < width && i < seen.size(); ++i) {
        const auto& o = seen[i].second->state;
        obs.others[i] = {o.x - s.x, o.y - s.y, o.v_x, o.v_y, o.psi};
        obs.observed_ids.push_back(seen[i].second->id);
    }
    return obs;
}

ControlTarget plan_motion(const Vehicle& ego, BehaviorAction action, const RoadNetwork& road, double speed_step) {
    ControlTarget target;
    const double v = ego.speed();
    target.target_lane = ego.changing() ? ego.target_lane : ego.lane;
    target.v_nominal = v;
    switch (action) {
        case BehaviorAction::speed_up: target.v_nominal = v + speed_step; break;
        case BehaviorAction::slow_down: target.v_nominal = v - speed_step; break;
        case BehaviorAction::lane_left:
        case BehaviorAction::lane_right:
            if (!ego.changing()) {
                auto lane = road.lane_change_target(ego.lane, ego.state.x, action == BehaviorAction::lane_left);
                if (lane) {
                    target.target_lane = *lane;
                    target.lane_change_requested = true;
                }
            }
            break;
        case BehaviorAction::follow_lane: break;
    }
    target.v_nominal = std::clamp(target.v_nominal, 0.0, ego.params.v_cap);
    return target;
}

void update_progress(const RoadNetwork& road, Vehicle& v) {
    if (v.lane == Lane::ramp) {
        v.x_m = std::clamp(v.state.x - road.merge_start, 0.0, road.merge_length);
        if (v.state.x >= road.merge_end()) v.failed_merge = true;
    }
    if (v.state.x > road.road_length) v.exited = true;
}

}  // namespace mergesim

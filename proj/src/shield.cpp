#include "mergesim/shield.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace mergesim {

namespace {

constexpr double kSlackTol = 1e-9;
// The envelope credits the follower with this share of its braking, so
// full braking always stays strictly inside the envelope one step later
// and small tracking errors cannot make the next step infeasible.
constexpr double kEnvelopeBrakeShare = 0.98;

// Position after the current step; a crashed vehicle never moves.
double committed_x(const Vehicle& v, double dt) { return v.crashed ? v.state.x : v.state.x + v.state.v_x * dt; }

double committed_gap(const Vehicle& follower, const Vehicle& leader, double dt) {
    return (committed_x(leader, dt) - 0.5 * leader.params.length) -
           (committed_x(follower, dt) + 0.5 * follower.params.length);
}

// Speed a vehicle is assumed to command for the coming step.
using CommandFn = std::function<double(const Vehicle&)>;

std::string tag(const char* role, const Vehicle& v) { return std::string(role) + ":" + std::to_string(v.id); }

void append_leader(std::vector<AffineConstraint>& rows, const Vehicle& ego, const Vehicle& leader, double u_leader,
                   double tau, const ShieldConfig& config, const std::string& id) {
    rows.push_back(longitudinal_cbf(ego, leader, u_leader, tau, config, id));
    rows.push_back(braking_envelope_constraint(ego, leader, u_leader, tau, config, id + "/envelope"));
}

// Vehicles changing into the ego's lane between the ego and its leader.
std::vector<const Vehicle*> cut_ins(const World& world, const Vehicle& ego, const Vehicle* leader) {
    std::vector<const Vehicle*> out;
    for (const auto& o : world.vehicles) {
        if (o.id == ego.id || !o.active() || !o.changing()) continue;
        if (o.lane == ego.lane || o.target_lane != ego.lane) continue;
        if (!ahead_of(o, ego) || (leader && !ahead_of(*leader, o))) continue;
        if (std::hypot(o.state.x - ego.state.x, o.state.y - ego.state.y) > world.scenario.comm_range) continue;
        out.push_back(&o);
    }
    return out;
}

ShieldOutcome run_filter(const World& world, const Vehicle& ego, const ControlTarget& plan,
                         const ShieldConfig& config, const CommandFn& command) {
    ShieldOutcome out;
    out.vehicle_id = ego.id;
    out.v_plan = plan.v_nominal;
    out.lane_change_requested = plan.lane_change_requested && !ego.changing();
    const SpeedWindow window = reachable_speeds(ego, config.dt);
    out.v_nominal = std::clamp(plan.v_nominal, window.lo, window.hi);
    if (ego.crashed) {
        out.v_nominal = out.v_safe = 0.0;
        return out;
    }

    const Neighbors n = neighbors(world, ego);
    std::vector<AffineConstraint> keep;
    keep.push_back(AffineConstraint::hard("reach_hi", {1.0}, window.hi));
    keep.push_back(AffineConstraint::hard("reach_lo", {-1.0}, -window.lo));
    if (n.leader) append_leader(keep, ego, *n.leader, command(*n.leader), config.tau, config, tag("ol", *n.leader));
    for (const Vehicle* m : cut_ins(world, ego, n.leader))
        append_leader(keep, ego, *m, command(*m), config.tau, config, tag("cut_in", *m));

    auto with_lateral = [&](std::vector<AffineConstraint> rows) {
        const double u_oal = n.adjacent_leader ? command(*n.adjacent_leader) : 0.0;
        auto lateral = lateral_cbfs(ego, n.adjacent_leader, n.adjacent_rear, u_oal, config);
        rows.insert(rows.end(), lateral.begin(), lateral.end());
        return rows;
    };

    const std::vector<double> ref{out.v_nominal};
    std::vector<AffineConstraint> rows = ego.changing() ? with_lateral(keep) : keep;
    QpResult res;
    bool solved = false;
    if (out.lane_change_requested && allow_lane_change(ego, n.adjacent_leader, n.adjacent_rear, config)) {
        std::vector<AffineConstraint> change_rows = with_lateral(keep);
        QpResult change = solve_qp(ref, change_rows, config.k_eps);
        if (change.status == QpStatus::optimal && change.slack <= kSlackTol) {
            out.lane_change_allowed = true;
            rows = std::move(change_rows);
            res = std::move(change);
            solved = true;
        }
    }
    if (!solved) res = solve_qp(ref, rows, config.k_eps);

    for (const auto& r : rows) out.candidate_constraints.push_back(r.id);
    if (res.status != QpStatus::optimal) {
        out.fault = true;
        out.lane_change_allowed = false;
        out.v_safe = window.lo;
    } else {
        out.v_safe = res.v[0];
        out.slack_used = res.slack;
        out.active_constraints = res.active;
    }
    out.v_cbf = out.v_safe - out.v_nominal;
    return out;
}

}  // namespace

double headway_barrier(double dx, double v_e, double tau) { return dx - tau * v_e; }

double worst_case_leader_speed(const Vehicle& leader, const ShieldConfig& config) {
    if (leader.crashed) return 0.0;
    return std::max(0.0, leader.speed() + config.wc_brake * config.dt);
}

double worst_case_rear_speed(const Vehicle& rear, const ShieldConfig& config) {
    if (rear.crashed) return 0.0;
    return std::min(rear.params.v_cap, rear.speed() + config.wc_accel * config.dt);
}

SpeedWindow reachable_speeds(const Vehicle& ego, double dt) {
    const double v = ego.speed();
    return {std::max(0.0, v + ego.params.a_min * dt), std::min(ego.params.v_cap, v + ego.params.a_max * dt)};
}

AffineConstraint longitudinal_cbf(const Vehicle& ego, const Vehicle& leader, double u_leader, double tau,
                                  const ShieldConfig& config, const std::string& id) {
    const double dt = config.dt;
    const double g_e = ego.state.longitudinal_gain();
    const double g_o = leader.crashed ? 0.0 : leader.state.longitudinal_gain();
    const double v_e = ego.speed();
    const double gap_next = committed_gap(ego, leader, dt);
    const double bound = config.eta * gap_next + (1.0 - config.eta) * tau * v_e + g_o * u_leader * dt;
    return AffineConstraint::hard(id, {g_e * dt + tau}, bound, headway_barrier(bumper_gap(ego, leader), v_e, tau));
}

double braking_envelope_min_gap(double u, double u_leader, double tau, double dt, double brake_follower,
                                double brake_leader) {
    // Speeds fall by d_e, d_o per step until they reach zero; positions
    // advance with the step-start speed. With zero initial gap,
    // h_k = gap_k - tau * v_k is a quadratic in k on each stretch where the
    // number of moving vehicles is constant, so its minimum over integers
    // is at an end or next to the vertex. Once the follower has stopped the
    // gap can only grow.
    if (u <= 0.0) return 0.0;
    const double d_e = brake_follower * dt;
    const double d_o = brake_leader * dt;
    const auto n_e = static_cast<long>(std::ceil(u / d_e));
    const long n_o = u_leader > 0.0 ? static_cast<long>(std::ceil(u_leader / d_o)) : 0;
    const double s_o_stop = n_o * u_leader - d_o * n_o * (n_o - 1) / 2.0;

    auto s_o = [&](long k) { return k <= n_o ? k * u_leader - d_o * k * (k - 1) / 2.0 : s_o_stop; };
    auto h = [&](long k) {
        const double s_e = k * u - d_e * k * (k - 1) / 2.0;
        const double v_k = std::max(0.0, u - k * d_e);
        return dt * (s_o(k) - s_e) - tau * v_k;
    };
    // Quadratic a k^2 + b k + c restricted to integers [lo, hi].
    auto min_on = [&](long lo, long hi, double a, double b) {
        double m = std::min(h(lo), h(hi));
        if (a > 0.0) {
            const auto vertex = static_cast<long>(std::floor(-b / (2.0 * a)));
            for (long k : {vertex, vertex + 1})
                if (k > lo && k < hi) m = std::min(m, h(k));
        }
        return m;
    };
    double m = std::min(h(0), h(n_e));
    const long end1 = std::min(n_o, n_e - 1);
    if (end1 >= 0)
        m = std::min(m, min_on(0, end1, dt * (d_e - d_o) / 2.0,
                               dt * (u_leader - u) + tau * d_e - dt * (d_e - d_o) / 2.0));
    if (n_o + 1 <= n_e - 1) m = std::min(m, min_on(n_o + 1, n_e - 1, dt * d_e / 2.0, -dt * u + tau * d_e - dt * d_e / 2.0));
    return std::max(0.0, -m);
}

bool braking_envelope_holds(double gap, double u, double u_leader, double tau, double dt, double brake_follower,
                            double brake_leader) {
    // Tolerance absorbs rounding in the closed-form sums.
    const double need = braking_envelope_min_gap(u, u_leader, tau, dt, brake_follower, brake_leader);
    return gap >= need - 1e-12 * std::max(1.0, need);
}

double envelope_speed_limit(double gap, double u_leader, double tau, double dt, double brake_follower,
                            double brake_leader, double hi) {
    auto ok = [&](double u) { return braking_envelope_holds(gap, u, u_leader, tau, dt, brake_follower, brake_leader); };
    if (ok(hi)) return hi;
    if (!ok(0.0)) return -1.0;
    double lo = 0.0;
    for (int i = 0; i < 64 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

double envelope_leader_floor(double gap, double u_follower, double tau, double dt, double brake_follower,
                             double brake_leader, double lo, double hi) {
    auto ok = [&](double u_o) {
        return braking_envelope_holds(gap, u_follower, u_o, tau, dt, brake_follower, brake_leader);
    };
    if (ok(lo)) return lo;
    if (!ok(hi)) return hi + 1.0;
    for (int i = 0; i < 64 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

AffineConstraint braking_envelope_constraint(const Vehicle& ego, const Vehicle& leader, double u_leader, double tau,
                                             const ShieldConfig& config, const std::string& id) {
    const double limit = envelope_speed_limit(committed_gap(ego, leader, config.dt), leader.crashed ? 0.0 : u_leader,
                                              tau, config.dt, -kEnvelopeBrakeShare * ego.params.a_min, -config.wc_brake,
                                              ego.params.v_cap);
    return AffineConstraint::hard(id, {1.0}, limit, headway_barrier(bumper_gap(ego, leader), ego.speed(), tau));
}

LateralBarriers lateral_barriers(const Vehicle& ego, const Vehicle* c_oal, const Vehicle* c_oar,
                                 const ShieldConfig& config) {
    LateralBarriers h;
    if (c_oal) h.h_oal = headway_barrier(bumper_gap(ego, *c_oal), ego.speed(), config.tau_lat);
    if (c_oar) h.h_oar = headway_barrier(bumper_gap(*c_oar, ego), worst_case_rear_speed(*c_oar, config), config.tau_lat);
    return h;
}

std::vector<AffineConstraint> lateral_cbfs(const Vehicle& ego, const Vehicle* c_oal, const Vehicle* c_oar,
                                           double u_oal, const ShieldConfig& config) {
    std::vector<AffineConstraint> rows;
    if (c_oal) append_leader(rows, ego, *c_oal, u_oal, config.tau_lat, config, tag("oal", *c_oal));
    if (c_oar) {
        const double dt = config.dt;
        const double u_r = worst_case_rear_speed(*c_oar, config);
        const double g_r = c_oar->crashed ? 0.0 : c_oar->state.longitudinal_gain();
        const double v_r = c_oar->crashed ? 0.0 : c_oar->speed();
        const double gap_next = committed_gap(*c_oar, ego, dt);
        const double bound = config.eta * gap_next - g_r * u_r * dt - config.tau_lat * u_r +
                             (1.0 - config.eta) * config.tau_lat * v_r;
        rows.push_back(AffineConstraint::soft(tag("oar", *c_oar), {-ego.state.longitudinal_gain() * dt}, bound,
                                              headway_barrier(bumper_gap(*c_oar, ego), u_r, config.tau_lat)));
        // Once the ego is in its lane the rear vehicle keeps its own braking
        // envelope to the ego, which needs a minimum ego speed.
        const double floor = envelope_leader_floor(gap_next, u_r, config.tau, dt, -kEnvelopeBrakeShare * c_oar->params.a_min,
                                                   -config.wc_brake, 0.0, ego.params.v_cap);
        rows.push_back(AffineConstraint::soft(tag("oar", *c_oar) + "/envelope", {-1.0}, -floor,
                                              headway_barrier(bumper_gap(*c_oar, ego), u_r, config.tau)));
    }
    return rows;
}

bool allow_lane_change(const Vehicle& ego, const Vehicle* c_oal, const Vehicle* c_oar, const ShieldConfig& config) {
    const LateralBarriers h = lateral_barriers(ego, c_oal, c_oar, config);
    return (!h.h_oal || *h.h_oal >= 0.0) && (!h.h_oar || *h.h_oar >= 0.0);
}

ShieldOutcome filter_hss(const World& world, const Vehicle& ego, const ControlTarget& plan,
                         const ShieldConfig& config) {
    return run_filter(world, ego, plan, config,
                      [&](const Vehicle& o) { return worst_case_leader_speed(o, config); });
}

ShieldOutcome filter_mass(const World& world, const Vehicle& ego, const ControlTarget& plan,
                          const InteractionTopology& topology, const std::map<int, ShieldOutcome>& resolved,
                          const ShieldConfig& config) {
    const std::vector<int>& parents = topology.parents_of(ego.id);
    return run_filter(world, ego, plan, config, [&](const Vehicle& o) {
        if (std::find(parents.begin(), parents.end(), o.id) != parents.end()) {
            auto it = resolved.find(o.id);
            if (it != resolved.end()) return it->second.v_safe;
        }
        return worst_case_leader_speed(o, config);
    });
}

ShieldOutcome filter_none(const World& world, const Vehicle& ego, const ControlTarget& plan,
                          const ShieldConfig& config) {
    (void)world;
    ShieldOutcome out;
    out.vehicle_id = ego.id;
    out.v_plan = plan.v_nominal;
    out.lane_change_requested = plan.lane_change_requested && !ego.changing();
    out.lane_change_allowed = out.lane_change_requested;
    const SpeedWindow window = reachable_speeds(ego, config.dt);
    out.v_nominal = out.v_safe = ego.crashed ? 0.0 : std::clamp(plan.v_nominal, window.lo, window.hi);
    return out;
}

std::map<int, ShieldOutcome> joint_safe_control(const World& world, const InteractionTopology& topology,
                                                const std::map<int, ControlTarget>& plans) {
    std::map<int, ShieldOutcome> out;
    const ShieldConfig& config = world.shield;
    for (int id : evaluation_order(topology, world)) {
        const Vehicle& ego = *world.find(id);
        ControlTarget plan;
        if (auto it = plans.find(id); it != plans.end()) {
            plan = it->second;
        } else {
            plan.v_nominal = ego.speed();
            plan.target_lane = ego.changing() ? ego.target_lane : ego.lane;
        }
        switch (config.mode) {
            case ShieldMode::none: out[id] = filter_none(world, ego, plan, config); break;
            case ShieldMode::hss: out[id] = filter_hss(world, ego, plan, config); break;
            case ShieldMode::mass: out[id] = filter_mass(world, ego, plan, topology, out, config); break;
        }
    }
    return out;
}

}  // namespace mergesim

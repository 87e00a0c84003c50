#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mergesim/qp.hpp"
#include "mergesim/shield_types.hpp"
#include "mergesim/topology.hpp"
#include "mergesim/world.hpp"

namespace mergesim {

/// Time-headway barrier h = dx - tau * v_e; non-negative inside the safe set.
double headway_barrier(double dx, double v_e, double tau);

/// Speed an observed leader is assumed to reach after one step when its
/// intention is unknown: full worst-case braking.
double worst_case_leader_speed(const Vehicle& leader, const ShieldConfig& config);

/// Speed an observed rear vehicle is assumed to reach after one step:
/// full worst-case acceleration, capped at its speed limit.
double worst_case_rear_speed(const Vehicle& rear, const ShieldConfig& config);

/// Range of speeds the ego can reach in one step under its actuator limits.
struct SpeedWindow {
    double lo = 0.0;
    double hi = 0.0;
};
SpeedWindow reachable_speeds(const Vehicle& ego, double dt);

/// Discrete-time barrier condition h(next) >= (1 - eta) h(now) for the
/// headway to `leader`, written over the ego speed command u. Positions are
/// propagated one step with the current velocities, the speed state
/// becomes u, and the leader is assumed to command `u_leader`. Hard row.
AffineConstraint longitudinal_cbf(const Vehicle& ego, const Vehicle& leader, double u_leader, double tau,
                                  const ShieldConfig& config, const std::string& id);

/// Braking envelope: with gap `gap` right after this step, follower speed
/// `u` and leader speed `u_leader`, both vehicles then brake as hard as
/// allowed (decelerations `brake_follower`, `brake_leader` > 0) with the
/// same explicit Euler update as the simulation. True iff the time headway
/// stays at or above `tau` at every later step.
bool braking_envelope_holds(double gap, double u, double u_leader, double tau, double dt, double brake_follower,
                            double brake_leader);

/// Smallest gap for which the braking envelope holds.
double braking_envelope_min_gap(double u, double u_leader, double tau, double dt, double brake_follower,
                                double brake_leader);

/// Largest follower speed in [0, hi] whose braking envelope holds, or -1
/// when none does. The envelope is monotone in the follower speed.
double envelope_speed_limit(double gap, double u_leader, double tau, double dt, double brake_follower,
                            double brake_leader, double hi);

/// Smallest leader speed in [lo, hi] whose braking envelope holds for the
/// given follower speed, or hi + 1 when none does.
double envelope_leader_floor(double gap, double u_follower, double tau, double dt, double brake_follower,
                             double brake_leader, double lo, double hi);

/// Hard row u <= U* keeping the braking envelope to `leader` (assumed to
/// command `u_leader` this step, then to brake at the worst-case rate).
/// Its tightness at full braking makes the filter recursively feasible;
/// at the first envelope step it is the headway right after this step.
AffineConstraint braking_envelope_constraint(const Vehicle& ego, const Vehicle& leader, double u_leader, double tau,
                                             const ShieldConfig& config, const std::string& id);

/// Barrier values of the adjacent-lane gaps at the current state:
/// h_oal = dx_oal - tau_lat * v_e and h_oar = dx_oar - tau_lat * v_oar_wc.
struct LateralBarriers {
    std::optional<double> h_oal;
    std::optional<double> h_oar;
};
LateralBarriers lateral_barriers(const Vehicle& ego, const Vehicle* c_oal, const Vehicle* c_oar,
                                 const ShieldConfig& config);

/// Lane-change constraints toward the target lane: hard headway rows to the
/// adjacent leader (assumed to command `u_oal`) and a soft row keeping the
/// adjacent rear vehicle's headway under its worst-case acceleration.
std::vector<AffineConstraint> lateral_cbfs(const Vehicle& ego, const Vehicle* c_oal, const Vehicle* c_oar,
                                           double u_oal, const ShieldConfig& config);

/// True iff every lateral barrier is non-negative at the current state.
bool allow_lane_change(const Vehicle& ego, const Vehicle* c_oal, const Vehicle* c_oar, const ShieldConfig& config);

/// Worst-case filter: every observed vehicle is assumed to take its most
/// adverse admissible control.
ShieldOutcome filter_hss(const World& world, const Vehicle& ego, const ControlTarget& plan,
                         const ShieldConfig& config);

/// Collaborative filter: parents contribute their already resolved safe
/// speeds; every other observed vehicle is treated as in filter_hss.
ShieldOutcome filter_mass(const World& world, const Vehicle& ego, const ControlTarget& plan,
                          const InteractionTopology& topology, const std::map<int, ShieldOutcome>& resolved,
                          const ShieldConfig& config);

/// Pass-through outcome used when no shield is configured.
ShieldOutcome filter_none(const World& world, const Vehicle& ego, const ControlTarget& plan,
                          const ShieldConfig& config);

/// Filters every active vehicle's plan in topology order with the shield
/// selected by world.shield.mode. Vehicles without a plan keep their speed.
std::map<int, ShieldOutcome> joint_safe_control(const World& world, const InteractionTopology& topology,
                                                const std::map<int, ControlTarget>& plans);

}  // namespace mergesim

#pragma once

#include <cmath>

namespace mergesim {

struct VehicleParams {
    double length = 5.0;                 // m, also the wheelbase of the bicycle model
    double width = 2.0;                  // m
    double a_max = 5.0;                  // m/s^2
    double a_min = -5.0;                 // m/s^2, maximum braking
    double delta_max = M_PI / 4.0;       // rad
    double v_cap = 40.0;                 // m/s

    /// Throws ConfigError naming the first violated invariant.
    void validate() const;
};

struct VehicleState {
    double x = 0.0;    // longitudinal position along the highway reference line
    double y = 0.0;    // lateral position
    double v_x = 0.0;
    double v_y = 0.0;
    double psi = 0.0;  // heading w.r.t. the road

    double speed() const { return std::hypot(v_x, v_y); }

    /// Cosine of the direction of travel; maps a speed command to
    /// longitudinal displacement. 1 for a vehicle at rest.
    double longitudinal_gain() const;

    bool finite() const;
};

struct ControlInput {
    double a = 0.0;      // m/s^2
    double delta = 0.0;  // rad
};

/// Slip angle at the centre of gravity for a front steering angle.
/// Throws std::domain_error on non-finite input or |delta| >= pi/2.
double slip_angle(double delta);

/// Saturates a control to the actuator limits of `params`.
ControlInput saturate(const ControlInput& u, const VehicleParams& params);

/// One explicit Euler step of the kinematic bicycle model.
///
/// Positions advance with the step-start velocity, the heading with the
/// step-start speed. The velocity vector is rotated by the heading increment
/// and receives the acceleration along psi + beta; the resulting speed is
/// saturated at v_cap and never reverses the direction of travel.
VehicleState step(const VehicleState& state, const VehicleParams& params,
                  const ControlInput& u, double dt);

}  // namespace mergesim

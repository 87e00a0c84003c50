#include "mergesim/dynamics.hpp"

#include <algorithm>
#include <stdexcept>

#include "mergesim/errors.hpp"

namespace mergesim {

void VehicleParams::validate() const {
    if (!(length > 0.0)) throw ConfigError("vehicle.length must be > 0");
    if (!(width > 0.0)) throw ConfigError("vehicle.width must be > 0");
    if (!(a_min < 0.0 && a_max > 0.0)) throw ConfigError("vehicle limits must satisfy a_min < 0 < a_max");
    if (!(delta_max > 0.0 && delta_max < M_PI / 2.0)) throw ConfigError("vehicle.delta_max must lie in (0, pi/2)");
    if (!(v_cap > 0.0)) throw ConfigError("vehicle.v_cap must be > 0");
}

double VehicleState::longitudinal_gain() const {
    const double v = speed();
    if (v <= 0.0) return 1.0;
    return v_x / v;
}

bool VehicleState::finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(v_x) && std::isfinite(v_y) &&
           std::isfinite(psi);
}

double slip_angle(double delta) {
    if (!std::isfinite(delta)) throw std::domain_error("slip_angle: non-finite steering angle");
    if (std::abs(delta) >= M_PI / 2.0) throw std::domain_error("slip_angle: |delta| must be < pi/2");
    return std::atan(0.5 * std::tan(delta));
}

ControlInput saturate(const ControlInput& u, const VehicleParams& params) {
    return {std::clamp(u.a, params.a_min, params.a_max),
            std::clamp(u.delta, -params.delta_max, params.delta_max)};
}

VehicleState step(const VehicleState& s, const VehicleParams& params, const ControlInput& u, double dt) {
    const double v = s.speed();
    const double beta = slip_angle(u.delta);

    VehicleState next;
    next.x = s.x + s.v_x * dt;
    next.y = s.y + s.v_y * dt;

    const double dpsi = (2.0 * v / params.length) * std::sin(beta) * dt;
    next.psi = s.psi + dpsi;

    // Velocity turns with the body; exact rotation keeps |v| unchanged.
    const double c = std::cos(dpsi);
    const double sn = std::sin(dpsi);
    double vx = s.v_x * c - s.v_y * sn;
    double vy = s.v_x * sn + s.v_y * c;

    vx += u.a * std::cos(s.psi + beta) * dt;
    vy += u.a * std::sin(s.psi + beta) * dt;

    // Braking never reverses the direction of travel.
    if (vx * std::cos(next.psi) + vy * std::sin(next.psi) < 0.0) {
        vx = 0.0;
        vy = 0.0;
    }

    const double v_next = std::hypot(vx, vy);
    if (v_next > params.v_cap) {
        double scale = params.v_cap / v_next;
        while (std::hypot(vx * scale, vy * scale) > params.v_cap) scale = std::nextafter(scale, 0.0);
        vx *= scale;
        vy *= scale;
    }
    next.v_x = vx;
    next.v_y = vy;
    return next;
}

}  // namespace mergesim

#include "mergesim/shield_types.hpp"

#include <string>

#include "mergesim/errors.hpp"

namespace mergesim {

std::string_view shield_mode_name(ShieldMode mode) {
    switch (mode) {
        case ShieldMode::none: return "none";
        case ShieldMode::hss: return "hss";
        case ShieldMode::mass: return "mass";
    }
    return "none";
}

ShieldMode shield_mode_from_name(std::string_view name) {
    if (name == "none") return ShieldMode::none;
    if (name == "hss") return ShieldMode::hss;
    if (name == "mass") return ShieldMode::mass;
    throw ConfigError("unknown shield mode '" + std::string(name) + "' (expected none, hss or mass)");
}

void ShieldConfig::validate() const {
    if (!(tau > 0.0)) throw ConfigError("shield.tau must be > 0");
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("shield.eta must lie in (0, 1]");
    if (!(k_eps > 0.0)) throw ConfigError("shield.k_eps must be > 0");
    if (!(wc_brake < 0.0)) throw ConfigError("shield.wc_brake must be < 0");
    if (!(wc_accel > 0.0)) throw ConfigError("shield.wc_accel must be > 0");
    if (!(tau_lat > 0.0)) throw ConfigError("shield.tau_lat must be > 0");
    if (!(dt > 0.0)) throw ConfigError("shield.dt must be > 0");
}

}  // namespace mergesim

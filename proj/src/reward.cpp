#include "mergesim/reward.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mergesim/errors.hpp"

namespace mergesim {

std::string_view reward_function_name(RewardFunction fn) {
    return fn == RewardFunction::custom ? "custom" : "default";
}

RewardFunction reward_function_from_name(std::string_view name) {
    if (name == "default") return RewardFunction::standard;
    if (name == "custom") return RewardFunction::custom;
    throw ConfigError("unknown reward function '" + std::string(name) + "' (expected default or custom)");
}

void RewardWeights::validate() const {
    if (!(v_min > 0.0 && v_max > v_min)) throw ConfigError("reward weights must satisfy 0 < v_min < v_max");
    if (!(tau > 0.0)) throw ConfigError("reward.tau must be > 0");
    if (!(merge_length > 0.0)) throw ConfigError("reward.merge_length must be > 0");
    if (!(v_floor > 0.0)) throw ConfigError("reward.v_floor must be > 0");
    for (double w : {w_c, w_s, w_h, w_m})
        if (!std::isfinite(w)) throw ConfigError("reward weights must be finite");
}

double headway_reward(double dx, double v_e, double tau, double v_floor) {
    const double gap = std::max(dx, 1e-3);
    const double r = -std::log(gap / (tau * std::max(v_e, v_floor)));
    return r == 0.0 ? 0.0 : r;  // no negative zero at the desired headway
}

double speed_reward(double v_e, double v_min, double v_max) {
    return std::min((v_e - v_min) / (v_max - v_min), 1.0);
}

double merge_reward(double x_m, double merge_length) {
    const double d = x_m - merge_length;
    return -std::exp(-(d * d) / (10.0 * merge_length));
}

RewardTerms reward_terms(const World& world, const Vehicle& vehicle, const RewardWeights& weights) {
    RewardTerms t;
    t.r_c = vehicle.crashed ? -1.0 : 0.0;
    t.r_s = speed_reward(vehicle.speed(), weights.v_min, weights.v_max);
    if (const Vehicle* leader = neighbors(world, vehicle).leader)
        t.r_h = headway_reward(bumper_gap(vehicle, *leader), vehicle.speed(), weights.tau, weights.v_floor);
    if (vehicle.lane == Lane::ramp) t.r_m = merge_reward(vehicle.x_m, weights.merge_length);
    return t;
}

double custom_reward(const RewardTerms& t, const RewardWeights& w) {
    return w.w_h * t.r_h + w.w_s * t.r_s + w.w_m * t.r_m;
}

double default_reward(const RewardTerms& t, const RewardWeights& w) {
    return w.w_c * t.r_c + w.w_s * t.r_s + w.w_h * t.r_h + w.w_m * t.r_m;
}

double individual_reward(const World& world, const Vehicle& vehicle, RewardFunction fn, const RewardWeights& weights) {
    const RewardTerms terms = reward_terms(world, vehicle, weights);
    return fn == RewardFunction::custom ? custom_reward(terms, weights) : default_reward(terms, weights);
}

double overall_reward(const World& world, const Vehicle& ego, RewardFunction fn, const RewardWeights& weights) {
    double sum = individual_reward(world, ego, fn, weights);
    int n = 1;
    for (int id : observe(world, ego).observed_ids) {
        sum += individual_reward(world, *world.find(id), fn, weights);
        ++n;
    }
    return sum / n;
}

std::vector<std::pair<double, double>> headway_reward_curve(double v_e, double tau, double dx_lo, double dx_hi,
                                                            int points) {
    if (!(dx_lo > 0.0 && dx_hi > dx_lo) || points < 2)
        throw ConfigError("reward curve needs 0 < dx_lo < dx_hi and at least two points");
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double dx = dx_lo + (dx_hi - dx_lo) * i / (points - 1);
        out.emplace_back(dx, headway_reward(dx, v_e, tau));
    }
    return out;
}

}  // namespace mergesim

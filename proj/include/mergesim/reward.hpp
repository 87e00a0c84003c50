#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "mergesim/world.hpp"

namespace mergesim {

enum class RewardFunction { standard, custom };

std::string_view reward_function_name(RewardFunction fn);     // "default" / "custom"
RewardFunction reward_function_from_name(std::string_view name);  // throws ConfigError

struct RewardWeights {
    double w_c = 200.0;  // collision (standard function only)
    double w_s = 4.0;
    double w_h = 1.0;
    double w_m = 8.0;
    double v_min = 10.0;  // m/s
    double v_max = 30.0;  // m/s
    double tau = 0.5;     // s
    double merge_length = 100.0;  // m
    double v_floor = 1.0;         // m/s, lower bound on the speed in the headway ratio

    void validate() const;
};

/// -ln(dx / (tau * v_e)): zero at the desired headway, positive when
/// closer, negative when farther. v_e is floored at `v_floor` and dx at a
/// millimetre so the ratio stays defined.
double headway_reward(double dx, double v_e, double tau, double v_floor = 1.0);

/// min((v_e - v_min) / (v_max - v_min), 1).
double speed_reward(double v_e, double v_min, double v_max);

/// -exp(-(x_m - L)^2 / (10 L)) for a vehicle waiting on the merging lane.
double merge_reward(double x_m, double merge_length);

/// Individual reward terms of one vehicle in the current world.
struct RewardTerms {
    double r_c = 0.0;  // -1 when crashed
    double r_s = 0.0;
    double r_h = 0.0;  // 0 without a leader
    double r_m = 0.0;  // 0 off the merging lane
};

RewardTerms reward_terms(const World& world, const Vehicle& vehicle, const RewardWeights& weights);

/// w_h r_h + w_s r_s + w_m r_m; no collision term.
double custom_reward(const RewardTerms& terms, const RewardWeights& weights);

/// w_c r_c + w_s r_s + w_h r_h + w_m r_m.
double default_reward(const RewardTerms& terms, const RewardWeights& weights);

double individual_reward(const World& world, const Vehicle& vehicle, RewardFunction fn, const RewardWeights& weights);

/// Mean individual reward over the ego and the vehicles in its observation.
double overall_reward(const World& world, const Vehicle& ego, RewardFunction fn, const RewardWeights& weights);

/// (dx, r_h) samples on an evenly spaced grid of `points` gaps in [dx_lo, dx_hi].
std::vector<std::pair<double, double>> headway_reward_curve(double v_e, double tau, double dx_lo, double dx_hi,
                                                            int points);

}  // namespace mergesim

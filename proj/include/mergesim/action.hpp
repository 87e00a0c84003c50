#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace mergesim {

/// Discrete behavioural decision issued by a policy each step.
enum class BehaviorAction { lane_left, lane_right, follow_lane, speed_up, slow_down };

inline constexpr std::array<BehaviorAction, 5> kAllActions = {
    BehaviorAction::lane_left, BehaviorAction::lane_right, BehaviorAction::follow_lane,
    BehaviorAction::speed_up, BehaviorAction::slow_down};

std::string_view action_name(BehaviorAction action);
std::optional<BehaviorAction> action_from_name(std::string_view name);

/// Wire encoding: 0 right, 1 left, 2 follow lane, 3 speed up, 4 slow down.
int action_to_wire(BehaviorAction action);
std::optional<BehaviorAction> action_from_wire(long long code);

}  // namespace mergesim

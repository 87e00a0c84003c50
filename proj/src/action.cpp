#include "mergesim/action.hpp"

namespace mergesim {

std::string_view action_name(BehaviorAction action) {
    switch (action) {
        case BehaviorAction::lane_left: return "lane_left";
        case BehaviorAction::lane_right: return "lane_right";
        case BehaviorAction::follow_lane: return "follow_lane";
        case BehaviorAction::speed_up: return "speed_up";
        case BehaviorAction::slow_down: return "slow_down";
    }
    return "follow_lane";
}

std::optional<BehaviorAction> action_from_name(std::string_view name) {
    for (auto a : kAllActions) {
        if (action_name(a) == name) return a;
    }
    return std::nullopt;
}

int action_to_wire(BehaviorAction action) {
    switch (action) {
        case BehaviorAction::lane_right: return 0;
        case BehaviorAction::lane_left: return 1;
        case BehaviorAction::follow_lane: return 2;
        case BehaviorAction::speed_up: return 3;
        case BehaviorAction::slow_down: return 4;
    }
    return 2;
}

std::optional<BehaviorAction> action_from_wire(long long code) {
    switch (code) {
        case 0: return BehaviorAction::lane_right;
        case 1: return BehaviorAction::lane_left;
        case 2: return BehaviorAction::follow_lane;
        case 3: return BehaviorAction::speed_up;
        case 4: return BehaviorAction::slow_down;
        default: return std::nullopt;
    }
}

}  // namespace mergesim

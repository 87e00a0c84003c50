#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mergesim/action.hpp"
#include "mergesim/world.hpp"

namespace mergesim {

enum class PolicyKind { random, heuristic, external };

struct PolicySpec {
    PolicyKind kind = PolicyKind::random;
    std::string endpoint;     // external: shell command, or "unix:PATH" for a local socket
    double timeout_s = 10.0;  // external: per-response deadline

    /// "random", "heuristic" or "external:CMD_OR_ADDR"; throws ConfigError.
    static PolicySpec parse(std::string_view text);
    std::string label() const;
};

/// Per-agent input of one decision round.
struct AgentStep {
    int id = -1;
    Observation obs;
    double reward = 0.0;
    bool done = false;  // the agent left the episode; no action expected
};

/// Source of behavioural decisions for every agent of an episode.
class Policy {
public:
    virtual ~Policy() = default;
    virtual void begin_episode(const World& world, std::uint64_t seed, const nlohmann::ordered_json& config);
    /// One action per agent that is not done. Missing entries follow the lane.
    virtual std::map<int, BehaviorAction> decide(const World& world, const std::vector<AgentStep>& agents) = 0;
    virtual void end_episode(const nlohmann::ordered_json& summary);
    /// Count of protocol warnings (invalid or missing actions) so far.
    virtual int warnings() const { return 0; }
};

/// Observation-blind uniform choice, a pure function of (seed, step, id).
BehaviorAction random_action(std::uint64_t seed, int step, int vehicle_id);

/// Rule-based driver: ramp vehicles match the traffic and request the
/// merge when the adjacent gap is open; highway vehicles keep a comfortable
/// headway and yield to ramp vehicles alongside in the merge section.
BehaviorAction heuristic_action(const World& world, const Vehicle& ego);

class RandomPolicy : public Policy {
public:
    void begin_episode(const World& world, std::uint64_t seed, const nlohmann::ordered_json& config) override;
    std::map<int, BehaviorAction> decide(const World& world, const std::vector<AgentStep>& agents) override;

private:
    std::uint64_t seed_ = 0;
};

class HeuristicPolicy : public Policy {
public:
    std::map<int, BehaviorAction> decide(const World& world, const std::vector<AgentStep>& agents) override;
};

/// Builds the policy described by `spec`; external policies connect lazily
/// at the first episode.
std::unique_ptr<Policy> make_policy(const PolicySpec& spec);

}  // namespace mergesim

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mergesim/policy.hpp"

namespace mergesim {

inline constexpr int kProtocolVersion = 1;
inline constexpr const char* kProtocolSchema = "mergesim.protocol/1";

/// Bidirectional newline-delimited text channel.
class LineChannel {
public:
    virtual ~LineChannel() = default;
    /// Writes `line` plus a newline; throws ProtocolError if the peer is gone.
    virtual void send(const std::string& line) = 0;
    /// Next line without its newline. Throws ProtocolError on timeout or EOF.
    virtual std::string receive(double timeout_s) = 0;
};

/// Runs `command` under /bin/sh with its stdin and stdout connected to
/// the channel. The child is terminated when the channel is destroyed.
class ProcessChannel : public LineChannel {
public:
    explicit ProcessChannel(const std::string& command);
    ~ProcessChannel() override;
    ProcessChannel(const ProcessChannel&) = delete;
    ProcessChannel& operator=(const ProcessChannel&) = delete;

    void send(const std::string& line) override;
    std::string receive(double timeout_s) override;

private:
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
};

/// Client end of a local stream socket.
class SocketChannel : public LineChannel {
public:
    explicit SocketChannel(const std::string& path);
    ~SocketChannel() override;
    SocketChannel(const SocketChannel&) = delete;
    SocketChannel& operator=(const SocketChannel&) = delete;

    void send(const std::string& line) override;
    std::string receive(double timeout_s) override;

private:
    int fd_ = -1;
    std::string buffer_;
};

/// "unix:PATH" connects to a socket; anything else is a shell command.
std::unique_ptr<LineChannel> open_channel(const std::string& endpoint);

/// Reads one line from a file descriptor with a deadline, buffering any
/// bytes past the newline in `buffer`. Shared by both channel kinds.
std::string read_line(int fd, std::string& buffer, double timeout_s);

nlohmann::ordered_json observation_to_json(const Observation& obs);
Observation observation_from_json(const nlohmann::json& rows, int ego_id);

nlohmann::ordered_json hello_message(std::uint64_t seed, const nlohmann::ordered_json& config);
nlohmann::ordered_json step_message(int step, const std::vector<AgentStep>& agents);
nlohmann::ordered_json actions_message(int step, const std::map<int, BehaviorAction>& actions);
nlohmann::ordered_json episode_end_message(const nlohmann::ordered_json& summary);

/// Decodes an "actions" response for `step`. Agents in `expected` without
/// a valid action id follow their lane and increment `warnings`. Throws
/// ProtocolError when the line is not a well-formed actions message for
/// this step.
std::map<int, BehaviorAction> parse_actions(const std::string& line, int step, const std::vector<int>& expected,
                                            int& warnings);

/// Policy answered by an external process over the line protocol; one
/// connection per episode, opened in begin_episode.
class ExternalPolicy : public Policy {
public:
    explicit ExternalPolicy(PolicySpec spec);
    void begin_episode(const World& world, std::uint64_t seed, const nlohmann::ordered_json& config) override;
    std::map<int, BehaviorAction> decide(const World& world, const std::vector<AgentStep>& agents) override;
    void end_episode(const nlohmann::ordered_json& summary) override;
    int warnings() const override { return warnings_; }

private:
    PolicySpec spec_;
    std::unique_ptr<LineChannel> channel_;
    int warnings_ = 0;
};

}  // namespace mergesim

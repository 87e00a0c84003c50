#include "mergesim/protocol.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>

#include "mergesim/errors.hpp"

namespace mergesim {

namespace {

void write_all(int fd, const std::string& data, bool socket) {
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = socket ? ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL)
                                 : ::write(fd, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("external policy: write failed: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

}  // namespace

std::string read_line(int fd, std::string& buffer, double timeout_s) {
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + std::chrono::duration<double>(timeout_s);
    while (true) {
        if (auto pos = buffer.find('\n'); pos != std::string::npos) {
            std::string line = buffer.substr(0, pos);
            buffer.erase(0, pos + 1);
            return line;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
        if (left <= 0) throw ProtocolError("external policy: timed out waiting for a response");
        pollfd p{fd, POLLIN, 0};
        const int r = ::poll(&p, 1, static_cast<int>(left));
        if (r < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("external policy: poll failed: ") + std::strerror(errno));
        }
        if (r == 0) continue;
        char chunk[4096];
        const ssize_t n = ::read(fd, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError(std::string("external policy: read failed: ") + std::strerror(errno));
        }
        if (n == 0) throw ProtocolError("external policy: connection closed by peer");
        buffer.append(chunk, static_cast<std::size_t>(n));
    }
}

ProcessChannel::ProcessChannel(const std::string& command) {
    ::signal(SIGPIPE, SIG_IGN);
    int in[2], out[2];
    if (::pipe(in) != 0) throw ProtocolError("external policy: pipe() failed");
    if (::pipe(out) != 0) {
        ::close(in[0]);
        ::close(in[1]);
        throw ProtocolError("external policy: pipe() failed");
    }
    pid_ = ::fork();
    if (pid_ < 0) throw ProtocolError("external policy: fork() failed");
    if (pid_ == 0) {
        ::dup2(in[0], STDIN_FILENO);
        ::dup2(out[1], STDOUT_FILENO);
        ::close(in[0]);
        ::close(in[1]);
        ::close(out[0]);
        ::close(out[1]);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(in[0]);
    ::close(out[1]);
    to_child_ = in[1];
    from_child_ = out[0];
}

ProcessChannel::~ProcessChannel() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    if (pid_ > 0) {
        int status = 0;
        for (int i = 0; i < 50; ++i) {
            if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
            ::usleep(10000);
        }
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
    }
}

void ProcessChannel::send(const std::string& line) { write_all(to_child_, line + "\n", false); }

std::string ProcessChannel::receive(double timeout_s) { return read_line(from_child_, buffer_, timeout_s); }

SocketChannel::SocketChannel(const std::string& path) {
    sockaddr_un addr{};
    if (path.size() >= sizeof(addr.sun_path)) throw ProtocolError("external policy: socket path too long");
    fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (fd_ < 0) throw ProtocolError("external policy: socket() failed");
    addr.sun_family = AF_UNIX;
    std::strncpy(addr.sun_path, path.c_str(), sizeof(addr.sun_path) - 1);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw ProtocolError("external policy: cannot connect to " + path + ": " + std::strerror(errno));
    }
}

SocketChannel::~SocketChannel() {
    if (fd_ >= 0) ::close(fd_);
}

void SocketChannel::send(const std::string& line) { write_all(fd_, line + "\n", true); }

std::string SocketChannel::receive(double timeout_s) { return read_line(fd_, buffer_, timeout_s); }

std::unique_ptr<LineChannel> open_channel(const std::string& endpoint) {
    if (endpoint.rfind("unix:", 0) == 0) return std::make_unique<SocketChannel>(endpoint.substr(5));
    return std::make_unique<ProcessChannel>(endpoint);
}

nlohmann::ordered_json observation_to_json(const Observation& obs) {
    auto rows = nlohmann::ordered_json::array();
    rows.push_back(obs.ego);
    for (const auto& r : obs.others) rows.push_back(r);
    return rows;
}

Observation observation_from_json(const nlohmann::json& rows, int ego_id) {
    Observation obs;
    obs.ego_id = ego_id;
    if (!rows.is_array() || rows.empty()) throw ProtocolError("observation must be a non-empty array of rows");
    obs.ego = rows.at(0).get<ObservationRow>();
    for (std::size_t i = 1; i < rows.size(); ++i) obs.others.push_back(rows.at(i).get<ObservationRow>());
    return obs;
}

nlohmann::ordered_json hello_message(std::uint64_t seed, const nlohmann::ordered_json& config) {
    nlohmann::ordered_json m;
    m["type"] = "hello";
    m["protocol"] = kProtocolVersion;
    m["schema"] = kProtocolSchema;
    m["seed"] = seed;
    m["actions"] = {"lane_right", "lane_left", "follow_lane", "speed_up", "slow_down"};
    m["config"] = config;
    return m;
}

nlohmann::ordered_json step_message(int step, const std::vector<AgentStep>& agents) {
    nlohmann::ordered_json m;
    m["type"] = "step";
    m["step"] = step;
    auto list = nlohmann::ordered_json::array();
    for (const auto& a : agents) {
        nlohmann::ordered_json e;
        e["id"] = a.id;
        e["obs"] = observation_to_json(a.obs);
        e["reward"] = a.reward;
        e["done"] = a.done;
        list.push_back(std::move(e));
    }
    m["agents"] = std::move(list);
    return m;
}

nlohmann::ordered_json actions_message(int step, const std::map<int, BehaviorAction>& actions) {
    nlohmann::ordered_json m;
    m["type"] = "actions";
    m["step"] = step;
    auto list = nlohmann::ordered_json::array();
    for (const auto& [id, a] : actions) list.push_back({{"id", id}, {"action", action_to_wire(a)}});
    m["actions"] = std::move(list);
    return m;
}

nlohmann::ordered_json episode_end_message(const nlohmann::ordered_json& summary) {
    nlohmann::ordered_json m;
    m["type"] = "episode_end";
    m["summary"] = summary;
    return m;
}

std::map<int, BehaviorAction> parse_actions(const std::string& line, int step, const std::vector<int>& expected,
                                            int& warnings) {
    nlohmann::json m;
    try {
        m = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ProtocolError(std::string("external policy: malformed response: ") + e.what());
    }
    if (!m.is_object() || m.value("type", "") != "actions") throw ProtocolError("external policy: expected an actions message");
    if (!m.contains("step") || !m["step"].is_number_integer() || m["step"].get<long long>() != step)
        throw ProtocolError("external policy: response for the wrong step");
    const auto& list = m.contains("actions") ? m["actions"] : nlohmann::json();
    if (!list.is_array()) throw ProtocolError("external policy: actions must be an array");

    std::map<int, BehaviorAction> out;
    for (const auto& e : list) {
        if (!e.is_object() || !e.contains("id") || !e["id"].is_number_integer()) {
            ++warnings;
            continue;
        }
        const int id = e["id"].get<int>();
        std::optional<BehaviorAction> a;
        if (e.contains("action") && e["action"].is_number_integer()) a = action_from_wire(e["action"].get<long long>());
        if (!a) {
            ++warnings;
            a = BehaviorAction::follow_lane;
        }
        out[id] = *a;
    }
    for (int id : expected) {
        if (!out.count(id)) {
            ++warnings;
            out[id] = BehaviorAction::follow_lane;
        }
    }
    for (auto it = out.begin(); it != out.end();) {
        if (std::find(expected.begin(), expected.end(), it->first) == expected.end())
            it = out.erase(it);
        else
            ++it;
    }
    return out;
}

ExternalPolicy::ExternalPolicy(PolicySpec spec) : spec_(std::move(spec)) {}

void ExternalPolicy::begin_episode(const World&, std::uint64_t seed, const nlohmann::ordered_json& config) {
    channel_ = open_channel(spec_.endpoint);
    channel_->send(hello_message(seed, config).dump());
    nlohmann::json ack;
    try {
        ack = nlohmann::json::parse(channel_->receive(spec_.timeout_s));
    } catch (const nlohmann::json::parse_error& e) {
        throw ProtocolError(std::string("external policy: malformed handshake: ") + e.what());
    }
    if (!ack.is_object() || ack.value("type", "") != "hello_ack" || ack.value("protocol", -1) != kProtocolVersion)
        throw ProtocolError("external policy: handshake rejected");
}

std::map<int, BehaviorAction> ExternalPolicy::decide(const World& world, const std::vector<AgentStep>& agents) {
    if (!channel_) throw ProtocolError("external policy: no open connection");
    channel_->send(step_message(world.step, agents).dump());
    std::vector<int> expected;
    for (const auto& a : agents)
        if (!a.done) expected.push_back(a.id);
    return parse_actions(channel_->receive(spec_.timeout_s), world.step, expected, warnings_);
}

void ExternalPolicy::end_episode(const nlohmann::ordered_json& summary) {
    if (!channel_) return;
    try {
        channel_->send(episode_end_message(summary).dump());
    } catch (const ProtocolError&) {
        // The responder may already have exited after its last action.
    }
    channel_.reset();
}

}  // namespace mergesim

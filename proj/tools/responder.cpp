// Reference responder for the external-policy protocol, used by the tests
// and as a template for trainers. Modes:
//   follow           every agent follows its lane
//   replay FILE      answers with the actions stored in an episode record
//   invalid          answers with an out-of-range action id
//   silent           completes the handshake, then never answers
// With --socket PATH it serves one connection on a local socket instead of
// stdin/stdout.
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mergesim/errors.hpp"
#include "mergesim/protocol.hpp"
#include "mergesim/record.hpp"

namespace {

using namespace mergesim;
using json = nlohmann::json;

struct Io {
    int in_fd = STDIN_FILENO;
    int out_fd = STDOUT_FILENO;
    std::string buffer;

    bool read(std::string& line) {
        try {
            line = read_line(in_fd, buffer, 3600.0);
            return true;
        } catch (const ProtocolError&) {
            return false;
        }
    }
    void write(const std::string& line) {
        const std::string data = line + "\n";
        std::size_t off = 0;
        while (off < data.size()) {
            const ssize_t n = ::write(out_fd, data.data() + off, data.size() - off);
            if (n <= 0) return;
            off += static_cast<std::size_t>(n);
        }
    }
};

int serve(Io& io, const std::string& mode, const std::map<int, std::map<int, BehaviorAction>>& log) {
    std::string line;
    while (io.read(line)) {
        const json m = json::parse(line);
        const std::string type = m.value("type", "");
        if (type == "hello") {
            io.write(json{{"type", "hello_ack"}, {"protocol", kProtocolVersion}}.dump());
        } else if (type == "step") {
            if (mode == "silent") continue;
            const int step = m.at("step").get<int>();
            std::map<int, BehaviorAction> actions;
            for (const auto& a : m.at("agents")) {
                if (a.at("done").get<bool>()) continue;
                const int id = a.at("id").get<int>();
                actions[id] = BehaviorAction::follow_lane;
                if (mode == "replay") {
                    auto s = log.find(step);
                    if (s != log.end() && s->second.count(id)) actions[id] = s->second.at(id);
                }
            }
            auto msg = actions_message(step, actions);
            if (mode == "invalid")
                for (auto& a : msg["actions"]) a["action"] = 7;
            io.write(msg.dump());
        } else if (type == "episode_end") {
            return 0;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reference responder for the external-policy protocol"};
    std::string mode = "follow";
    std::string record_path;
    std::string socket_path;
    app.add_option("mode", mode, "follow | replay | invalid | silent")
        ->check(CLI::IsMember({"follow", "replay", "invalid", "silent"}));
    app.add_option("record", record_path, "Episode record for replay mode");
    app.add_option("--socket", socket_path, "Serve one connection on this local socket");
    CLI11_PARSE(app, argc, argv);

    std::map<int, std::map<int, BehaviorAction>> log;
    if (mode == "replay") {
        std::ifstream in(record_path);
        if (!in) {
            std::cerr << "cannot read record '" << record_path << "'\n";
            return 1;
        }
        for (const auto& step : read_record(in).steps)
            for (const auto& [id, a] : step.actions) log[step.step][id] = a;
    }

    Io io;
    if (socket_path.empty()) return serve(io, mode, log);

    const int server = ::socket(AF_UNIX, SOCK_STREAM, 0);
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    std::strncpy(addr.sun_path, socket_path.c_str(), sizeof(addr.sun_path) - 1);
    ::unlink(socket_path.c_str());
    if (::bind(server, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(server, 1) != 0) {
        std::perror("socket");
        return 1;
    }
    const int conn = ::accept(server, nullptr, nullptr);
    io.in_fd = io.out_fd = conn;
    const int rc = serve(io, mode, log);
    ::close(conn);
    ::close(server);
    ::unlink(socket_path.c_str());
    return rc;
}

#include "mergesim/record.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "mergesim/errors.hpp"

namespace mergesim {

namespace {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

Lane lane_from(const json& j) {
    const std::string s = j.get<std::string>();
    if (s == "highway") return Lane::highway;
    if (s == "ramp") return Lane::ramp;
    throw ConfigError("record: unknown lane '" + s + "'");
}

ojson finite_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson to_json(const VehicleSnapshot& v) {
    ojson j;
    j["id"] = v.id;
    j["x"] = v.state.x;
    j["y"] = v.state.y;
    j["vx"] = v.state.v_x;
    j["vy"] = v.state.v_y;
    j["psi"] = v.state.psi;
    j["lane"] = lane_name(v.lane);
    j["target_lane"] = lane_name(v.target_lane);
    j["changing"] = v.changing;
    j["crashed"] = v.crashed;
    j["merged"] = v.merged;
    j["failed_merge"] = v.failed_merge;
    j["exited"] = v.exited;
    return j;
}

VehicleSnapshot snapshot_from(const json& j) {
    VehicleSnapshot v;
    v.id = j.at("id").get<int>();
    v.state.x = j.at("x").get<double>();
    v.state.y = j.at("y").get<double>();
    v.state.v_x = j.at("vx").get<double>();
    v.state.v_y = j.at("vy").get<double>();
    v.state.psi = j.at("psi").get<double>();
    v.lane = lane_from(j.at("lane"));
    v.target_lane = lane_from(j.at("target_lane"));
    v.changing = j.at("changing").get<bool>();
    v.crashed = j.at("crashed").get<bool>();
    v.merged = j.at("merged").get<bool>();
    v.failed_merge = j.at("failed_merge").get<bool>();
    v.exited = j.at("exited").get<bool>();
    return v;
}

ojson to_json(const ShieldOutcome& o) {
    ojson j;
    j["id"] = o.vehicle_id;
    j["v_plan"] = o.v_plan;
    j["v_nominal"] = o.v_nominal;
    j["v_safe"] = o.v_safe;
    j["v_cbf"] = o.v_cbf;
    j["lc_requested"] = o.lane_change_requested;
    j["lc_allowed"] = o.lane_change_allowed;
    j["slack"] = o.slack_used;
    j["fault"] = o.fault;
    j["active"] = o.active_constraints;
    j["candidates"] = o.candidate_constraints;
    return j;
}

ShieldOutcome outcome_from(const json& j) {
    ShieldOutcome o;
    o.vehicle_id = j.at("id").get<int>();
    o.v_plan = j.at("v_plan").get<double>();
    o.v_nominal = j.at("v_nominal").get<double>();
    o.v_safe = j.at("v_safe").get<double>();
    o.v_cbf = j.at("v_cbf").get<double>();
    o.lane_change_requested = j.at("lc_requested").get<bool>();
    o.lane_change_allowed = j.at("lc_allowed").get<bool>();
    o.slack_used = j.at("slack").get<double>();
    o.fault = j.at("fault").get<bool>();
    o.active_constraints = j.at("active").get<std::vector<std::string>>();
    o.candidate_constraints = j.at("candidates").get<std::vector<std::string>>();
    return o;
}

ojson to_json(const StepRecord& s) {
    ojson j;
    j["type"] = "step";
    j["step"] = s.step;
    auto vehicles = ojson::array();
    for (const auto& v : s.vehicles) vehicles.push_back(to_json(v));
    j["vehicles"] = std::move(vehicles);
    auto actions = ojson::array();
    for (const auto& [id, a] : s.actions) actions.push_back({{"id", id}, {"action", std::string(action_name(a))}});
    j["actions"] = std::move(actions);
    auto shield = ojson::array();
    for (const auto& o : s.outcomes) shield.push_back(to_json(o));
    j["shield"] = std::move(shield);
    auto rewards = ojson::array();
    for (const auto& [id, r] : s.rewards) rewards.push_back({{"id", id}, {"reward", r}});
    j["rewards"] = std::move(rewards);
    auto topo = ojson::array();
    for (const auto& [id, parents] : s.topology.parents) topo.push_back({{"id", id}, {"parents", parents}});
    j["topology"] = std::move(topo);
    return j;
}

StepRecord step_from(const json& j) {
    StepRecord s;
    s.step = j.at("step").get<int>();
    for (const auto& v : j.at("vehicles")) s.vehicles.push_back(snapshot_from(v));
    for (const auto& a : j.at("actions")) {
        auto act = action_from_name(a.at("action").get<std::string>());
        if (!act) throw ConfigError("record: unknown action in step " + std::to_string(s.step));
        s.actions.emplace_back(a.at("id").get<int>(), *act);
    }
    for (const auto& o : j.at("shield")) s.outcomes.push_back(outcome_from(o));
    for (const auto& r : j.at("rewards")) s.rewards.emplace_back(r.at("id").get<int>(), r.at("reward").get<double>());
    for (const auto& t : j.at("topology")) s.topology.parents[t.at("id").get<int>()] = t.at("parents").get<std::vector<int>>();
    return s;
}

}  // namespace

const VehicleInfo* EpisodeRecord::info(int id) const {
    for (const auto& v : vehicles)
        if (v.id == id) return &v;
    return nullptr;
}

VehicleSnapshot snapshot(const Vehicle& v) {
    return {v.id, v.state, v.lane, v.target_lane, v.changing(), v.crashed, v.merged, v.failed_merge, v.exited};
}

std::vector<VehicleSnapshot> snapshot(const World& world) {
    std::vector<VehicleSnapshot> out;
    for (const auto& v : world.vehicles) out.push_back(snapshot(v));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return out;
}

StepRecord make_step_record(const World& world, const StepReport& report, std::vector<std::pair<int, double>> rewards) {
    StepRecord s;
    s.step = report.step;
    s.vehicles = snapshot(world);
    for (const auto& [id, a] : report.actions) s.actions.emplace_back(id, a);
    for (const auto& [id, o] : report.outcomes) s.outcomes.push_back(o);
    s.rewards = std::move(rewards);
    s.topology = report.topology;
    return s;
}

nlohmann::ordered_json to_json(const EpisodeSummary& s) {
    ojson j;
    j["seed"] = s.seed;
    j["shield"] = s.shield;
    j["policy"] = s.policy;
    j["reward"] = s.reward;
    j["steps"] = s.steps;
    j["n_vehicles"] = s.n_vehicles;
    j["ramp_spawned"] = s.ramp_spawned;
    j["merged"] = s.merged;
    j["merging_pct"] = s.merging_pct ? ojson(*s.merging_pct) : ojson(nullptr);
    j["min_headway"] = finite_or_null(s.min_headway);
    j["avg_speed"] = s.avg_speed;
    j["collisions"] = s.collisions;
    j["shield_faults"] = s.shield_faults;
    j["protocol_warnings"] = s.protocol_warnings;
    j["mean_reward"] = s.mean_reward;
    return j;
}

EpisodeSummary summary_from_json(const nlohmann::json& j) {
    EpisodeSummary s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.shield = j.at("shield").get<std::string>();
    s.policy = j.at("policy").get<std::string>();
    s.reward = j.at("reward").get<std::string>();
    s.steps = j.at("steps").get<int>();
    s.n_vehicles = j.at("n_vehicles").get<int>();
    s.ramp_spawned = j.at("ramp_spawned").get<int>();
    s.merged = j.at("merged").get<int>();
    if (!j.at("merging_pct").is_null()) s.merging_pct = j.at("merging_pct").get<double>();
    s.min_headway = j.at("min_headway").is_null() ? std::numeric_limits<double>::infinity()
                                                  : j.at("min_headway").get<double>();
    s.avg_speed = j.at("avg_speed").get<double>();
    s.collisions = j.at("collisions").get<int>();
    s.shield_faults = j.at("shield_faults").get<int>();
    s.protocol_warnings = j.at("protocol_warnings").get<int>();
    s.mean_reward = j.at("mean_reward").get<double>();
    return s;
}

void write_record(std::ostream& out, const EpisodeRecord& r) {
    ojson header;
    header["type"] = "header";
    header["schema"] = r.schema;
    header["seed"] = r.seed;
    header["policy"] = r.policy;
    header["config"] = to_json(r.config);
    auto vehicles = ojson::array();
    for (const auto& v : r.vehicles)
        vehicles.push_back({{"id", v.id}, {"origin", lane_name(v.origin)}, {"length", v.length}, {"width", v.width}});
    header["vehicles"] = std::move(vehicles);
    auto initial = ojson::array();
    for (const auto& v : r.initial) initial.push_back(to_json(v));
    header["initial"] = std::move(initial);
    out << header.dump() << '\n';
    for (const auto& s : r.steps) out << to_json(s).dump() << '\n';
    if (r.summary) {
        ojson tail;
        tail["type"] = "summary";
        tail["summary"] = to_json(*r.summary);
        out << tail.dump() << '\n';
    }
}

EpisodeRecord read_record(std::istream& in) {
    EpisodeRecord r;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            const std::string type = j.at("type").get<std::string>();
            if (type == "header") {
                r.schema = j.at("schema").get<std::string>();
                if (r.schema != kRecordSchema) throw ConfigError("unsupported record schema '" + r.schema + "'");
                r.seed = j.at("seed").get<std::uint64_t>();
                r.policy = j.at("policy").get<std::string>();
                r.config = sim_config_from_json(j.at("config"));
                for (const auto& v : j.at("vehicles"))
                    r.vehicles.push_back({v.at("id").get<int>(), lane_from(v.at("origin")), v.at("length").get<double>(),
                                          v.at("width").get<double>()});
                for (const auto& v : j.at("initial")) r.initial.push_back(snapshot_from(v));
                have_header = true;
            } else if (type == "step") {
                r.steps.push_back(step_from(j));
            } else if (type == "summary") {
                r.summary = summary_from_json(j.at("summary"));
            } else {
                throw ConfigError("unknown line type '" + type + "'");
            }
        } catch (const ConfigError& e) {
            throw ConfigError("record line " + std::to_string(line_no) + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("record line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_header) throw ConfigError("record: missing header line");
    return r;
}

}  // namespace mergesim

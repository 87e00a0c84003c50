#include "mergesim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "mergesim/errors.hpp"

namespace mergesim {

namespace {

using ojson = nlohmann::ordered_json;

std::string where(const std::string& source, const YAML::Mark& mark) {
    if (mark.line < 0) return source + ": ";
    return source + ":" + std::to_string(mark.line + 1) + ": ";
}

// One mapping of the config file; reports unknown keys and type errors
// with their line.
class Section {
public:
    Section(const YAML::Node& node, std::string name, std::string source)
        : node_(node), name_(std::move(name)), source_(std::move(source)) {
        if (node_ && !node_.IsMap()) throw ConfigError(where(source_, node_.Mark()) + name_ + " must be a mapping");
    }

    template <typename T>
    void get(const char* key, T& out) {
        used_.insert(key);
        if (!node_) return;
        const YAML::Node v = node_[key];
        if (!v) return;
        try {
            out = v.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(where(source_, v.Mark()) + name_ + "." + key + ": invalid value");
        }
    }

    YAML::Node child(const char* key) {
        used_.insert(key);
        return node_ ? node_[key] : YAML::Node();
    }

    void finish() const {
        if (!node_) return;
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!used_.count(key))
                throw ConfigError(where(source_, kv.first.Mark()) + "unknown key '" + (name_.empty() ? "" : name_ + ".") + key + "'");
        }
    }

private:
    YAML::Node node_;
    std::string name_;
    std::string source_;
    std::set<std::string> used_;
};

template <typename F>
void collect(std::vector<std::string>& errors, F&& check) {
    try {
        check();
    } catch (const ConfigError& e) {
        errors.emplace_back(e.what());
    }
}

}  // namespace

void SimConfig::validate() const {
    scenario.validate();
    road.validate();
    vehicle.validate();
    shield.validate();
    reward.validate();
    if (!(tracking.tau_lateral > 0.0 && tracking.tau_heading > 0.0 && tracking.k_speed >= 0.0))
        throw ConfigError("tracking gains must be positive");
    if (!(tracking.lane_done_fraction > 0.0 && tracking.lane_done_fraction < 0.5))
        throw ConfigError("tracking.lane_done_fraction must lie in (0, 0.5)");
}

RunConfig parse_run_config(const std::string& yaml_text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(where(source, e.mark) + "parse error: " + e.msg);
    }
    RunConfig rc;
    if (root.IsNull()) return rc;
    Section top(root, "", source);

    SimConfig& sim = rc.sim;
    {
        Section s(top.child("scenario"), "scenario", source);
        auto& c = sim.scenario;
        s.get("n_vehicles", c.n_vehicles);
        s.get("comm_range", c.comm_range);
        s.get("perception_n", c.perception_n);
        s.get("tau", c.tau);
        s.get("dt", c.dt);
        s.get("episode_steps", c.episode_steps);
        s.get("spawn_spacing_min", c.spawn_spacing_min);
        std::vector<double> range{c.initial_speed_range.first, c.initial_speed_range.second};
        s.get("initial_speed_range", range);
        if (range.size() != 2) throw ConfigError(source + ": scenario.initial_speed_range must have two entries");
        c.initial_speed_range = {range[0], range[1]};
        s.get("ramp_share", c.ramp_share);
        s.get("spawn_jitter", c.spawn_jitter);
        s.get("highway_spawn_end", c.highway_spawn_end);
        s.get("ramp_spawn_end", c.ramp_spawn_end);
        s.get("speed_step", c.speed_step);
        s.finish();
    }
    {
        Section s(top.child("road"), "road", source);
        auto& r = sim.road;
        s.get("highway_lanes", r.highway_lanes);
        s.get("lane_width", r.lane_width);
        s.get("road_length", r.road_length);
        s.get("merge_start", r.merge_start);
        s.get("merge_length", r.merge_length);
        s.finish();
        const int lanes = r.highway_lanes;
        r = RoadNetwork::merging(r.lane_width, r.merge_start, r.merge_length, r.road_length);
        r.highway_lanes = lanes;
    }
    {
        Section s(top.child("vehicle"), "vehicle", source);
        auto& p = sim.vehicle;
        s.get("length", p.length);
        s.get("width", p.width);
        s.get("a_max", p.a_max);
        s.get("a_min", p.a_min);
        s.get("delta_max", p.delta_max);
        s.get("v_cap", p.v_cap);
        s.finish();
    }
    {
        Section s(top.child("shield"), "shield", source);
        auto& c = sim.shield;
        std::string mode(shield_mode_name(c.mode));
        s.get("mode", mode);
        c.mode = shield_mode_from_name(mode);
        s.get("eta", c.eta);
        s.get("k_eps", c.k_eps);
        s.get("wc_brake", c.wc_brake);
        s.get("wc_accel", c.wc_accel);
        s.get("tau_lat", c.tau_lat);
        s.finish();
    }
    {
        Section s(top.child("tracking"), "tracking", source);
        auto& t = sim.tracking;
        s.get("k_speed", t.k_speed);
        s.get("tau_lateral", t.tau_lateral);
        s.get("tau_heading", t.tau_heading);
        s.get("lane_done_fraction", t.lane_done_fraction);
        s.finish();
    }
    {
        Section s(top.child("reward"), "reward", source);
        auto& w = sim.reward;
        std::string fn(reward_function_name(sim.reward_fn));
        s.get("function", fn);
        sim.reward_fn = reward_function_from_name(fn);
        s.get("w_c", w.w_c);
        s.get("w_s", w.w_s);
        s.get("w_h", w.w_h);
        s.get("w_m", w.w_m);
        s.get("v_min", w.v_min);
        s.get("v_max", w.v_max);
        s.get("v_floor", w.v_floor);
        s.finish();
    }
    {
        Section s(top.child("run"), "run", source);
        s.get("episodes", rc.episodes);
        s.get("seed", rc.seed);
        std::string policy = rc.policy.kind == PolicyKind::external ? "external:" + rc.policy.endpoint : rc.policy.label();
        s.get("policy", policy);
        const double timeout = rc.policy.timeout_s;
        rc.policy = PolicySpec::parse(policy);
        rc.policy.timeout_s = timeout;
        s.get("policy_timeout", rc.policy.timeout_s);
        s.get("output_dir", rc.output_dir);
        s.get("trajectories", rc.emit_trajectories);
        s.get("jobs", rc.jobs);
        s.finish();
    }
    top.finish();

    sim.shield.tau = sim.scenario.tau;
    sim.shield.dt = sim.scenario.dt;
    sim.reward.tau = sim.scenario.tau;
    sim.reward.merge_length = sim.road.merge_length;
    return rc;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path);
}

ValidationReport validate_run_config(const RunConfig& rc) {
    ValidationReport report;
    const SimConfig& sim = rc.sim;
    collect(report.errors, [&] { sim.scenario.validate(); });
    collect(report.errors, [&] { sim.road.validate(); });
    collect(report.errors, [&] { sim.vehicle.validate(); });
    collect(report.errors, [&] { sim.shield.validate(); });
    collect(report.errors, [&] { sim.reward.validate(); });
    collect(report.errors, [&] {
        if (!(sim.tracking.tau_lateral > 0.0 && sim.tracking.tau_heading > 0.0 && sim.tracking.k_speed >= 0.0))
            throw ConfigError("tracking gains must be positive");
        if (!(sim.tracking.lane_done_fraction > 0.0 && sim.tracking.lane_done_fraction < 0.5))
            throw ConfigError("tracking.lane_done_fraction must lie in (0, 0.5)");
    });
    if (rc.episodes < 1) report.errors.emplace_back("run.episodes must be >= 1");
    if (rc.jobs < 1) report.errors.emplace_back("run.jobs must be >= 1");
    if (rc.output_dir.empty()) report.errors.emplace_back("run.output_dir must not be empty");
    if (!(rc.policy.timeout_s > 0.0)) report.errors.emplace_back("run.policy_timeout must be > 0");
    if (sim.scenario.initial_speed_range.second > sim.vehicle.v_cap)
        report.errors.emplace_back("scenario.initial_speed_range exceeds vehicle.v_cap");

    const int n = sim.scenario.n_vehicles;
    if (n < kMinReferenceVehicles || n > kMaxReferenceVehicles)
        report.warnings.push_back("scenario.n_vehicles = " + std::to_string(n) + " lies outside the reference range [" +
                                  std::to_string(kMinReferenceVehicles) + ", " +
                                  std::to_string(kMaxReferenceVehicles) + "]");
    if (report.errors.empty()) {
        collect(report.errors, [&] {
            std::mt19937_64 rng(rc.seed);
            spawn(sim.scenario, sim.road, sim.vehicle, rng);
        });
    }
    return report;
}

nlohmann::ordered_json to_json(const SimConfig& c) {
    ojson j;
    const auto& s = c.scenario;
    j["scenario"] = {{"n_vehicles", s.n_vehicles},
                     {"comm_range", s.comm_range},
                     {"perception_n", s.perception_n},
                     {"tau", s.tau},
                     {"dt", s.dt},
                     {"episode_steps", s.episode_steps},
                     {"spawn_spacing_min", s.spawn_spacing_min},
                     {"initial_speed_range", {s.initial_speed_range.first, s.initial_speed_range.second}},
                     {"ramp_share", s.ramp_share},
                     {"spawn_jitter", s.spawn_jitter},
                     {"highway_spawn_end", s.highway_spawn_end},
                     {"ramp_spawn_end", s.ramp_spawn_end},
                     {"speed_step", s.speed_step}};
    const auto& r = c.road;
    j["road"] = {{"highway_lanes", r.highway_lanes},
                 {"lane_width", r.lane_width},
                 {"road_length", r.road_length},
                 {"merge_start", r.merge_start},
                 {"merge_length", r.merge_length}};
    const auto& p = c.vehicle;
    j["vehicle"] = {{"length", p.length}, {"width", p.width},         {"a_max", p.a_max},
                    {"a_min", p.a_min},   {"delta_max", p.delta_max}, {"v_cap", p.v_cap}};
    const auto& sh = c.shield;
    j["shield"] = {{"mode", std::string(shield_mode_name(sh.mode))},
                   {"eta", sh.eta},
                   {"k_eps", sh.k_eps},
                   {"wc_brake", sh.wc_brake},
                   {"wc_accel", sh.wc_accel},
                   {"tau_lat", sh.tau_lat}};
    const auto& t = c.tracking;
    j["tracking"] = {{"k_speed", t.k_speed},
                     {"tau_lateral", t.tau_lateral},
                     {"tau_heading", t.tau_heading},
                     {"lane_done_fraction", t.lane_done_fraction}};
    const auto& w = c.reward;
    j["reward"] = {{"function", std::string(reward_function_name(c.reward_fn))},
                   {"w_c", w.w_c},
                   {"w_s", w.w_s},
                   {"w_h", w.w_h},
                   {"w_m", w.w_m},
                   {"v_min", w.v_min},
                   {"v_max", w.v_max},
                   {"v_floor", w.v_floor}};
    return j;
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
    SimConfig c;
    const auto& s = j.at("scenario");
    c.scenario.n_vehicles = s.at("n_vehicles").get<int>();
    c.scenario.comm_range = s.at("comm_range").get<double>();
    c.scenario.perception_n = s.at("perception_n").get<int>();
    c.scenario.tau = s.at("tau").get<double>();
    c.scenario.dt = s.at("dt").get<double>();
    c.scenario.episode_steps = s.at("episode_steps").get<int>();
    c.scenario.spawn_spacing_min = s.at("spawn_spacing_min").get<double>();
    c.scenario.initial_speed_range = {s.at("initial_speed_range").at(0).get<double>(),
                                      s.at("initial_speed_range").at(1).get<double>()};
    c.scenario.ramp_share = s.at("ramp_share").get<double>();
    c.scenario.spawn_jitter = s.at("spawn_jitter").get<double>();
    c.scenario.highway_spawn_end = s.at("highway_spawn_end").get<double>();
    c.scenario.ramp_spawn_end = s.at("ramp_spawn_end").get<double>();
    c.scenario.speed_step = s.at("speed_step").get<double>();
    const auto& r = j.at("road");
    c.road = RoadNetwork::merging(r.at("lane_width").get<double>(), r.at("merge_start").get<double>(),
                                  r.at("merge_length").get<double>(), r.at("road_length").get<double>());
    c.road.highway_lanes = r.at("highway_lanes").get<int>();
    const auto& p = j.at("vehicle");
    c.vehicle.length = p.at("length").get<double>();
    c.vehicle.width = p.at("width").get<double>();
    c.vehicle.a_max = p.at("a_max").get<double>();
    c.vehicle.a_min = p.at("a_min").get<double>();
    c.vehicle.delta_max = p.at("delta_max").get<double>();
    c.vehicle.v_cap = p.at("v_cap").get<double>();
    const auto& sh = j.at("shield");
    c.shield.mode = shield_mode_from_name(sh.at("mode").get<std::string>());
    c.shield.eta = sh.at("eta").get<double>();
    c.shield.k_eps = sh.at("k_eps").get<double>();
    c.shield.wc_brake = sh.at("wc_brake").get<double>();
    c.shield.wc_accel = sh.at("wc_accel").get<double>();
    c.shield.tau_lat = sh.at("tau_lat").get<double>();
    const auto& t = j.at("tracking");
    c.tracking.k_speed = t.at("k_speed").get<double>();
    c.tracking.tau_lateral = t.at("tau_lateral").get<double>();
    c.tracking.tau_heading = t.at("tau_heading").get<double>();
    c.tracking.lane_done_fraction = t.at("lane_done_fraction").get<double>();
    const auto& w = j.at("reward");
    c.reward_fn = reward_function_from_name(w.at("function").get<std::string>());
    c.reward.w_c = w.at("w_c").get<double>();
    c.reward.w_s = w.at("w_s").get<double>();
    c.reward.w_h = w.at("w_h").get<double>();
    c.reward.w_m = w.at("w_m").get<double>();
    c.reward.v_min = w.at("v_min").get<double>();
    c.reward.v_max = w.at("v_max").get<double>();
    c.reward.v_floor = w.at("v_floor").get<double>();
    c.shield.tau = c.reward.tau = c.scenario.tau;
    c.shield.dt = c.scenario.dt;
    c.reward.merge_length = c.road.merge_length;
    return c;
}

}  // namespace mergesim

// Command-line entry point: run batches, validate configs, emit the
// headway reward curve and re-derive metrics from stored records.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mergesim/config.hpp"
#include "mergesim/errors.hpp"
#include "mergesim/metrics.hpp"
#include "mergesim/record.hpp"
#include "mergesim/runner.hpp"

namespace {

using namespace mergesim;

enum ExitCode { kOk = 0, kConfigError = 1, kSafetyViolation = 2, kProtocolError = 3, kMismatch = 4 };

// Verbosity from MERGESIM_LOG: "quiet", "info" (default) or "debug".
int log_level() {
    const char* env = std::getenv("MERGESIM_LOG");
    const std::string v = env ? env : "info";
    if (v == "quiet") return 0;
    if (v == "debug") return 2;
    return 1;
}

void log(int level, const std::string& msg) {
    if (level <= log_level()) std::cerr << msg << '\n';
}

struct RunFlags {
    std::string config;
    std::optional<int> episodes;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> shield;
    std::optional<std::string> reward;
    std::optional<std::string> policy;
    std::optional<std::string> out;
    std::optional<int> jobs;
    bool trajectories = false;
    bool allow_out_of_range = false;
};

// Config file values first, then every flag given on the command line.
RunConfig resolve(const RunFlags& f) {
    RunConfig rc = f.config.empty() ? RunConfig{} : load_run_config(f.config);
    if (f.episodes) rc.episodes = *f.episodes;
    if (f.seed) rc.seed = *f.seed;
    if (f.shield) rc.sim.shield.mode = shield_mode_from_name(*f.shield);
    if (f.reward) rc.sim.reward_fn = reward_function_from_name(*f.reward);
    if (f.policy) {
        const double timeout = rc.policy.timeout_s;
        rc.policy = PolicySpec::parse(*f.policy);
        rc.policy.timeout_s = timeout;
    }
    if (f.out) rc.output_dir = *f.out;
    if (f.jobs) rc.jobs = *f.jobs;
    if (f.trajectories) rc.emit_trajectories = true;
    return rc;
}

int cmd_run(const RunFlags& flags) {
    const RunConfig rc = resolve(flags);
    const ValidationReport report = validate_run_config(rc);
    for (const auto& w : report.warnings) log(1, "warning: " + w);
    for (const auto& e : report.errors) log(0, "error: " + e);
    if (!report.ok()) return kConfigError;
    const int n = rc.sim.scenario.n_vehicles;
    if ((n < kMinReferenceVehicles || n > kMaxReferenceVehicles) && !flags.allow_out_of_range) {
        log(0, "error: fleet size outside the reference range; pass --allow-out-of-range to run anyway");
        return kConfigError;
    }

    log(2, "running " + std::to_string(rc.episodes) + " episodes from seed " + std::to_string(rc.seed));
    const BatchResult result = run_batch(rc);
    for (const auto& row : result.aggregate)
        std::cout << row.metric << ": " << format_number(row.mean) << " (" << format_number(row.std_error)
                  << ", n=" << row.n << ")\n";
    std::cout << "outputs written to " << rc.output_dir << "\n";
    if (result.violations > 0) {
        log(0, "safety violations in " + std::to_string(result.violations) + " episode(s)");
        return kSafetyViolation;
    }
    return kOk;
}

int cmd_validate(const std::string& path) {
    const RunConfig rc = load_run_config(path);
    const ValidationReport report = validate_run_config(rc);
    for (const auto& w : report.warnings) std::cout << "warning: " << w << '\n';
    for (const auto& e : report.errors) std::cout << "error: " << e << '\n';
    std::cout << (report.ok() ? "valid" : "invalid") << '\n';
    return report.ok() ? kOk : kConfigError;
}

int cmd_reward_curve(double v, double tau, double lo, double hi, int points, const std::string& out) {
    if (out.empty() || out == "-") {
        write_reward_curve(std::cout, v, tau, lo, hi, points);
        return kOk;
    }
    std::ofstream file(out);
    if (!file) throw ConfigError("cannot write '" + out + "'");
    write_reward_curve(file, v, tau, lo, hi, points);
    return kOk;
}

int cmd_replay(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read record '" + path + "'");
    const EpisodeRecord record = read_record(in);
    EpisodeSummary summary = summarize(record);
    if (record.summary) summary.protocol_warnings = record.summary->protocol_warnings;
    std::cout << to_json(summary).dump(2) << '\n';
    if (record.summary && to_json(*record.summary) != to_json(summary)) {
        log(0, "error: stored summary differs from the recomputed one");
        return kMismatch;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-agent on-ramp merging simulator with CBF safety shields"};
    app.require_subcommand(1);

    RunFlags flags;
    auto* run = app.add_subcommand("run", "Run a batch of episodes");
    run->add_option("--config", flags.config, "YAML configuration file")->check(CLI::ExistingFile);
    run->add_option("--episodes", flags.episodes, "Number of episodes")->check(CLI::PositiveNumber);
    run->add_option("--seed", flags.seed, "Seed of the first episode");
    run->add_option("--shield", flags.shield, "none | hss | mass");
    run->add_option("--reward", flags.reward, "default | custom");
    run->add_option("--policy", flags.policy, "random | heuristic | external:CMD_OR_unix:PATH");
    run->add_option("--out", flags.out, "Output directory");
    run->add_option("--jobs", flags.jobs, "Episodes run concurrently")->check(CLI::PositiveNumber);
    run->add_flag("--trajectories", flags.trajectories, "Write one record file per episode");
    run->add_flag("--allow-out-of-range", flags.allow_out_of_range, "Permit fleet sizes outside 7-11");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a configuration file");
    validate->add_option("config", validate_path, "YAML configuration file")->required();

    double curve_v = 25.0, curve_tau = 0.5, curve_lo = 1.0, curve_hi = 50.0;
    int curve_points = 197;
    std::string curve_out;
    auto* curve = app.add_subcommand("reward-curve", "Emit (dx, r_h) samples of the headway reward");
    curve->add_option("--speed", curve_v, "Ego speed in m/s");
    curve->add_option("--tau", curve_tau, "Headway threshold in s");
    curve->add_option("--dx-min", curve_lo, "Smallest gap in m");
    curve->add_option("--dx-max", curve_hi, "Largest gap in m");
    curve->add_option("--points", curve_points, "Number of samples");
    curve->add_option("--out", curve_out, "CSV file (stdout when omitted)");

    std::string replay_path;
    auto* replay = app.add_subcommand("replay", "Recompute metrics from a stored episode record");
    replay->add_option("record", replay_path, "Episode record (.jsonl)")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(flags);
        if (*validate) return cmd_validate(validate_path);
        if (*curve) return cmd_reward_curve(curve_v, curve_tau, curve_lo, curve_hi, curve_points, curve_out);
        if (*replay) return cmd_replay(replay_path);
    } catch (const ConfigError& e) {
        log(0, std::string("error: ") + e.what());
        return kConfigError;
    } catch (const ProtocolError& e) {
        log(0, std::string("protocol error: ") + e.what());
        return kProtocolError;
    }
    return kOk;
}

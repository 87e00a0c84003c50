#include "mergesim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "mergesim/errors.hpp"

namespace mergesim {

namespace {

namespace fs = std::filesystem;

// Writes through a temporary file so readers never observe partial output.
template <typename Writer>
void write_atomically(const fs::path& path, Writer&& writer) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
        writer(out);
        if (!out) throw ConfigError("error writing '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

}  // namespace

EpisodeRecord run_episode(const SimConfig& config, std::uint64_t seed, Policy& policy, const std::string& policy_label) {
    ScenarioConfig scenario = config.scenario;
    scenario.rng_seed = seed;
    World world = make_world(scenario, config.road, config.shield, config.vehicle, config.tracking);

    EpisodeRecord record;
    record.seed = seed;
    record.policy = policy_label;
    record.config = config;
    for (const auto& v : world.vehicles)
        record.vehicles.push_back({v.id, v.origin_lane, v.params.length, v.params.width});
    std::sort(record.vehicles.begin(), record.vehicles.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    record.initial = snapshot(world);

    policy.begin_episode(world, seed, to_json(config));
    std::map<int, double> last_reward;
    std::set<int> newly_done;
    std::vector<int> ids;
    for (const auto& v : world.vehicles) ids.push_back(v.id);
    std::sort(ids.begin(), ids.end());

    for (int t = 0; t < scenario.episode_steps; ++t) {
        std::vector<AgentStep> agents;
        bool any_acting = false;
        for (int id : ids) {
            const Vehicle& v = *world.find(id);
            const bool acting = v.active() && !v.crashed;
            if (!acting && !newly_done.count(id)) continue;
            agents.push_back({id, observe(world, v), last_reward[id], !acting});
            any_acting = any_acting || acting;
        }
        if (!any_acting) break;

        const std::map<int, BehaviorAction> actions = policy.decide(world, agents);
        const StepReport report = step_world(world, actions);

        std::vector<std::pair<int, double>> rewards;
        newly_done.clear();
        for (const auto& [id, action] : report.actions) {
            const Vehicle& v = *world.find(id);
            const double r = overall_reward(world, v, config.reward_fn, config.reward);
            rewards.emplace_back(id, r);
            last_reward[id] = r;
            if (!v.active() || v.crashed) newly_done.insert(id);
        }
        record.steps.push_back(make_step_record(world, report, std::move(rewards)));
    }

    EpisodeSummary summary = summarize(record);
    summary.protocol_warnings = policy.warnings();
    record.summary = summary;
    policy.end_episode(to_json(summary));
    return record;
}

std::string episode_file_name(std::uint64_t seed) { return "episode_" + std::to_string(seed) + ".jsonl"; }

BatchResult run_batch(const RunConfig& config, bool write_outputs) {
    const ValidationReport report = validate_run_config(config);
    if (!report.ok()) throw ConfigError(report.errors.front());
    const auto n = static_cast<std::size_t>(config.episodes);

    fs::path out_dir(config.output_dir);
    if (write_outputs) {
        std::error_code ec;
        fs::create_directories(out_dir / "episodes", ec);
        if (ec) throw ConfigError("cannot create output directory '" + out_dir.string() + "': " + ec.message());
    }

    std::vector<EpisodeSummary> summaries(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                const std::uint64_t seed = config.seed + i;
                auto policy = make_policy(config.policy);
                const EpisodeRecord record = run_episode(config.sim, seed, *policy, config.policy.label());
                summaries[i] = *record.summary;
                if (write_outputs && config.emit_trajectories)
                    write_atomically(out_dir / "episodes" / episode_file_name(seed),
                                     [&](std::ostream& os) { write_record(os, record); });
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(n)));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    BatchResult result;
    result.summaries = std::move(summaries);
    result.aggregate = aggregate(result.summaries);
    if (config.sim.shield.mode != ShieldMode::none) {
        for (const auto& s : result.summaries)
            if (is_violation(s, config.sim.scenario.tau)) ++result.violations;
    }
    if (write_outputs) {
        write_atomically(out_dir / "summaries.csv", [&](std::ostream& os) { write_summaries_csv(os, result.summaries); });
        write_atomically(out_dir / "aggregate.csv", [&](std::ostream& os) { write_aggregate_csv(os, result.aggregate); });
    }
    return result;
}

void write_reward_curve(std::ostream& out, double v_e, double tau, double dx_lo, double dx_hi, int points) {
    out << "dx,r_h\n";
    for (const auto& [dx, r] : headway_reward_curve(v_e, tau, dx_lo, dx_hi, points))
        out << format_number(dx) << ',' << format_number(r) << '\n';
}

}  // namespace mergesim
